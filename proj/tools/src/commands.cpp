#include "qolat_cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numbers>

#include "qolat/entanglement.hpp"
#include "qolat/errors.hpp"
#include "qolat/homodyne.hpp"
#include "qolat/lattice.hpp"
#include "qolat/meanfield.hpp"
#include "qolat/scattering.hpp"
#include "qolat/solvers.hpp"
#include "qolat/trajectories.hpp"
#include "qolat_cli/emit.hpp"

#ifndef QOLAT_VERSION
#define QOLAT_VERSION "0.0.0"
#endif

namespace qolat::cli {

using json = nlohmann::ordered_json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"scatter", "trajectory", "homodyne", "entropy", "phasediagram"};
  return names;
}

const std::vector<std::string>& sections_for(const std::string& subcommand) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"scatter", {"lattice", "scatter", "run"}},
      {"trajectory", {"lattice", "trajectory", "run"}},
      {"homodyne", {"homodyne", "run"}},
      {"entropy", {"entropy", "run"}},
      {"phasediagram", {"meanfield", "run"}},
  };
  auto it = table.find(subcommand);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

bool is_stochastic(const std::string& subcommand) {
  return subcommand == "trajectory" || subcommand == "homodyne";
}

namespace {

// ---------------------------------------------------------------------------
// Typed parameter blocks, built (and so validated) before any computation.

struct LatticeParams {
  LatticeSpec spec;
  double t0 = 1.0;
  double U = 0.0;
  SolverOptions solver;
  bool manifold = true;
};

LatticeParams lattice_params(const Config& c) {
  LatticeParams p;
  const auto sites = static_cast<int>(c.integer("lattice.sites"));
  const Boundary boundary = c.text("lattice.boundary") == "open" ? Boundary::open : Boundary::periodic;
  if (c.text("lattice.statistics") == "boson") {
    p.spec = LatticeSpec::bosons(sites, static_cast<int>(c.integer("lattice.particles")),
                                 static_cast<int>(c.integer("lattice.n_max")), boundary);
  } else {
    p.spec = LatticeSpec::fermions(sites, static_cast<int>(c.integer("lattice.n_up")),
                                   static_cast<int>(c.integer("lattice.n_down")), boundary);
  }
  p.spec.lattice_constant = c.real("lattice.lattice_constant");
  p.spec.validate();
  p.t0 = c.real("lattice.t0");
  p.U = c.real("lattice.U");
  const auto solver = c.text("lattice.solver");
  p.solver.method = solver == "dense"            ? SolverMethod::dense
                    : solver == "lanczos"        ? SolverMethod::lanczos
                    : solver == "imaginary_time" ? SolverMethod::imaginary_time
                                                 : SolverMethod::automatic;
  p.manifold = c.boolean("lattice.manifold");
  return p;
}

std::vector<StateVector> ground_mixture(const LatticeParams& p, double& energy, std::size_t& degeneracy) {
  auto basis = build_basis(p.spec);
  const auto H = build_hamiltonian(basis, p.t0, p.U);
  if (p.manifold) {
    auto gm = ground_manifold(H, p.solver);
    energy = gm.energy;
    degeneracy = gm.states.size();
    return gm.states;
  }
  auto gs = ground_state(H, p.solver);
  energy = gs.energy;
  degeneracy = 1;
  return {gs.state};
}

struct ScatterParams {
  LatticeParams lattice;
  ProbeGeometry geometry;
  int angles = 361;
};

ScatterParams scatter_params(const Config& c) {
  ScatterParams p;
  p.lattice = lattice_params(c);
  p.geometry.theta_in = c.real("scatter.theta_in");
  p.geometry.wavelength = c.real("scatter.wavelength");
  p.geometry.validate();
  p.angles = static_cast<int>(c.integer("scatter.angles"));
  if (p.lattice.spec.total_particles() == 0) throw ConfigError("scatter needs at least one particle");
  return p;
}

struct TrajectoryParams {
  std::optional<LatticeParams> lattice;
  int flat_range = 4;
  std::vector<int> illuminated;
  Channel channel = Channel::magnetization;
  Pattern pattern = Pattern::maximum;
  TrajectoryOptions options;
  std::size_t trajectories = 0;
  std::size_t log_trajectories = 0;
};

Channel parse_channel(const std::string& name, Statistics stats) {
  if (name == "auto") return stats == Statistics::boson ? Channel::boson : Channel::magnetization;
  if (name == "magnetization") return Channel::magnetization;
  if (name == "density") return Channel::density;
  if (name == "spin_up") return Channel::spin_up;
  if (name == "spin_down") return Channel::spin_down;
  return Channel::boson;
}

TrajectoryParams trajectory_params(const Config& c) {
  TrajectoryParams p;
  if (c.text("trajectory.prior") == "ground") {
    p.lattice = lattice_params(c);
    const auto stats = p.lattice->spec.statistics;
    p.channel = parse_channel(c.text("trajectory.channel"), stats);
    const bool boson = stats == Statistics::boson;
    if (boson && p.channel != Channel::boson && p.channel != Channel::density) {
      throw ConfigError("trajectory.channel '" + c.text("trajectory.channel") + "' requires fermions");
    }
    if (!boson && p.channel == Channel::boson) throw ConfigError("trajectory.channel 'boson' requires bosons");
    const auto K = c.integer("trajectory.illuminated");
    if (K > p.lattice->spec.sites) throw ConfigError("trajectory.illuminated exceeds lattice.sites");
    p.illuminated = first_sites(K == 0 ? p.lattice->spec.sites : static_cast<int>(K));
  } else {
    p.flat_range = static_cast<int>(c.integer("trajectory.flat_range"));
  }
  p.pattern = c.text("trajectory.pattern") == "minimum" ? Pattern::minimum : Pattern::maximum;
  p.options.coupling = c.real("trajectory.coupling");
  p.options.kappa = c.real("trajectory.kappa");
  p.options.duration = c.real("trajectory.duration");
  p.options.snapshot_times = c.real_list("trajectory.snapshots");
  std::sort(p.options.snapshot_times.begin(), p.options.snapshot_times.end());
  for (double t : p.options.snapshot_times) {
    if (t > p.options.duration) throw ConfigError("trajectory.snapshots must not exceed trajectory.duration");
  }
  p.trajectories = static_cast<std::size_t>(c.integer("trajectory.trajectories"));
  p.log_trajectories = std::min<std::size_t>(p.trajectories, c.integer("trajectory.log_trajectories"));
  return p;
}

struct HomodyneParams {
  HomodyneConfig cfg;
  double rate = 1.0;
  double duration = 1.0;
  std::size_t trajectories = 1;
  RobustnessOptions robustness;
  std::optional<std::pair<int, double>> query;
};

HomodyneParams homodyne_params(const Config& c) {
  HomodyneParams p;
  p.cfg.flux = c.real("homodyne.flux");
  p.cfg.delta_phi = c.real("homodyne.delta_phi");
  p.cfg.kappa = c.real("homodyne.kappa");
  p.cfg.coupling = c.real("homodyne.coupling");
  p.cfg.phi = c.real("homodyne.phi");
  p.cfg.omega_p = c.real("homodyne.omega_p");
  p.cfg.validate();
  p.rate = c.real("homodyne.rate");
  p.duration = c.real("homodyne.duration");
  p.trajectories = static_cast<std::size_t>(c.integer("homodyne.trajectories"));
  p.robustness.miss_probability = c.real("homodyne.miss_probability");
  p.robustness.mean_counts = static_cast<int>(c.integer("homodyne.mean_counts"));
  p.robustness.samples = static_cast<std::size_t>(c.integer("homodyne.samples"));
  p.robustness.rate_over_flux = p.rate / p.cfg.flux;
  if (const auto m = c.integer("homodyne.query_counts"); m >= 0) {
    p.query = std::make_pair(static_cast<int>(m), c.real("homodyne.query_time"));
  }
  return p;
}

struct EntropyParams {
  CountDistribution prior = CountDistribution::poisson(0.0);
  int counts = 0;
  double tau_max = 0.0;
  int tau_points = 1;
  double coupling = 1.0;
  EntropyBase base = EntropyBase::two;
};

EntropyParams entropy_params(const Config& c) {
  EntropyParams p;
  const auto family = c.text("entropy.prior");
  if (family == "poisson") {
    p.prior = CountDistribution::poisson(c.real("entropy.mean"));
  } else if (family == "skellam") {
    p.prior = CountDistribution::skellam(c.real("entropy.mean"));
  } else {
    p.prior = CountDistribution::binomial(static_cast<int>(c.integer("entropy.trials")), c.real("entropy.p"));
  }
  p.counts = static_cast<int>(c.integer("entropy.counts"));
  p.tau_max = c.real("entropy.tau_max");
  p.tau_points = static_cast<int>(c.integer("entropy.tau_points"));
  p.coupling = c.real("entropy.coupling");
  p.base = c.text("entropy.base") == "e" ? EntropyBase::e : EntropyBase::two;
  return p;
}

struct PhaseDiagramParams {
  std::vector<double> mu_grid;
  std::vector<double> alpha_grid;
  QuantumLatticeParams base;
  MeanFieldMethod method = MeanFieldMethod::analytic;
};

PhaseDiagramParams phasediagram_params(const Config& c) {
  PhaseDiagramParams p;
  const double lo = c.real("meanfield.mu_min");
  const double hi = c.real("meanfield.mu_max");
  const double step = c.real("meanfield.mu_step");
  if (hi < lo) throw ConfigError("meanfield.mu_max must be >= meanfield.mu_min");
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (n > 10'000'000) throw ConfigError("meanfield mu grid is too large");
  for (long long k = 0; k <= n; ++k) p.mu_grid.push_back(lo + step * static_cast<double>(k));
  const double amin = c.real("meanfield.alpha_min");
  const double amax = c.real("meanfield.alpha_max");
  if (amax < amin) throw ConfigError("meanfield.alpha_max must be >= meanfield.alpha_min");
  p.alpha_grid = log_grid(amin, amax, static_cast<int>(c.integer("meanfield.alpha_points")));
  p.base.K = static_cast<int>(c.integer("meanfield.K"));
  p.base.n_max = static_cast<int>(c.integer("meanfield.n_max"));
  p.base.t0_over_U = c.real("meanfield.t0");
  p.base.validate();
  p.method = c.text("meanfield.method") == "selfconsistent" ? MeanFieldMethod::selfconsistent
                                                            : MeanFieldMethod::analytic;
  if (p.method == MeanFieldMethod::analytic && p.base.t0_over_U != 0.0) {
    throw ConfigError("meanfield.method = analytic requires meanfield.t0 = 0");
  }
  return p;
}

void validate_subcommand(const RunConfig& rc) {
  if (rc.subcommand == "scatter") {
    (void)scatter_params(rc.values);
  } else if (rc.subcommand == "trajectory") {
    (void)trajectory_params(rc.values);
  } else if (rc.subcommand == "homodyne") {
    (void)homodyne_params(rc.values);
  } else if (rc.subcommand == "entropy") {
    (void)entropy_params(rc.values);
  } else {
    (void)phasediagram_params(rc.values);
  }
}

// ---------------------------------------------------------------------------

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json distribution_json(const DiscreteDistribution& d) {
  json j;
  j["support"] = d.support;
  j["probability"] = d.probability;
  return j;
}

std::vector<std::string> run_scatter(const RunConfig& rc, OutputTransaction& tx, std::ostream& log) {
  const auto p = scatter_params(rc.values);
  double energy = 0.0;
  std::size_t degeneracy = 0;
  const auto mixture = ground_mixture(p.lattice, energy, degeneracy);
  log << "ground energy " << format_real(energy) << ", manifold dimension " << degeneracy << "\n";

  const auto grid = angle_grid(p.angles);
  const auto scan = angular_scan(mixture, p.geometry, grid, rc.threads);

  std::vector<std::string> header{"theta_out", "classical_x"};
  if (scan.has_y) header.push_back("classical_y");
  header.push_back("R_x");
  if (scan.has_y) header.push_back("R_y");
  CsvTable table(header);
  for (const auto& row : scan.rows) {
    std::vector<CsvTable::Cell> cells{row.theta_out, row.classical_x};
    if (scan.has_y) cells.emplace_back(row.classical_y);
    cells.emplace_back(row.r_x);
    if (scan.has_y) cells.emplace_back(row.r_y);
    table.add_row(std::move(cells));
  }
  tx.stage("scatter.csv", table.render());

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["ground_energy"] = energy;
  summary["manifold_dimension"] = degeneracy;
  summary["particles"] = scan.particles;
  json integrated;
  integrated["classical_x"] = integrate_over_angle(scan, &ScanRow::classical_x);
  integrated["R_x"] = integrate_over_angle(scan, &ScanRow::r_x);
  if (scan.has_y) {
    integrated["classical_y"] = integrate_over_angle(scan, &ScanRow::classical_y);
    integrated["R_y"] = integrate_over_angle(scan, &ScanRow::r_y);
  }
  summary["angle_integrated"] = integrated;
  tx.stage("scatter_summary.json", dump(summary));
  return {"scatter.csv", "scatter_summary.json"};
}

std::vector<std::string> run_trajectory(const RunConfig& rc, OutputTransaction& tx, std::ostream& log) {
  const auto p = trajectory_params(rc.values);
  DiscreteDistribution prior;
  if (p.lattice) {
    double energy = 0.0;
    std::size_t degeneracy = 0;
    const auto mixture = ground_mixture(*p.lattice, energy, degeneracy);
    prior = initial_distribution(mixture, p.illuminated, p.channel, p.pattern);
    log << "prior from ground manifold of dimension " << degeneracy << "\n";
  } else {
    prior = DiscreteDistribution::uniform(-p.flat_range, p.flat_range);
  }

  const auto ensemble = sample_ensemble(prior, p.options, *rc.seed, p.trajectories, rc.threads);
  const double rate_scale = 2.0 * p.options.coupling * p.options.coupling * p.options.kappa;

  CsvTable logcsv({"trajectory", "t", "m", "mean_M_K", "snapshot"});
  CsvTable dist({"snapshot", "trajectory", "t", "tau", "counts", "M_K", "probability"});
  for (std::size_t i = 0; i < p.log_trajectories; ++i) {
    const auto& rec = ensemble[i];
    // the conditioned state depends only on (m, tau), so rows are rebuilt from it
    struct Event {
      double t;
      int m;
      long long snapshot;
    };
    std::vector<Event> events{{0.0, 0, -1}};
    for (std::size_t k = 0; k < rec.detection_times.size(); ++k) {
      events.push_back({rec.detection_times[k], static_cast<int>(k) + 1, -1});
    }
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
      events.push_back({rec.snapshots[s].time, rec.snapshots[s].counts, static_cast<long long>(s)});
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    for (const auto& e : events) {
      const auto pc = conditional_distribution(prior, e.m, rate_scale * e.t);
      logcsv.add_row({static_cast<long long>(i), e.t, static_cast<long long>(e.m), pc.mean(), e.snapshot});
    }
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
      const auto& snap = rec.snapshots[s];
      for (std::size_t k = 0; k < snap.distribution.size(); ++k) {
        dist.add_row({static_cast<long long>(s), static_cast<long long>(i), snap.time, rate_scale * snap.time,
                      static_cast<long long>(snap.counts), static_cast<long long>(snap.distribution.support[k]),
                      snap.distribution.probability[k]});
      }
    }
  }
  tx.stage("trajectory_log.csv", logcsv.render());
  tx.stage("trajectory_distribution.csv", dist.render());

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["seed"] = *rc.seed;
  summary["trajectories"] = p.trajectories;
  summary["coupling"] = p.options.coupling;
  summary["kappa"] = p.options.kappa;
  summary["duration"] = p.options.duration;
  summary["prior"] = distribution_json(prior);
  json snaps = json::array();
  for (std::size_t s = 0; s < p.options.snapshot_times.size(); ++s) {
    std::map<int, long long> histogram;
    std::vector<double> average(prior.size(), 0.0);
    double mean_counts = 0.0;
    for (const auto& rec : ensemble) {
      const auto& snap = rec.snapshots[s];
      ++histogram[snap.counts];
      mean_counts += snap.counts;
      for (std::size_t k = 0; k < prior.size(); ++k) average[k] += snap.distribution.at(prior.support[k]);
    }
    const auto n = static_cast<double>(ensemble.size());
    for (double& a : average) a /= n;
    DiscreteDistribution avg{prior.support, average};
    json js;
    js["time"] = p.options.snapshot_times[s];
    js["tau"] = rate_scale * p.options.snapshot_times[s];
    js["mean_counts"] = mean_counts / n;
    json hist = json::object();
    for (auto [m, count] : histogram) hist[std::to_string(m)] = count;
    js["count_histogram"] = hist;
    js["ensemble_average"] = distribution_json(avg);
    js["total_variation_to_prior"] = total_variation(avg, prior);
    snaps.push_back(js);
  }
  summary["snapshots"] = snaps;
  double total = 0.0;
  for (const auto& rec : ensemble) total += static_cast<double>(rec.detection_times.size());
  summary["mean_detections"] = total / static_cast<double>(ensemble.size());
  tx.stage("trajectory_summary.json", dump(summary));
  return {"trajectory_log.csv", "trajectory_distribution.csv", "trajectory_summary.json"};
}

std::vector<std::string> run_homodyne(const RunConfig& rc, OutputTransaction& tx, std::ostream& log) {
  const auto p = homodyne_params(rc.values);
  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["seed"] = *rc.seed;
  if (p.query) {
    const auto z = eigenvalue_pair(p.cfg, p.query->first, p.query->second);
    summary["query"] = {{"counts", p.query->first}, {"time", p.query->second}, {"z_plus", z.plus},
                        {"z_minus", z.minus}};
  }
  const auto pair = eigenvalue_pair_at_rate(p.cfg, p.rate);
  log << "prepared pair z+ = " << format_real(pair.plus) << ", z- = " << format_real(pair.minus) << "\n";
  const double amp = std::sqrt(0.5);
  const std::vector<HomodyneComponent> prior{{pair.plus, amp}, {pair.minus, amp}};
  const auto ensemble = simulate_homodyne_ensemble(p.cfg, prior, p.duration, *rc.seed, p.trajectories, rc.threads);

  CsvTable traj({"trajectory", "t", "m", "relative_phase", "purity"});
  double counts = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    for (const auto& row : ensemble[i].log) {
      traj.add_row({static_cast<long long>(i), row.time, static_cast<long long>(row.counts), row.relative_phase,
                    row.purity});
    }
    counts += static_cast<double>(ensemble[i].detection_times.size());
  }
  tx.stage("homodyne.csv", traj.render());

  HomodyneConfig fragile = p.cfg;
  fragile.delta_phi = 0.0;
  HomodyneConfig robust = p.cfg;
  robust.delta_phi = 0.5 * std::numbers::pi;
  auto options = p.robustness;
  options.seed = *rc.seed;
  const auto report = robustness_compare(fragile, robust, options);
  CsvTable rob({"scheme", "delta_phi", "eta", "mean_counts", "per_count_phase", "coherence_exact",
                "coherence_sampled", "purity_exact", "purity_sampled"});
  for (const auto& [name, row] : {std::pair{"fragile", report.fragile}, std::pair{"robust", report.robust}}) {
    rob.add_row({std::string(name), row.delta_phi, options.miss_probability,
                 static_cast<long long>(options.mean_counts), row.per_count_phase, row.coherence_exact,
                 row.coherence_sampled, row.purity_exact, row.purity_sampled});
  }
  tx.stage("homodyne_robustness.csv", rob.render());

  summary["z_plus"] = pair.plus;
  summary["z_minus"] = pair.minus;
  summary["per_count_phase"] = per_count_phase(p.cfg, p.rate);
  summary["trajectories"] = p.trajectories;
  summary["mean_detections"] = counts / static_cast<double>(ensemble.size());
  tx.stage("homodyne_summary.json", dump(summary));
  return {"homodyne.csv", "homodyne_robustness.csv", "homodyne_summary.json"};
}

std::vector<std::string> run_entropy(const RunConfig& rc, OutputTransaction& tx, std::ostream&) {
  const auto p = entropy_params(rc.values);
  CsvTable table({"tau", "entropy_exact", "entropy_approx"});
  for (int k = 0; k < p.tau_points; ++k) {
    const double tau = p.tau_points == 1 ? 0.0 : p.tau_max * k / (p.tau_points - 1);
    const auto squeezed = squeeze_distribution(p.prior, p.counts, tau);
    const auto sup = LightMatterSuperposition::from_distribution(squeezed.distribution(), p.coupling);
    table.add_row({tau, light_matter_entropy(sup, EntropyMode::exact_gram, p.base),
                   light_matter_entropy(sup, EntropyMode::orthogonal, p.base)});
  }
  tx.stage("entropy.csv", table.render());

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["family"] = std::string(to_string(p.prior.family()));
  summary["base"] = std::string(to_string(p.base));
  summary["mean"] = p.prior.mean();
  summary["variance"] = p.prior.variance();
  summary["shannon_entropy"] = shannon_entropy(p.prior, p.base);
  if (p.prior.variance() > 0.0) summary["gaussian_entropy"] = gaussian_entropy(p.prior.variance(), p.base);
  (void)rc;
  tx.stage("entropy_summary.json", dump(summary));
  return {"entropy.csv", "entropy_summary.json"};
}

std::vector<std::string> run_phasediagram(const RunConfig& rc, OutputTransaction& tx, std::ostream& log) {
  const auto p = phasediagram_params(rc.values);
  const auto pd = phase_diagram(p.mu_grid, p.alpha_grid, p.base, p.method, rc.threads);
  CsvTable table({"mu_over_U", "alpha_D", "psi", "rho", "delta_n", "phase"});
  for (std::size_t a = 0; a < pd.alpha_grid.size(); ++a) {
    for (std::size_t k = 0; k < pd.mu_grid.size(); ++k) {
      const auto& s = pd.at(a, k);
      table.add_row({pd.mu_grid[k], pd.alpha_grid[a], s.psi, s.rho, s.delta_n, s.label()});
    }
  }
  tx.stage("phasediagram.csv", table.render());
  CsvTable bounds({"alpha_D", "mu_over_U", "direction"});
  for (const auto& b : pd.boundaries) {
    bounds.add_row({b.alpha_D, b.mu_over_U, std::string(b.entering_superfluid ? "enter_sf" : "leave_sf")});
  }
  tx.stage("phasediagram_boundaries.csv", bounds.render());
  log << pd.cells.size() << " grid points, " << pd.boundaries.size() << " boundary crossings\n";

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["K"] = p.base.K;
  summary["method"] = p.method == MeanFieldMethod::analytic ? "analytic" : "selfconsistent";
  json rows = json::array();
  for (std::size_t a = 0; a < pd.alpha_grid.size(); ++a) {
    QuantumLatticeParams q = p.base;
    q.alpha_D = pd.alpha_grid[a];
    rows.push_back({{"alpha_D", pd.alpha_grid[a]},
                    {"gamma_D", q.gamma_D()},
                    {"insulating_fraction", pd.insulating_fraction(a)}});
  }
  summary["rows"] = rows;
  tx.stage("phasediagram_summary.json", dump(summary));
  return {"phasediagram.csv", "phasediagram_boundaries.csv", "phasediagram_summary.json"};
}

}  // namespace

RunConfig make_run_config(const std::string& subcommand, Config values) {
  const auto& allowed = sections_for(subcommand);
  for (const auto& section : values.sections_in_use()) {
    if (std::find(allowed.begin(), allowed.end(), section) == allowed.end()) {
      std::string where;
      for (const auto& k : schema()) {
        if (k.section != section) continue;
        if (const auto* e = values.entry(k.dotted())) {
          where = " (" + e->where.describe() + ")";
          break;
        }
      }
      throw ConfigError("section [" + section + "] is not used by '" + subcommand + "'" + where);
    }
  }
  RunConfig rc;
  rc.subcommand = subcommand;
  rc.out = values.text("run.out");
  if (rc.out.empty()) throw ConfigError("run.out must not be empty");
  rc.threads = static_cast<int>(values.integer("run.threads"));
  if (const auto seed = values.integer("run.seed"); seed >= 0) rc.seed = static_cast<std::uint64_t>(seed);
  if (is_stochastic(subcommand) && !rc.seed) {
    throw ConfigError("'" + subcommand + "' is stochastic: a seed is required (--seed or [run] seed)");
  }
  rc.values = std::move(values);
  validate_subcommand(rc);
  return rc;
}

void execute(const RunConfig& rc, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  OutputTransaction tx(rc.out);
  std::vector<std::string> outputs;
  if (rc.subcommand == "scatter") {
    outputs = run_scatter(rc, tx, log);
  } else if (rc.subcommand == "trajectory") {
    outputs = run_trajectory(rc, tx, log);
  } else if (rc.subcommand == "homodyne") {
    outputs = run_homodyne(rc, tx, log);
  } else if (rc.subcommand == "entropy") {
    outputs = run_entropy(rc, tx, log);
  } else {
    outputs = run_phasediagram(rc, tx, log);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["tool"] = "qolat";
  meta["version"] = QOLAT_VERSION;
  meta["subcommand"] = rc.subcommand;
  meta["seed"] = rc.seed ? json(*rc.seed) : json(nullptr);
  meta["threads"] = rc.threads;
  json inputs = json::object();
  const auto& allowed = sections_for(rc.subcommand);
  for (const auto& [key, value] : rc.values.resolved()) {
    const auto section = key.substr(0, key.find('.'));
    if (std::find(allowed.begin(), allowed.end(), section) != allowed.end()) inputs[key] = value;
  }
  meta["inputs"] = inputs;
  meta["outputs"] = outputs;
  meta["wall_time_seconds"] = wall;
  tx.stage(rc.subcommand + ".meta.json", dump(meta));
  tx.commit();
  for (const auto& name : tx.names()) log << "wrote " << (rc.out / name).string() << "\n";
}

int report_failure(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum light scattering from ultracold atoms in optical lattices"};
  app.name("qolat");
  app.require_subcommand(1);
  app.set_version_flag("--version", QOLAT_VERSION);

  struct Flags {
    std::string config;
    std::string out;
    std::string seed;
    std::string threads;
    std::map<std::string, std::string> overrides;
  };
  std::map<std::string, Flags> flags;
  for (const auto& name : subcommands()) {
    auto& f = flags[name];
    auto* sub = app.add_subcommand(name, "run the " + name + " workflow");
    sub->add_option("--config", f.config, "configuration file");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--threads", f.threads, "worker threads");
    for (const auto& section : sections_for(name)) {
      for (const auto& key : schema()) {
        if (key.section != section || section == "run") continue;
        sub->add_option_function<std::string>(
            "--" + key.dotted(), [&f, dotted = key.dotted()](const std::string& v) { f.overrides[dotted] = v; },
            key.help + " [default " + key.default_value + "]");
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::string name;
  for (const auto* sub : app.get_subcommands()) name = sub->get_name();
  const auto& f = flags[name];
  try {
    Config values = f.config.empty() ? Config{} : parse_config_file(f.config);
    for (const auto& [dotted, v] : f.overrides) values.override_value(dotted, v);
    if (!f.out.empty()) values.override_value("run.out", f.out);
    if (!f.seed.empty()) values.override_value("run.seed", f.seed);
    if (!f.threads.empty()) values.override_value("run.threads", f.threads);
    const auto rc = make_run_config(name, std::move(values));
    execute(rc, out);
    return kExitOk;
  } catch (...) {
    return report_failure(err);
  }
}

}  // namespace qolat::cli
