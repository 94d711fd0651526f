#include "qolat/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "qolat/errors.hpp"
#include "qolat/parallel.hpp"
#include "qolat/rng.hpp"
#include "qolat/trajectories.hpp"

namespace qolat {

using cd = std::complex<double>;

void HomodyneConfig::validate() const {
  if (!(flux >= 0.0) || !std::isfinite(flux)) throw InvalidArgument("flux must be finite and >= 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
  if (!(coupling > 0.0) || !std::isfinite(coupling)) throw InvalidArgument("|C| must be positive");
  if (!std::isfinite(delta_phi) || !std::isfinite(omega_p) || !std::isfinite(phi)) {
    throw InvalidArgument("phases must be finite");
  }
}

EigenvaluePair eigenvalue_pair_at_rate(const HomodyneConfig& cfg, double rate) {
  cfg.validate();
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidArgument("detection rate must be finite and >= 0");
  const double s = std::sin(cfg.delta_phi);
  const double c = std::cos(cfg.delta_phi);
  const double disc = rate - cfg.flux * s * s;
  if (disc < 0.0) {
    throw RegimeError("m/t = " + std::to_string(rate) + " is below F sin^2(delta_phi) = " +
                      std::to_string(cfg.flux * s * s));
  }
  const double root = std::sqrt(disc);
  const double sf = std::sqrt(cfg.flux);
  const double scale = std::sqrt(2.0 * cfg.kappa) * cfg.coupling;
  EigenvaluePair p;
  p.plus = (root - sf * c) / scale;
  p.minus = (-root - sf * c) / scale;
  if (cfg.flux > 0.0) {
    p.zeta_plus = root / sf - c;
    p.zeta_minus = -root / sf - c;
  } else {
    p.zeta_plus = std::numeric_limits<double>::quiet_NaN();
    p.zeta_minus = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

EigenvaluePair eigenvalue_pair(const HomodyneConfig& cfg, int counts, double time) {
  if (counts < 0) throw InvalidArgument("photocount must be nonnegative");
  if (!(time > 0.0) || !std::isfinite(time)) throw InvalidArgument("time must be positive");
  return eigenvalue_pair_at_rate(cfg, counts / time);
}

cd count_factor(const HomodyneConfig& cfg, double z) {
  return std::sqrt(cfg.flux) + std::sqrt(2.0 * cfg.kappa) * cfg.coupling * z * std::polar(1.0, cfg.delta_phi);
}

double detection_rate(const HomodyneConfig& cfg, double z) { return std::norm(count_factor(cfg, z)); }

double per_count_phase(const HomodyneConfig& cfg, double rate) {
  const auto z = eigenvalue_pair_at_rate(cfg, rate);
  return std::arg(count_factor(cfg, z.plus) * std::conj(count_factor(cfg, z.minus)));
}

HomodyneConditionalState conditional_state(const HomodyneConfig& cfg, double weight_plus,
                                           double weight_minus, int counts, double time) {
  if (!(weight_plus >= 0.0) || !(weight_minus >= 0.0) || !(weight_plus + weight_minus > 0.0)) {
    throw InvalidArgument("prior weights must be nonnegative with positive sum");
  }
  HomodyneConditionalState out;
  out.z = eigenvalue_pair(cfg, counts, time);
  out.counts = counts;
  out.time = time;
  // |count_factor|^2 = m/t on both branches, so only phases differ.
  const double arg_plus = counts > 0 ? std::arg(count_factor(cfg, out.z.plus)) : 0.0;
  const double arg_minus = counts > 0 ? std::arg(count_factor(cfg, out.z.minus)) : 0.0;
  const double norm = std::sqrt(weight_plus + weight_minus);
  out.c_plus = std::polar(std::sqrt(weight_plus) / norm, counts * arg_plus + cfg.phi * time);
  out.c_minus = std::polar(std::sqrt(weight_minus) / norm, counts * arg_minus - cfg.phi * time);
  const double step =
      counts > 0 ? std::arg(count_factor(cfg, out.z.plus) * std::conj(count_factor(cfg, out.z.minus))) : 0.0;
  out.relative_phase = counts * step + 2.0 * cfg.phi * time;
  return out;
}

namespace {

std::pair<std::size_t, std::size_t> extreme_components(std::span<const HomodyneComponent> c) {
  std::size_t hi = 0;
  std::size_t lo = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].z > c[hi].z) hi = i;
    if (c[i].z < c[lo].z) lo = i;
  }
  return {hi, lo};
}

double branch_sign(std::span<const HomodyneComponent> c, std::size_t i) {
  if (c.size() != 2) return 0.0;
  auto [hi, lo] = extreme_components(c);
  return i == hi ? 1.0 : (i == lo ? -1.0 : 0.0);
}

void normalize(std::vector<HomodyneComponent>& c) {
  double s = 0.0;
  for (const auto& x : c) s += std::norm(x.amplitude);
  if (!(s > 0.0) || !std::isfinite(s)) throw MeasurementInconsistent();
  const double k = 1.0 / std::sqrt(s);
  for (auto& x : c) x.amplitude *= k;
}

void check_prior(std::span<const HomodyneComponent> prior) {
  if (prior.empty()) throw InvalidArgument("homodyne prior has no components");
  for (const auto& c : prior) {
    if (!std::isfinite(c.z) || !std::isfinite(std::abs(c.amplitude))) {
      throw InvalidArgument("homodyne prior component is not finite");
    }
  }
}

}  // namespace

std::vector<HomodyneComponent> conditional_amplitudes(const HomodyneConfig& cfg,
                                                      std::span<const HomodyneComponent> prior, int counts,
                                                      double time) {
  cfg.validate();
  check_prior(prior);
  if (counts < 0) throw InvalidArgument("photocount must be nonnegative");
  if (!(time >= 0.0)) throw InvalidArgument("time must be nonnegative");
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> logmag(prior.size(), neg_inf);
  std::vector<double> phase(prior.size(), 0.0);
  double top = neg_inf;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const auto& c = prior[i];
    const cd f = count_factor(cfg, c.z);
    if (std::abs(c.amplitude) == 0.0 || (counts > 0 && std::abs(f) == 0.0)) continue;
    logmag[i] = std::log(std::abs(c.amplitude)) - 0.5 * std::norm(f) * time;
    phase[i] = std::arg(c.amplitude) + branch_sign(prior, i) * cfg.phi * time;
    if (counts > 0) {
      logmag[i] += counts * std::log(std::abs(f));
      phase[i] += counts * std::arg(f);
    }
    top = std::max(top, logmag[i]);
  }
  if (top == neg_inf) throw MeasurementInconsistent();
  std::vector<HomodyneComponent> out(prior.begin(), prior.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].amplitude = logmag[i] == neg_inf ? cd{0.0, 0.0} : std::polar(std::exp(logmag[i] - top), phase[i]);
  }
  normalize(out);
  return out;
}

double matter_purity(const HomodyneConfig& cfg, std::span<const HomodyneComponent> state) {
  double total = 0.0;
  for (const auto& c : state) total += std::norm(c.amplitude);
  double p = 0.0;
  for (const auto& a : state) {
    for (const auto& b : state) {
      const double dz = a.z - b.z;
      p += std::norm(a.amplitude) * std::norm(b.amplitude) *
           std::exp(-cfg.coupling * cfg.coupling * dz * dz);
    }
  }
  return p / (total * total);
}

HomodyneRecord simulate_homodyne_trajectory(const HomodyneConfig& cfg,
                                            std::span<const HomodyneComponent> prior, double duration,
                                            std::uint64_t seed, std::uint64_t stream) {
  cfg.validate();
  check_prior(prior);
  if (!(duration >= 0.0)) throw InvalidArgument("duration must be nonnegative");

  HomodyneRecord rec;
  rec.seed = seed;
  rec.stream = stream;
  rec.final_state.assign(prior.begin(), prior.end());
  auto& state = rec.final_state;
  normalize(state);
  const auto [hi, lo] = extreme_components(state);

  std::vector<double> rates(state.size());
  std::vector<cd> factors(state.size());
  double slowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.size(); ++i) {
    factors[i] = count_factor(cfg, state[i].z);
    rates[i] = std::norm(factors[i]);
    slowest = std::min(slowest, rates[i]);
  }

  double t = 0.0;
  int m = 0;
  double rel = 0.0;
  auto log_row = [&] { rec.log.push_back({t, m, rel, matter_purity(cfg, state)}); };

  auto evolve = [&](double dt) {
    if (dt <= 0.0) return;
    for (std::size_t i = 0; i < state.size(); ++i) {
      const double decay = std::exp(-0.5 * (rates[i] - slowest) * dt);
      state[i].amplitude *= decay * std::polar(1.0, branch_sign(state, i) * cfg.phi * dt);
    }
    if (state.size() == 2) rel += 2.0 * cfg.phi * dt;
    t += dt;
    normalize(state);
  };

  auto rng = stream_engine(seed, stream);
  std::vector<double> weights(state.size());
  log_row();
  while (true) {
    for (std::size_t i = 0; i < state.size(); ++i) weights[i] = std::norm(state[i].amplitude);
    const auto wait = mixture_waiting_time(weights, rates, uniform_open(rng), duration - t);
    if (!wait) {
      evolve(duration - t);
      break;
    }
    evolve(*wait);
    for (std::size_t i = 0; i < state.size(); ++i) state[i].amplitude *= factors[i];
    if (hi != lo && std::abs(factors[hi]) > 0.0 && std::abs(factors[lo]) > 0.0) {
      rel += std::arg(factors[hi] * std::conj(factors[lo]));
    }
    normalize(state);
    ++m;
    rec.detection_times.push_back(t);
    log_row();
  }
  if (std::isfinite(duration) && (rec.log.empty() || rec.log.back().time != t)) log_row();
  return rec;
}

std::vector<HomodyneRecord> simulate_homodyne_ensemble(const HomodyneConfig& cfg,
                                                       std::span<const HomodyneComponent> prior,
                                                       double duration, std::uint64_t seed,
                                                       std::size_t count, int threads) {
  std::vector<HomodyneRecord> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    out[i] = simulate_homodyne_trajectory(cfg, prior, duration, seed, static_cast<std::uint64_t>(i));
  });
  return out;
}

RobustnessRow robustness_row(const HomodyneConfig& cfg, const RobustnessOptions& options) {
  const double eta = options.miss_probability;
  if (!(eta >= 0.0 && eta < 1.0)) throw InvalidArgument("miss probability must lie in [0, 1)");
  if (options.mean_counts < 0) throw InvalidArgument("mean counts must be nonnegative");
  if (options.samples == 0) throw InvalidArgument("need at least one sample");
  cfg.validate();

  RobustnessRow row;
  row.delta_phi = cfg.delta_phi;
  row.per_count_phase = per_count_phase(cfg, options.rate_over_flux * cfg.flux);
  const double delta = row.per_count_phase;
  const int n = options.mean_counts;

  const cd single = (1.0 - eta) + eta * std::polar(1.0, delta);
  row.coherence_exact = std::pow(std::abs(single), n);

  // Each true detection is missed independently; the observer cannot undo
  // the phase of a missed one.
  auto rng = stream_engine(options.seed, 0);
  cd sum{0.0, 0.0};
  for (std::size_t s = 0; s < options.samples; ++s) {
    int missed = 0;
    for (int k = 0; k < n; ++k) missed += uniform_open(rng) < eta ? 1 : 0;
    sum += std::polar(1.0, missed * delta);
  }
  row.coherence_sampled = std::abs(sum) / static_cast<double>(options.samples);

  // equal-weight cat: rho_++ = rho_-- = 1/2, |rho_+-| = coherence / 2
  row.purity_exact = 0.5 + 0.5 * row.coherence_exact * row.coherence_exact;
  row.purity_sampled = 0.5 + 0.5 * row.coherence_sampled * row.coherence_sampled;
  return row;
}

RobustnessReport robustness_compare(const HomodyneConfig& fragile, const HomodyneConfig& robust,
                                    const RobustnessOptions& options) {
  return {robustness_row(fragile, options), robustness_row(robust, options)};
}

}  // namespace qolat
