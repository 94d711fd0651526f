#include "qolat/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qolat/errors.hpp"
#include "qolat/parallel.hpp"
#include "qolat/rng.hpp"

namespace qolat {

std::string_view to_string(Pattern p) {
  return p == Pattern::maximum ? "maximum" : "minimum";
}

std::vector<int> first_sites(int count) {
  if (count < 0) throw InvalidArgument("site count must be nonnegative");
  std::vector<int> sites(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) sites[static_cast<std::size_t>(i)] = i;
  return sites;
}

namespace {

void check_sites(const FockBasis& basis, std::span<const int> illuminated) {
  if (static_cast<int>(illuminated.size()) > basis.sites()) {
    throw InvalidArgument("more illuminated sites than lattice sites");
  }
  for (int s : illuminated) {
    if (s < 0 || s >= basis.sites()) throw InvalidArgument("illuminated site out of range");
  }
}

}  // namespace

DiscreteDistribution initial_distribution(std::span<const StateVector> mixture,
                                          std::span<const int> illuminated, Channel channel,
                                          Pattern pattern) {
  if (mixture.empty()) throw InvalidArgument("empty state mixture");
  const auto& basis = mixture.front().basis();
  basis.check_channel(channel);
  check_sites(basis, illuminated);

  std::map<int, double> masses;
  for (const auto& state : mixture) {
    if (!(state.basis().spec() == basis.spec())) throw BasisMismatch("mixture spans several bases");
    const double norm2 = state.amplitudes().squaredNorm();
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
      int z = 0;
      for (int s : illuminated) {
        const int sign = (pattern == Pattern::minimum && s % 2 == 1) ? -1 : 1;
        z += sign * basis.site_value(i, s, channel);
      }
      masses[z] += state.probability(i) / norm2 / static_cast<double>(mixture.size());
    }
  }
  auto out = DiscreteDistribution::from_map(masses);
  return out.normalized();
}

DiscreteDistribution initial_distribution(const StateVector& state, std::span<const int> illuminated,
                                          Channel channel, Pattern pattern) {
  return initial_distribution(std::span<const StateVector>(&state, 1), illuminated, channel, pattern);
}

JointDistribution joint_initial_distribution(const StateVector& state, std::span<const int> illuminated) {
  const auto& basis = state.basis();
  if (basis.statistics() != Statistics::fermion) {
    throw BasisMismatch("joint spin distribution needs spin-1/2 fermions");
  }
  check_sites(basis, illuminated);
  const int K = static_cast<int>(illuminated.size());
  JointDistribution out;
  for (int z = 0; z <= K; ++z) {
    out.up.push_back(z);
    out.down.push_back(z);
  }
  out.probability = Eigen::MatrixXd::Zero(K + 1, K + 1);
  const double norm2 = state.amplitudes().squaredNorm();
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    int zu = 0;
    int zd = 0;
    for (int s : illuminated) {
      zu += basis.site_value(i, s, Channel::spin_up);
      zd += basis.site_value(i, s, Channel::spin_down);
    }
    out.probability(zu, zd) += state.probability(i) / norm2;
  }
  return out;
}

DiscreteDistribution conditional_distribution(const DiscreteDistribution& prior, int counts, double tau) {
  return measurement_reweight(prior, counts, tau);
}

JointDistribution conditional_distribution(const JointDistribution& prior, int counts, double tau) {
  if (counts < 0) throw InvalidArgument("photocount must be nonnegative");
  if (!(tau >= 0.0)) throw InvalidArgument("scaled time must be nonnegative");
  JointDistribution out = prior;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd logw = Eigen::MatrixXd::Constant(prior.probability.rows(), prior.probability.cols(), neg_inf);
  double top = neg_inf;
  for (Eigen::Index i = 0; i < logw.rows(); ++i) {
    for (Eigen::Index j = 0; j < logw.cols(); ++j) {
      const double p = prior.probability(i, j);
      const double z = prior.up[static_cast<std::size_t>(i)] - prior.down[static_cast<std::size_t>(j)];
      if (!(p > 0.0) || (z == 0.0 && counts > 0)) continue;
      double lw = std::log(p) - tau * z * z;
      if (counts > 0) lw += 2.0 * counts * std::log(std::abs(z));
      logw(i, j) = lw;
      top = std::max(top, lw);
    }
  }
  if (top == neg_inf) throw MeasurementInconsistent();
  for (Eigen::Index i = 0; i < logw.rows(); ++i) {
    for (Eigen::Index j = 0; j < logw.cols(); ++j) {
      out.probability(i, j) = logw(i, j) == neg_inf ? 0.0 : std::exp(logw(i, j) - top);
    }
  }
  out.probability /= out.probability.sum();
  return out;
}

std::optional<double> mixture_waiting_time(std::span<const double> weights, std::span<const double> rates,
                                           double u, double horizon) {
  if (weights.size() != rates.size()) throw InvalidArgument("weight/rate size mismatch");
  if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("survival target must lie in (0, 1)");
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  auto survival = [&](double dt) {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (rates[i] == 0.0) {
        s += weights[i];
      } else if (std::isfinite(dt)) {
        s += weights[i] * std::exp(-rates[i] * dt);
      }
    }
    return s;
  };
  if (survival(horizon) >= u) return std::nullopt;

  double hi = horizon;
  if (!std::isfinite(hi)) {
    double fastest = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) fastest = std::max(fastest, rates[i]);
    }
    hi = 1.0 / fastest;
    while (survival(hi) >= u) hi *= 2.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (survival(mid) > u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

ConditionalState::ConditionalState(const DiscreteDistribution& prior, double coupling, double kappa)
    : coupling_(coupling), kappa_(kappa) {
  prior.validate(1e-9);
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw InvalidArgument("|C| must be finite and >= 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
  const double s = prior.total();
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.probability[i] <= 0.0) continue;
    const double p = prior.probability[i] / s;
    components_.push_back({static_cast<double>(prior.support[i]), p, p, Complex(1.0, 0.0)});
  }
}

void ConditionalState::renormalize() {
  double s = 0.0;
  for (const auto& c : components_) s += c.weight;
  if (!(s > 0.0) || !std::isfinite(s)) throw MeasurementInconsistent();
  for (auto& c : components_) c.weight /= s;
}

void ConditionalState::evolve(double dt) {
  if (!(dt >= 0.0)) throw InvalidArgument("time step must be nonnegative");
  if (dt == 0.0) return;
  // factor out the slowest surviving decay so some weight is always O(1)
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& c : components_) {
    if (c.weight > 0.0) slowest = std::min(slowest, rate(c.z));
  }
  for (auto& c : components_) {
    if (c.weight > 0.0) c.weight *= std::exp(-(rate(c.z) - slowest) * dt);
  }
  time_ += dt;
  renormalize();
}

void ConditionalState::jump() {
  for (auto& c : components_) {
    c.weight *= c.z * c.z;
    if (c.z < 0.0) c.phase = -c.phase;
  }
  ++counts_;
  renormalize();
}

double ConditionalState::jump_rate() const {
  double r = 0.0;
  for (const auto& c : components_) r += c.weight * rate(c.z);
  return r;
}

double ConditionalState::survival(double dt) const {
  double s = 0.0;
  for (const auto& c : components_) {
    const double r = rate(c.z);
    if (r == 0.0) {
      s += c.weight;
    } else if (std::isfinite(dt)) {
      s += c.weight * std::exp(-r * dt);
    }
  }
  return s;
}

std::optional<double> ConditionalState::waiting_time(double u, double horizon) const {
  std::vector<double> w;
  std::vector<double> r;
  for (const auto& c : components_) {
    w.push_back(c.weight);
    r.push_back(rate(c.z));
  }
  return mixture_waiting_time(w, r, u, horizon);
}

DiscreteDistribution ConditionalState::distribution() const {
  DiscreteDistribution out;
  for (const auto& c : components_) {
    out.support.push_back(static_cast<int>(std::lround(c.z)));
    out.probability.push_back(c.weight);
  }
  return out;
}

double ConditionalState::mean_eigenvalue() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.z * c.weight;
  return m;
}

int TrajectoryRecord::counts_at(double t) const {
  return static_cast<int>(std::upper_bound(detection_times.begin(), detection_times.end(), t) -
                          detection_times.begin());
}

// ---------------------------------------------------------------------------

TrajectoryRecord sample_trajectory(const DiscreteDistribution& prior, const TrajectoryOptions& options,
                                   std::uint64_t seed, std::uint64_t stream) {
  if (!(options.duration >= 0.0)) throw InvalidArgument("duration must be nonnegative");
  std::vector<double> checkpoints = options.snapshot_times;
  std::sort(checkpoints.begin(), checkpoints.end());
  for (double t : checkpoints) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("snapshot times must be finite and >= 0");
  }

  TrajectoryRecord rec{seed, stream, {}, ConditionalState(prior, options.coupling, options.kappa), {}};
  auto& state = rec.final_state;
  auto rng = stream_engine(seed, stream);
  std::size_t next_snap = 0;

  // Evolve without detections up to absolute time `target`, emitting any
  // snapshots that fall on the way.
  auto advance_to = [&](double target) {
    while (next_snap < checkpoints.size() && checkpoints[next_snap] <= target) {
      state.evolve(checkpoints[next_snap] - state.time());
      rec.snapshots.push_back({state.time(), state.counts(), state.distribution()});
      ++next_snap;
    }
    if (std::isfinite(target)) state.evolve(target - state.time());
  };

  while (true) {
    const double horizon = options.duration - state.time();
    const auto wait = state.waiting_time(uniform_open(rng), horizon);
    if (!wait) {
      advance_to(options.duration);
      break;
    }
    advance_to(state.time() + *wait);
    state.jump();
    rec.detection_times.push_back(state.time());
  }
  return rec;
}

TrajectoryRecord sample_trajectory(const DiscreteDistribution& prior, Complex coupling, double kappa,
                                   double duration, std::uint64_t seed) {
  TrajectoryOptions options;
  options.coupling = std::abs(coupling);
  options.kappa = kappa;
  options.duration = duration;
  return sample_trajectory(prior, options, seed, 0);
}

std::vector<TrajectoryRecord> sample_ensemble(const DiscreteDistribution& prior,
                                              const TrajectoryOptions& options, std::uint64_t seed,
                                              std::size_t count, int threads) {
  std::vector<std::optional<TrajectoryRecord>> slots(count);
  parallel_for(count, threads, [&](std::size_t i) {
    slots[i] = sample_trajectory(prior, options, seed, static_cast<std::uint64_t>(i));
  });
  std::vector<TrajectoryRecord> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<CatComponent> cat_components(const ConditionalState& state, double threshold) {
  std::vector<CatComponent> out;
  for (const auto& c : state.components()) {
    if (c.weight > threshold) out.push_back({c.z, c.weight, c.phase});
  }
  return out;
}

CatDescriptor boson_minimum_cat(const DiscreteDistribution& prior, int counts, double tau) {
  if (counts < 1) throw InvalidArgument("a counting cat needs at least one detection");
  const auto pc = conditional_distribution(prior, counts, tau);
  // photon counting only constrains |z|: pool the two branches
  std::map<int, double> by_magnitude;
  for (std::size_t i = 0; i < pc.size(); ++i) by_magnitude[std::abs(pc.support[i])] += pc.probability[i];
  int best = 0;
  double best_mass = -1.0;
  for (auto [z, p] : by_magnitude) {
    if (p > best_mass) {
      best = z;
      best_mass = p;
    }
  }
  CatDescriptor cat;
  cat.z = best;
  cat.counts = counts;
  cat.tau = tau;
  const double plus = pc.at(best);
  const double minus = pc.at(-best);
  cat.weight_plus = plus / (plus + minus);
  cat.weight_minus = minus / (plus + minus);
  // amplitudes scale as z^m, so the -z branch carries (-1)^m
  cat.relative_sign = (counts % 2 == 0) ? 1 : -1;
  return cat;
}

}  // namespace qolat
