#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qolat/distribution.hpp"
#include "qolat/lattice.hpp"

namespace qolat {

using MagnetizationDistribution = DiscreteDistribution;

// Inverse-transform sample of the first-event time of an exponential mixture:
// the dt with sum_i w_i exp(-r_i dt) == u (weights normalised), or nullopt if
// that exceeds `horizon`. Bisection to 1e-12.
std::optional<double> mixture_waiting_time(std::span<const double> weights, std::span<const double> rates,
                                           double u, double horizon);

// Which per-site sign pattern the detector sees: the diffraction maximum
// (all J_jj = 1) or minimum (J_jj = (-1)^j).
enum class Pattern { maximum, minimum };

std::string_view to_string(Pattern p);

std::vector<int> first_sites(int count);

// Distribution of the measured eigenvalue z = sum_{j in K} s_j n_j over the
// basis configurations of `state` (or an equal-weight mixture).
DiscreteDistribution initial_distribution(const StateVector& state, std::span<const int> illuminated,
                                          Channel channel, Pattern pattern = Pattern::maximum);
DiscreteDistribution initial_distribution(std::span<const StateVector> mixture,
                                          std::span<const int> illuminated, Channel channel,
                                          Pattern pattern = Pattern::maximum);

// Exact joint distribution of (N_K_up, N_K_down).
JointDistribution joint_initial_distribution(const StateVector& state, std::span<const int> illuminated);

// P_c(z) = |z|^(2m) exp(-tau z^2) P0(z) / norm, tau = 2 |C|^2 kappa t.
DiscreteDistribution conditional_distribution(const DiscreteDistribution& prior, int counts, double tau);
// Joint form with z = z_up - z_down.
JointDistribution conditional_distribution(const JointDistribution& prior, int counts, double tau);

// Light-matter state in the frozen-tunnelling regime, one component per
// measurement eigenvalue. Weights are kept normalised.
class ConditionalState {
 public:
  struct Component {
    double z = 0.0;
    double prior = 0.0;
    double weight = 0.0;
    Complex phase{1.0, 0.0};
  };

  ConditionalState(const DiscreteDistribution& prior, double coupling, double kappa);

  // No-jump evolution over dt: w_z *= exp(-2 kappa |C|^2 z^2 dt).
  void evolve(double dt);
  // Photodetection: amplitude_z *= z.
  void jump();

  double rate(double z) const { return 2.0 * kappa_ * coupling_ * coupling_ * z * z; }
  double jump_rate() const;
  // Probability of no detection during the next dt.
  double survival(double dt) const;
  // Waiting time with survival(dt) == u, or nullopt if no detection happens
  // within `horizon` (which may be infinite).
  std::optional<double> waiting_time(double u, double horizon) const;

  const std::vector<Component>& components() const noexcept { return components_; }
  int counts() const noexcept { return counts_; }
  double time() const noexcept { return time_; }
  double scaled_time() const noexcept { return 2.0 * coupling_ * coupling_ * kappa_ * time_; }
  double coupling() const noexcept { return coupling_; }
  double kappa() const noexcept { return kappa_; }

  DiscreteDistribution distribution() const;
  double mean_eigenvalue() const;

 private:
  void renormalize();

  std::vector<Component> components_;
  double coupling_;
  double kappa_;
  int counts_ = 0;
  double time_ = 0.0;
};

struct Snapshot {
  double time = 0.0;
  int counts = 0;
  DiscreteDistribution distribution;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> detection_times;
  ConditionalState final_state;
  std::vector<Snapshot> snapshots;

  // m(t): detections at times <= t.
  int counts_at(double t) const;
};

struct TrajectoryOptions {
  double coupling = 1.0;  // |C|
  double kappa = 1.0;
  double duration = 1.0;  // may be +infinity
  std::vector<double> snapshot_times;
};

TrajectoryRecord sample_trajectory(const DiscreteDistribution& prior, const TrajectoryOptions& options,
                                   std::uint64_t seed, std::uint64_t stream = 0);
TrajectoryRecord sample_trajectory(const DiscreteDistribution& prior, Complex coupling, double kappa,
                                   double duration, std::uint64_t seed);

std::vector<TrajectoryRecord> sample_ensemble(const DiscreteDistribution& prior,
                                              const TrajectoryOptions& options, std::uint64_t seed,
                                              std::size_t count, int threads = 1);

struct CatComponent {
  double z = 0.0;
  double weight = 0.0;
  Complex phase{1.0, 0.0};
};

// Components whose normalised weight exceeds `threshold`, ordered by z.
std::vector<CatComponent> cat_components(const ConditionalState& state, double threshold);

// Two-branch state (|z> + s |-z>)/sqrt(2) reached by photon counting at the
// diffraction minimum, s = (-1)^m.
struct CatDescriptor {
  double z = 0.0;
  double weight_plus = 0.0;
  double weight_minus = 0.0;
  int relative_sign = 1;
  int counts = 0;
  double tau = 0.0;
};

CatDescriptor boson_minimum_cat(const DiscreteDistribution& prior, int counts, double tau);

}  // namespace qolat
