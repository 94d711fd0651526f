#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qolat {

// Local-oscillator homodyne detection of the cavity output. The atomic
// coupling phase is taken as phi_C = 0, so the oscillator phase at the
// detector is theta = -delta_phi.
struct HomodyneConfig {
  double flux = 1.0;       // local-oscillator flux F at the detector
  double delta_phi = 0.0;  // phi_C - theta
  double kappa = 1.0;
  double coupling = 1.0;   // |C|
  double omega_p = 0.0;    // only a global rotating phase
  double phi = 0.0;        // e^{+-i phi t} on the two branches

  void validate() const;
};

struct EigenvaluePair {
  double plus = 0.0;
  double minus = 0.0;
  double zeta_plus = 0.0;
  double zeta_minus = 0.0;
};

// z_+- at detection rate m/t; throws RegimeError below F sin^2(delta_phi).
EigenvaluePair eigenvalue_pair(const HomodyneConfig& cfg, int counts, double time);
EigenvaluePair eigenvalue_pair_at_rate(const HomodyneConfig& cfg, double rate);

// Amplitude picked up by component z at each detection, up to a global
// phase: sqrt(F) + sqrt(2 kappa) |C| z e^{i delta_phi}.
std::complex<double> count_factor(const HomodyneConfig& cfg, double z);
// |count_factor|^2, the detection rate while the state sits on z.
double detection_rate(const HomodyneConfig& cfg, double z);

// Relative phase added per detection between the z_+ and z_- branches.
double per_count_phase(const HomodyneConfig& cfg, double rate);

struct HomodyneConditionalState {
  EigenvaluePair z;
  std::complex<double> c_plus{0.0, 0.0};
  std::complex<double> c_minus{0.0, 0.0};
  int counts = 0;
  double time = 0.0;
  // arg(c_+ conj(c_-)), accumulated without wrapping.
  double relative_phase = 0.0;
};

HomodyneConditionalState conditional_state(const HomodyneConfig& cfg, double weight_plus,
                                           double weight_minus, int counts, double time);

struct HomodyneComponent {
  double z = 0.0;
  std::complex<double> amplitude{0.0, 0.0};
};

// c_z^0 count_factor(z)^m exp(-rate(z) t / 2), with e^{+-i phi t} on
// two-component inputs; normalised.
std::vector<HomodyneComponent> conditional_amplitudes(const HomodyneConfig& cfg,
                                                      std::span<const HomodyneComponent> prior, int counts,
                                                      double time);

// Purity of the atomic state after tracing out the light (alpha_z = C z).
double matter_purity(const HomodyneConfig& cfg, std::span<const HomodyneComponent> state);

struct HomodyneLogRow {
  double time = 0.0;
  int counts = 0;
  double relative_phase = 0.0;
  double purity = 1.0;
};

struct HomodyneRecord {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> detection_times;
  std::vector<HomodyneComponent> final_state;
  std::vector<HomodyneLogRow> log;
};

// Exact jump-time sampling; the log holds t = 0, every detection, and the
// final time. Relative phase is between the largest and smallest z.
HomodyneRecord simulate_homodyne_trajectory(const HomodyneConfig& cfg,
                                            std::span<const HomodyneComponent> prior, double duration,
                                            std::uint64_t seed, std::uint64_t stream = 0);

std::vector<HomodyneRecord> simulate_homodyne_ensemble(const HomodyneConfig& cfg,
                                                       std::span<const HomodyneComponent> prior,
                                                       double duration, std::uint64_t seed,
                                                       std::size_t count, int threads = 1);

struct RobustnessOptions {
  double miss_probability = 0.0;  // eta
  int mean_counts = 10;           // true detections n
  double rate_over_flux = 1.0025; // m/t in units of F
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

struct RobustnessRow {
  double delta_phi = 0.0;
  double per_count_phase = 0.0;
  double coherence_exact = 0.0;   // |<e^{i j Delta}>|, j ~ Binomial(n, eta)
  double coherence_sampled = 0.0;
  double purity_exact = 0.0;
  double purity_sampled = 0.0;
};

struct RobustnessReport {
  RobustnessRow fragile;
  RobustnessRow robust;
};

// Equal-weight cat; each of the n detections is missed with probability eta
// and the missed ones leave an unknown relative phase behind.
RobustnessRow robustness_row(const HomodyneConfig& cfg, const RobustnessOptions& options);
RobustnessReport robustness_compare(const HomodyneConfig& fragile, const HomodyneConfig& robust,
                                    const RobustnessOptions& options);

}  // namespace qolat
