#pragma once

#include <span>
#include <vector>

#include "qolat/lattice.hpp"

namespace qolat {

// Polarisation channel of the scattered light.
//   x     -> total density rho_i = n_up + n_down
//   y     -> magnetisation m_i = n_up - n_down
//   boson -> boson density n_i
enum class LightChannel { x, y, boson };

std::string_view to_string(LightChannel c);
Channel site_channel(LightChannel c);

struct ProbeGeometry {
  double theta_in = 0.0;   // radians from the lattice normal
  double theta_out = 0.0;  // radians from the lattice normal
  double wavelength = 2.0; // in units of the lattice constant

  void validate() const;
  // Per-site phase increment (2 pi a / lambda)(sin theta_in - sin theta_out).
  double phase_step(double lattice_constant = 1.0) const;
};

struct Couplings {
  std::vector<Complex> J;   // J_jj, unit modulus
  Complex prefactor{1.0, 0.0};  // C; a_1 = C D
  LightChannel channel = LightChannel::x;
};

// C = Omega_10 alpha_0 / (Delta_p + i kappa).
Complex cavity_prefactor(Complex omega_alpha, double detuning, double kappa);

Couplings compute_couplings(const ProbeGeometry& geometry, int sites, LightChannel channel,
                            double lattice_constant = 1.0);
// J_jj = exp(i phase j)
Couplings couplings_from_phase(double phase, int sites, LightChannel channel);

// D = sum_j J_jj * (channel density at j); diagonal in the Fock basis.
SparseOperator d_operator(BasisPtr basis, const Couplings& couplings);

// Site-resolved first and second moments of a diagonal channel, averaged
// over an equal-weight mixture of states.
struct SiteCorrelations {
  Eigen::VectorXd mean;        // <n_i>
  Eigen::MatrixXd second;      // <n_i n_j>
  double total = 0.0;          // <sum_i n_i>

  Eigen::MatrixXd covariance() const { return second - mean * mean.transpose(); }
};

SiteCorrelations site_correlations(const StateVector& state, Channel channel);
SiteCorrelations site_correlations(std::span<const StateVector> mixture, Channel channel);

// |<D>|^2
double classical_diffraction(const SiteCorrelations& corr, const Couplings& couplings);
double classical_diffraction(const StateVector& state, const Couplings& couplings);

// R = <D^dag D> - |<D>|^2 through the structure factor
// sum_ij J_ii^* J_jj Cov(n_i, n_j).
double quantum_addition(const SiteCorrelations& corr, const Couplings& couplings);
// Same quantity through the D operator itself.
double quantum_addition(const StateVector& state, const Couplings& couplings);

struct ScanRow {
  double theta_out = 0.0;
  double classical_x = 0.0;  // |<D_x>|^2 / N^2
  double classical_y = 0.0;  // |<D_y>|^2 / N^2
  double r_x = 0.0;          // R_x / N
  double r_y = 0.0;          // R_y / N
};

struct AngularScan {
  std::vector<ScanRow> rows;
  bool has_y = true;  // false for bosons: x columns hold the boson density
  double particles = 0.0;
};

// Deterministic scan over theta_out. The state may be an equal-weight mixture
// (e.g. a degenerate ground manifold).
AngularScan angular_scan(std::span<const StateVector> mixture, const ProbeGeometry& base,
                         std::span<const double> theta_out, int threads = 1);

// Uniform grid of `points` angles on [-pi, pi].
std::vector<double> angle_grid(int points);

// Trapezoid integral of one scan column over theta_out.
double integrate_over_angle(const AngularScan& scan, double ScanRow::*column);

}  // namespace qolat
