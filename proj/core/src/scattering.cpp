#include "qolat/scattering.hpp"

#include <cmath>
#include <numbers>

#include "qolat/errors.hpp"
#include "qolat/parallel.hpp"

namespace qolat {

std::string_view to_string(LightChannel c) {
  switch (c) {
    case LightChannel::x: return "x";
    case LightChannel::y: return "y";
    case LightChannel::boson: return "boson";
  }
  return "?";
}

Channel site_channel(LightChannel c) {
  switch (c) {
    case LightChannel::x: return Channel::density;
    case LightChannel::y: return Channel::magnetization;
    case LightChannel::boson: return Channel::boson;
  }
  return Channel::density;
}

void ProbeGeometry::validate() const {
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
  const double pi = std::numbers::pi;
  if (!(theta_in >= -pi && theta_in <= pi) || !(theta_out >= -pi && theta_out <= pi)) {
    throw InvalidArgument("angles must lie in [-pi, pi]");
  }
}

double ProbeGeometry::phase_step(double lattice_constant) const {
  return 2.0 * std::numbers::pi * lattice_constant / wavelength *
         (std::sin(theta_in) - std::sin(theta_out));
}

Complex cavity_prefactor(Complex omega_alpha, double detuning, double kappa) {
  const Complex denom(detuning, kappa);
  if (denom == Complex(0.0, 0.0)) {
    throw InvalidArgument("cavity prefactor diverges: need kappa > 0 or detuning != 0");
  }
  return omega_alpha / denom;
}

Couplings couplings_from_phase(double phase, int sites, LightChannel channel) {
  if (sites < 1) throw InvalidArgument("need at least one site");
  Couplings c;
  c.channel = channel;
  c.J.reserve(static_cast<std::size_t>(sites));
  for (int j = 0; j < sites; ++j) c.J.push_back(std::polar(1.0, phase * j));
  return c;
}

Couplings compute_couplings(const ProbeGeometry& geometry, int sites, LightChannel channel,
                            double lattice_constant) {
  geometry.validate();
  return couplings_from_phase(geometry.phase_step(lattice_constant), sites, channel);
}

namespace {

Channel checked_channel(const FockBasis& basis, LightChannel light) {
  const bool boson = basis.statistics() == Statistics::boson;
  if (boson && light == LightChannel::y) {
    throw BasisMismatch("y polarisation probes magnetisation, which bosons do not carry");
  }
  if (!boson && light == LightChannel::boson) {
    throw BasisMismatch("boson channel requested on a fermion basis");
  }
  // x on bosons is the boson density
  return boson ? Channel::boson : site_channel(light);
}

void check_sites(const FockBasis& basis, const Couplings& c) {
  if (static_cast<int>(c.J.size()) != basis.sites()) {
    throw BasisMismatch("coupling count does not match number of sites");
  }
}

double checked_real(Complex value, const char* what) {
  const double tol = 1e-10 * std::max(1.0, std::abs(value.real()));
  if (std::abs(value.imag()) > tol) {
    throw NumericError(std::string(what) + " has an imaginary part above tolerance");
  }
  return value.real();
}

}  // namespace

SparseOperator d_operator(BasisPtr basis, const Couplings& couplings) {
  if (!basis) throw InvalidArgument("operator needs a basis");
  const Channel ch = checked_channel(*basis, couplings.channel);
  check_sites(*basis, couplings);
  const auto d = static_cast<Eigen::Index>(basis->dimension());
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(basis->dimension());
  for (std::size_t i = 0; i < basis->dimension(); ++i) {
    Complex v{0.0, 0.0};
    for (int s = 0; s < basis->sites(); ++s) {
      v += couplings.J[static_cast<std::size_t>(s)] * static_cast<double>(basis->site_value(i, s, ch));
    }
    if (v != Complex(0.0, 0.0)) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), v);
  }
  SparseMatrix m(d, d);
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(std::move(basis), std::move(m));
}

SiteCorrelations site_correlations(std::span<const StateVector> mixture, Channel channel) {
  if (mixture.empty()) throw InvalidArgument("empty state mixture");
  const auto& basis = mixture.front().basis();
  basis.check_channel(channel);
  const int M = basis.sites();
  SiteCorrelations out;
  out.mean = Eigen::VectorXd::Zero(M);
  out.second = Eigen::MatrixXd::Zero(M, M);

  Eigen::VectorXd n(M);
  for (const auto& state : mixture) {
    if (!(state.basis().spec() == basis.spec())) throw BasisMismatch("mixture spans several bases");
    const double norm2 = state.amplitudes().squaredNorm();
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
      const double p = state.probability(i) / norm2;
      if (p == 0.0) continue;
      for (int s = 0; s < M; ++s) n[s] = basis.site_value(i, s, channel);
      out.mean += p * n;
      out.second.noalias() += p * n * n.transpose();
    }
  }
  const double w = 1.0 / static_cast<double>(mixture.size());
  out.mean *= w;
  out.second *= w;
  out.total = out.mean.sum();
  return out;
}

SiteCorrelations site_correlations(const StateVector& state, Channel channel) {
  return site_correlations(std::span<const StateVector>(&state, 1), channel);
}

double classical_diffraction(const SiteCorrelations& corr, const Couplings& couplings) {
  if (static_cast<Eigen::Index>(couplings.J.size()) != corr.mean.size()) {
    throw BasisMismatch("coupling count does not match number of sites");
  }
  Complex d{0.0, 0.0};
  for (std::size_t j = 0; j < couplings.J.size(); ++j) {
    d += couplings.J[j] * corr.mean[static_cast<Eigen::Index>(j)];
  }
  return std::norm(d);
}

double classical_diffraction(const StateVector& state, const Couplings& couplings) {
  const auto D = d_operator(state.basis_ptr(), couplings);
  return std::norm(expectation(state, D) / state.amplitudes().squaredNorm());
}

double quantum_addition(const SiteCorrelations& corr, const Couplings& couplings) {
  const auto M = corr.mean.size();
  if (static_cast<Eigen::Index>(couplings.J.size()) != M) {
    throw BasisMismatch("coupling count does not match number of sites");
  }
  const Eigen::Map<const Eigen::VectorXcd> J(couplings.J.data(), M);
  const Eigen::MatrixXcd cov = corr.covariance().cast<Complex>();
  const Complex r = J.dot(cov * J);
  return checked_real(r, "quantum addition");
}

double quantum_addition(const StateVector& state, const Couplings& couplings) {
  const auto D = d_operator(state.basis_ptr(), couplings);
  const double norm2 = state.amplitudes().squaredNorm();
  const Eigen::VectorXcd dpsi = D.matrix() * state.amplitudes();
  const Complex dd = dpsi.squaredNorm() / norm2;  // <D^dag D>
  const Complex mean = state.amplitudes().dot(dpsi) / norm2;
  return checked_real(dd - std::norm(mean), "quantum addition");
}

std::vector<double> angle_grid(int points) {
  if (points < 2) throw InvalidArgument("angle grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double pi = std::numbers::pi;
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] = -pi + 2.0 * pi * k / (points - 1);
  }
  grid.back() = pi;
  return grid;
}

AngularScan angular_scan(std::span<const StateVector> mixture, const ProbeGeometry& base,
                         std::span<const double> theta_out, int threads) {
  if (mixture.empty()) throw InvalidArgument("empty state mixture");
  base.validate();
  const auto& basis = mixture.front().basis();
  const bool boson = basis.statistics() == Statistics::boson;
  const int M = basis.sites();
  const double a = basis.spec().lattice_constant;

  AngularScan scan;
  scan.has_y = !boson;
  const auto density = site_correlations(mixture, boson ? Channel::boson : Channel::density);
  SiteCorrelations magnet;
  if (!boson) magnet = site_correlations(mixture, Channel::magnetization);
  scan.particles = density.total;
  if (!(scan.particles > 0.0)) throw InvalidArgument("scan normalisation needs N > 0");
  const double N = scan.particles;

  scan.rows.resize(theta_out.size());
  parallel_for(theta_out.size(), threads, [&](std::size_t k) {
    ProbeGeometry g = base;
    g.theta_out = theta_out[k];
    g.validate();
    const double phase = g.phase_step(a);
    ScanRow row;
    row.theta_out = theta_out[k];
    const auto cx = couplings_from_phase(phase, M, boson ? LightChannel::boson : LightChannel::x);
    row.classical_x = classical_diffraction(density, cx) / (N * N);
    row.r_x = quantum_addition(density, cx) / N;
    if (!boson) {
      const auto cy = couplings_from_phase(phase, M, LightChannel::y);
      row.classical_y = classical_diffraction(magnet, cy) / (N * N);
      row.r_y = quantum_addition(magnet, cy) / N;
    }
    scan.rows[k] = row;
  });
  return scan;
}

double integrate_over_angle(const AngularScan& scan, double ScanRow::*column) {
  double total = 0.0;
  for (std::size_t k = 1; k < scan.rows.size(); ++k) {
    const auto& lo = scan.rows[k - 1];
    const auto& hi = scan.rows[k];
    total += 0.5 * (hi.theta_out - lo.theta_out) * (lo.*column + hi.*column);
  }
  return total;
}

}  // namespace qolat
