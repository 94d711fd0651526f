#include "qolat/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qolat/errors.hpp"
#include "qolat/parallel.hpp"

namespace qolat {

namespace {

constexpr double kPsiThreshold = 1e-9;

double interaction(double n) { return 0.5 * n * (n - 1.0); }

void label_from_order(MeanFieldSolution& s) {
  if (s.psi > kPsiThreshold) {
    s.phase = MeanFieldPhase::superfluid_minimal;
    s.filling = static_cast<int>(std::floor(s.rho));
    return;
  }
  s.filling = static_cast<int>(std::lround(s.rho));
  s.phase = s.filling == 0 ? MeanFieldPhase::vacuum : MeanFieldPhase::mott;
}

}  // namespace

double QuantumLatticeParams::gamma_D() const {
  return alpha_D > 0.0 ? 1.0 / inv_gamma() : std::numeric_limits<double>::infinity();
}

void QuantumLatticeParams::validate() const {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  if (!(alpha_D >= 0.0) || !std::isfinite(alpha_D)) throw InvalidArgument("alpha_D must be finite and >= 0");
  if (!(t0_over_U >= 0.0) || !std::isfinite(t0_over_U)) throw InvalidArgument("t0/U must be finite and >= 0");
  if (!std::isfinite(mu_over_U)) throw InvalidArgument("mu/U must be finite");
  if (coordination < 0) throw InvalidArgument("coordination must be nonnegative");
}

QuantumLatticeParams QuantumLatticeParams::from_gamma(double mu_over_U, double gamma_D, int K) {
  if (!(gamma_D > 0.0)) throw InvalidArgument("gamma_D must be positive");
  if (K < 1) throw InvalidArgument("K must be >= 1");
  QuantumLatticeParams p;
  p.mu_over_U = mu_over_U;
  p.K = K;
  p.alpha_D = std::isinf(gamma_D) ? 0.0 : 1.0 / (2.0 * K * gamma_D);
  return p;
}

std::string MeanFieldSolution::label() const {
  switch (phase) {
    case MeanFieldPhase::vacuum: return "vacuum";
    case MeanFieldPhase::mott: return "Mott(" + std::to_string(filling) + ")";
    case MeanFieldPhase::superfluid_minimal: return "SF-minimal(" + std::to_string(filling) + ")";
    case MeanFieldPhase::superfluid: return "SF";
  }
  return "?";
}

double onsite_energy(const QuantumLatticeParams& p, double rho, double g) {
  const double x = p.mu_over_U - rho * p.inv_gamma();
  return interaction(g) - g * x - 0.5 * rho * rho * p.inv_gamma();
}

double onsite_energy(const QuantumLatticeParams& p, double rho) {
  const double x = p.mu_over_U - rho * p.inv_gamma();
  return onsite_energy(p, rho, x + 1.0);
}

double minimal_fluctuation_energy(const QuantumLatticeParams& p, double rho) {
  if (!(rho >= 0.0)) throw InvalidArgument("density must be nonnegative");
  const double m = std::floor(rho);
  const double w = rho - m;
  return (1.0 - w) * onsite_energy(p, rho, m) + w * onsite_energy(p, rho, m + 1.0);
}

MeanFieldSolution analytic_solution(const QuantumLatticeParams& p) {
  p.validate();
  MeanFieldSolution s;
  const double mu = p.mu_over_U;
  if (mu < 0.0) {
    label_from_order(s);
    return s;
  }
  const double ig = p.inv_gamma();
  const double m = std::floor(mu / (ig + 1.0));
  if (m + 1.0 > p.n_max) throw CapacityError("analytic density exceeds n_max");
  if (ig > 0.0 && mu <= ig * (m + 1.0) + m) {
    s.rho = (mu - m) / ig;
    const double f = (s.rho - m) * (1.0 - s.rho + m);
    s.delta_n = std::max(0.0, f);
    s.psi = std::sqrt((m + 1.0) * s.delta_n);
  } else {
    s.rho = m + 1.0;
  }
  s.energy = minimal_fluctuation_energy(p, s.rho);
  label_from_order(s);
  return s;
}

Eigen::MatrixXd effective_site_hamiltonian(const QuantumLatticeParams& p, double rho, double psi) {
  const int d = p.n_max + 1;
  const double x = p.mu_over_U - rho * p.inv_gamma();
  const double hop = p.coordination * p.t0_over_U;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    h(n, n) = interaction(n) - x * n - 0.5 * rho * rho * p.inv_gamma() + hop * psi * psi;
    if (n + 1 < d) {
      const double b = -hop * psi * std::sqrt(n + 1.0);
      h(n, n + 1) = b;
      h(n + 1, n) = b;
    }
  }
  return h;
}

namespace {

struct SiteSolve {
  Eigen::VectorXd vector;
  double energy = 0.0;
  double gap = 0.0;
  Eigen::VectorXd second;
};

SiteSolve lowest_pair(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw NumericError("site eigensolver failed");
  SiteSolve out;
  out.vector = es.eigenvectors().col(0);
  out.energy = es.eigenvalues()[0];
  if (h.rows() > 1) {
    out.gap = es.eigenvalues()[1] - es.eigenvalues()[0];
    out.second = es.eigenvectors().col(1);
  } else {
    out.gap = std::numeric_limits<double>::infinity();
  }
  return out;
}

Eigen::VectorXd number_diag(int d) {
  Eigen::VectorXd n(d);
  for (int k = 0; k < d; ++k) n[k] = k;
  return n;
}

double mean_b(const Eigen::VectorXd& v) {
  double b = 0.0;
  for (Eigen::Index n = 0; n + 1 < v.size(); ++n) b += v[n] * v[n + 1] * std::sqrt(n + 1.0);
  return b;
}

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  if (v[k] < 0.0) v = -v;
}

struct DensityFix {
  double rho = 0.0;
  Eigen::VectorXd state;
  double energy = 0.0;
};

// Solve <n>_GS(rho) = rho for fixed psi. <n> falls as rho grows, so a
// bracketing bisection on [0, n_max] always lands on the crossing. When the
// crossing sits on a level degeneracy the density inside the two-level
// manifold is set by self-consistency instead.
DensityFix solve_density(const QuantumLatticeParams& p, double psi, const SelfConsistentOptions& opt) {
  const int d = p.n_max + 1;
  const Eigen::VectorXd nd = number_diag(d);
  auto density_gap = [&](double rho) {
    const auto s = lowest_pair(effective_site_hamiltonian(p, rho, psi));
    return s.vector.cwiseAbs2().dot(nd) - rho;
  };

  double lo = 0.0;
  double hi = p.n_max;
  if (density_gap(hi) > 0.0) throw CapacityError("self-consistent density exceeds n_max");
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (density_gap(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  DensityFix fix;
  fix.rho = 0.5 * (lo + hi);
  auto s = lowest_pair(effective_site_hamiltonian(p, fix.rho, psi));
  if (s.gap >= opt.degeneracy_tolerance) {
    fix.state = s.vector;
    fix_sign(fix.state);
    fix.rho = fix.state.cwiseAbs2().dot(nd);
    fix.energy = s.energy;
    return fix;
  }

  Eigen::VectorXd u0 = s.vector;
  Eigen::VectorXd u1 = s.second;
  // Rotate the manifold onto number eigenstates.
  Eigen::Matrix2d nm;
  nm << u0.cwiseProduct(nd).dot(u0), u0.cwiseProduct(nd).dot(u1), u1.cwiseProduct(nd).dot(u0),
      u1.cwiseProduct(nd).dot(u1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(nm);
  Eigen::VectorXd a = es.eigenvectors()(0, 0) * u0 + es.eigenvectors()(1, 0) * u1;
  Eigen::VectorXd b = es.eigenvectors()(0, 1) * u0 + es.eigenvectors()(1, 1) * u1;
  fix_sign(a);
  fix_sign(b);
  const double na = es.eigenvalues()[0];
  const double nb = es.eigenvalues()[1];

  double target = fix.rho;
  if (p.t0_over_U == 0.0) {
    // the two Fock levels cross at x_c; self-consistency fixes rho through x
    const double la = std::round(na);
    const double lb = std::round(nb);
    const double xc = (interaction(lb) - interaction(la)) / (lb - la);
    target = p.inv_gamma() > 0.0 ? (p.mu_over_U - xc) / p.inv_gamma() : lb;
  }
  const double w = nb > na ? std::clamp((target - na) / (nb - na), 0.0, 1.0) : 0.0;
  Eigen::VectorXd v = std::sqrt(1.0 - w) * a + std::sqrt(w) * b;
  if (mean_b(v) < 0.0) v = std::sqrt(1.0 - w) * a - std::sqrt(w) * b;
  v.normalize();
  fix.state = v;
  fix.rho = v.cwiseAbs2().dot(nd);
  fix.energy = v.dot(effective_site_hamiltonian(p, fix.rho, psi) * v);
  return fix;
}

}  // namespace

MeanFieldSolution selfconsistent_solve(const QuantumLatticeParams& p, const SelfConsistentOptions& options) {
  p.validate();
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
  MeanFieldSolution s;
  if (p.mu_over_U < 0.0) {
    // below the first level crossing the vacuum is the unique fixed point
    s.site_state = Eigen::VectorXd::Unit(p.n_max + 1, 0);
    label_from_order(s);
    return s;
  }

  double psi = options.psi_start;
  double rho_prev = std::clamp(p.mu_over_U, 0.0, static_cast<double>(p.n_max));
  DensityFix fix;
  double psi_new = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    fix = solve_density(p, psi, options);
    psi_new = std::abs(mean_b(fix.state));
    residual = std::max(std::abs(psi_new - psi), std::abs(fix.rho - rho_prev));
    rho_prev = fix.rho;
    if (residual < options.tolerance) break;
    psi = (1.0 - options.damping) * psi + options.damping * psi_new;
  }
  if (!(residual < options.tolerance)) {
    throw ConvergenceError("mean-field iteration did not converge", it, residual);
  }

  s.site_state = fix.state;
  s.rho = fix.rho;
  s.psi = psi_new;
  const Eigen::VectorXd nd = number_diag(p.n_max + 1);
  const Eigen::VectorXd prob = fix.state.cwiseAbs2();
  s.delta_n = std::max(0.0, prob.dot(nd.cwiseAbs2()) - s.rho * s.rho);
  s.energy = fix.energy;
  s.iterations = it;
  s.residual = residual;
  label_from_order(s);
  if (s.phase == MeanFieldPhase::superfluid_minimal) {
    const int m = s.filling;
    double outside = 0.0;
    for (Eigen::Index n = 0; n < prob.size(); ++n) {
      if (n != m && n != m + 1) outside += prob[n];
    }
    if (outside > 1e-8) s.phase = MeanFieldPhase::superfluid;
  }
  return s;
}

std::vector<StaircasePoint> atomic_limit_ed(const QuantumLatticeParams& p, const std::vector<double>& mu_grid) {
  p.validate();
  const long long K = p.K;
  const long long n_total = static_cast<long long>(p.n_max) * K;
  std::vector<double> base(static_cast<std::size_t>(n_total) + 1);
  for (long long N = 0; N <= n_total; ++N) {
    const long long q = N / K;
    const long long r = N % K;
    base[static_cast<std::size_t>(N)] =
        0.5 * (static_cast<double>(r) * (q + 1) * q + static_cast<double>(K - r) * q * (q - 1)) +
        p.alpha_D * static_cast<double>(N) * static_cast<double>(N);
  }
  std::vector<StaircasePoint> out;
  out.reserve(mu_grid.size());
  for (double mu : mu_grid) {
    long long best = 0;
    double best_e = base[0];
    for (long long N = 1; N <= n_total; ++N) {
      const double e = base[static_cast<std::size_t>(N)] - mu * static_cast<double>(N);
      if (e < best_e) {
        best_e = e;
        best = N;
      }
    }
    out.push_back({mu, best, static_cast<double>(best) / static_cast<double>(K)});
  }
  return out;
}

int count_steps(const std::vector<StaircasePoint>& staircase) {
  int steps = 0;
  for (std::size_t i = 1; i < staircase.size(); ++i) {
    if (staircase[i].atoms != staircase[i - 1].atoms) ++steps;
  }
  return steps;
}

double PhaseDiagram::insulating_fraction(std::size_t alpha_index) const {
  if (mu_grid.empty()) return 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < mu_grid.size(); ++k) {
    if (at(alpha_index, k).psi <= kPsiThreshold) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(mu_grid.size());
}

PhaseDiagram phase_diagram(const std::vector<double>& mu_grid, const std::vector<double>& alpha_grid,
                           const QuantumLatticeParams& base, MeanFieldMethod method, int threads) {
  base.validate();
  for (double a : alpha_grid) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("alpha_D grid must be finite and >= 0");
  }
  for (double mu : mu_grid) {
    if (!std::isfinite(mu)) throw InvalidArgument("mu/U grid must be finite");
  }
  PhaseDiagram pd;
  pd.mu_grid = mu_grid;
  pd.alpha_grid = alpha_grid;
  pd.cells.resize(mu_grid.size() * alpha_grid.size());
  parallel_for(pd.cells.size(), threads, [&](std::size_t idx) {
    QuantumLatticeParams p = base;
    p.alpha_D = alpha_grid[idx / mu_grid.size()];
    p.mu_over_U = mu_grid[idx % mu_grid.size()];
    pd.cells[idx] = method == MeanFieldMethod::analytic ? analytic_solution(p) : selfconsistent_solve(p);
  });
  for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
    for (std::size_t k = 1; k < mu_grid.size(); ++k) {
      const bool before = pd.at(a, k - 1).psi > kPsiThreshold;
      const bool after = pd.at(a, k).psi > kPsiThreshold;
      if (before != after) {
        pd.boundaries.push_back({alpha_grid[a], 0.5 * (mu_grid[k - 1] + mu_grid[k]), after});
      }
    }
  }
  return pd;
}

std::vector<double> default_mu_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 600; ++k) g.push_back(0.005 * k);
  return g;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("log grid needs 0 < lo <= hi");
  if (points < 1) throw InvalidArgument("log grid needs at least one point");
  if (points == 1) return {lo};
  std::vector<double> g(static_cast<std::size_t>(points));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = std::exp(a + (b - a) * k / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace qolat
