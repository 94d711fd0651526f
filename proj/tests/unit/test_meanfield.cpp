#include <gtest/gtest.h>

#include <cmath>

#include "qolat/errors.hpp"
#include "qolat/meanfield.hpp"

using namespace qolat;

namespace {

// Window edges for filling m: SF on [m(1/g + 1), (m+1)/g + m], Mott(m+1) up to (m+1)(1/g + 1).
double sf_start(double inv, int m) { return m * (inv + 1.0); }
double sf_end(double inv, int m) { return inv * (m + 1) + m; }
double mott_end(double inv, int m) { return (m + 1) * (inv + 1.0); }

std::vector<double> grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int k = 0; k < points; ++k) g.push_back(lo + (hi - lo) * k / (points - 1));
  return g;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Params, GammaRoundTrip) {
  const auto p = QuantumLatticeParams::from_gamma(0.3, 2.5, 3);
  EXPECT_NEAR(p.gamma_D(), 2.5, 1e-14);
  EXPECT_NEAR(p.alpha_D, 1.0 / (2.0 * 3 * 2.5), 1e-15);
  QuantumLatticeParams bad;
  bad.K = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = QuantumLatticeParams{};
  bad.n_max = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  EXPECT_TRUE(std::isinf(QuantumLatticeParams{}.gamma_D()));
}

TEST(Analytic, HalfFilledMinimalSuperfluid) {
  const auto s = analytic_solution(QuantumLatticeParams::from_gamma(0.25, 2.0));
  EXPECT_NEAR(s.rho, 0.5, 1e-15);
  EXPECT_NEAR(s.psi, 0.5, 1e-15);
  EXPECT_NEAR(s.delta_n, 0.25, 1e-15);
  EXPECT_EQ(s.phase, MeanFieldPhase::superfluid_minimal);
  EXPECT_EQ(s.label(), "SF-minimal(0)");
}

TEST(Analytic, MottWindowIsIncompressible) {
  for (double g : {0.5, 2.0, 10.0}) {
    const double inv = 1.0 / g;
    for (int m = 0; m < 3; ++m) {
      const double mu = 0.5 * (sf_end(inv, m) + mott_end(inv, m));
      const auto s = analytic_solution(QuantumLatticeParams::from_gamma(mu, g));
      EXPECT_EQ(s.psi, 0.0);
      EXPECT_EQ(s.rho, m + 1.0);
      EXPECT_EQ(s.delta_n, 0.0);
      EXPECT_EQ(s.label(), "Mott(" + std::to_string(m + 1) + ")");
    }
  }
}

TEST(Analytic, WindowsTileTheAxis) {
  for (double g : {0.1, 0.5, 2.0, 10.0}) {
    const double inv = 1.0 / g;
    for (int m = 0; m < 4; ++m) {
      EXPECT_LE(sf_start(inv, m), sf_end(inv, m));
      EXPECT_LE(sf_end(inv, m), mott_end(inv, m));
      EXPECT_DOUBLE_EQ(mott_end(inv, m), sf_start(inv, m + 1));
      // the solution is continuous at both inner edges
      for (double edge : {sf_end(inv, m), mott_end(inv, m)}) {
        QuantumLatticeParams p = QuantumLatticeParams::from_gamma(edge - 1e-9, g, 1);
        p.n_max = 6;
        const auto a = analytic_solution(p);
        p.mu_over_U = edge + 1e-9;
        const auto b = analytic_solution(p);
        EXPECT_NEAR(a.rho, b.rho, 1e-7);
        EXPECT_NEAR(a.psi, b.psi, 1e-3);
      }
    }
  }
}

TEST(Analytic, SlopeEqualsGamma) {
  for (double g : {0.5, 2.0, 10.0}) {
    const double inv = 1.0 / g;
    for (int m = 0; m < 2; ++m) {
      const double lo = sf_start(inv, m), hi = sf_end(inv, m);
      const double a = lo + 0.3 * (hi - lo), b = lo + 0.7 * (hi - lo);
      const double ra = analytic_solution(QuantumLatticeParams::from_gamma(a, g)).rho;
      const double rb = analytic_solution(QuantumLatticeParams::from_gamma(b, g)).rho;
      EXPECT_NEAR((rb - ra) / (b - a), g, 1e-9 * g);
    }
  }
}

TEST(Analytic, NegativeChemicalPotentialIsVacuum) {
  const auto s = analytic_solution(QuantumLatticeParams::from_gamma(-0.2, 1.0));
  EXPECT_EQ(s.phase, MeanFieldPhase::vacuum);
  EXPECT_EQ(s.rho, 0.0);
  EXPECT_EQ(s.label(), "vacuum");
}

TEST(Analytic, CapacityExceeded) {
  QuantumLatticeParams p = QuantumLatticeParams::from_gamma(10.0, 1.0);
  p.n_max = 2;
  EXPECT_THROW(analytic_solution(p), CapacityError);
}

TEST(OnsiteEnergy, Examples) {
  EXPECT_EQ(onsite_energy(QuantumLatticeParams::from_gamma(0.0, 1.0), 0.0), 0.0);
  // without light the energy reduces to g(g-1)/2 - g mu
  QuantumLatticeParams p;
  p.mu_over_U = 0.7;
  for (double g : {0.0, 1.0, 2.5}) EXPECT_DOUBLE_EQ(onsite_energy(p, 0.4, g), 0.5 * g * (g - 1.0) - g * 0.7);
}

TEST(OnsiteEnergy, AnalyticDensityMinimisesMinimalFluctuationEnergy) {
  for (double g : {0.5, 2.0}) {
    for (double frac : {0.2, 0.5, 0.8}) {
      const double inv = 1.0 / g;
      const double mu = sf_start(inv, 0) + frac * (sf_end(inv, 0) - sf_start(inv, 0));
      const auto p = QuantumLatticeParams::from_gamma(mu, g);
      double best_rho = 0.0, best = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 1000000; ++k) {
        const double rho = k * 1e-6;
        const double e = minimal_fluctuation_energy(p, rho);
        if (e < best) {
          best = e;
          best_rho = rho;
        }
      }
      EXPECT_NEAR(best_rho, analytic_solution(p).rho, 2e-6);
    }
  }
}

TEST(SiteHamiltonian, SymmetricWithExpectedDiagonal) {
  QuantumLatticeParams p = QuantumLatticeParams::from_gamma(0.8, 2.0);
  p.t0_over_U = 0.05;
  const auto h = effective_site_hamiltonian(p, 0.6, 0.3);
  ASSERT_EQ(h.rows(), p.n_max + 1);
  EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  const double x = 0.8 - 0.6 * p.inv_gamma();
  const double shift = -0.5 * 0.36 * p.inv_gamma() + p.coordination * 0.05 * 0.09;
  for (int n = 0; n <= p.n_max; ++n) EXPECT_NEAR(h(n, n), 0.5 * n * (n - 1) - x * n + shift, 1e-14);
  EXPECT_NEAR(h(0, 1), -p.coordination * 0.05 * 0.3, 1e-15);
  EXPECT_NEAR(h(2, 3), -p.coordination * 0.05 * 0.3 * std::sqrt(3.0), 1e-15);
}

TEST(SelfConsistent, MatchesAnalyticOnScan) {
  for (double g : {0.5, 2.0, 10.0}) {
    for (double mu : grid(0.0, 3.0, 121)) {
      const auto p = QuantumLatticeParams::from_gamma(mu, g);
      const auto a = analytic_solution(p);
      const auto s = selfconsistent_solve(p);
      EXPECT_NEAR(s.rho, a.rho, 1e-8) << g << " " << mu;
      EXPECT_NEAR(s.psi, a.psi, 1e-8) << g << " " << mu;
      EXPECT_NEAR(s.delta_n, a.delta_n, 1e-8) << g << " " << mu;
    }
  }
}

TEST(SelfConsistent, MinimalSuperfluidLivesOnTwoLevels) {
  const auto p = QuantumLatticeParams::from_gamma(1.75, 2.0);
  const auto s = selfconsistent_solve(p);
  ASSERT_EQ(s.phase, MeanFieldPhase::superfluid_minimal);
  ASSERT_EQ(s.site_state.size(), p.n_max + 1);
  for (int n = 0; n <= p.n_max; ++n) {
    if (n == s.filling || n == s.filling + 1) continue;
    EXPECT_LT(s.site_state[n] * s.site_state[n], 1e-8);
  }
  EXPECT_GE(s.psi, 0.0);
}

TEST(SelfConsistent, AtomicLimitStaircase) {
  QuantumLatticeParams p;
  for (double mu : {0.3, 0.7, 1.2, 1.9, 2.5}) {
    p.mu_over_U = mu;
    const auto s = selfconsistent_solve(p);
    EXPECT_EQ(s.psi, 0.0);
    EXPECT_EQ(s.rho, std::floor(mu) + 1.0);
  }
}

TEST(SelfConsistent, PsiIsContinuousAcrossBoundary) {
  const double g = 2.0, edge = sf_end(0.5, 0);
  double prev = -1.0;
  for (double mu = edge - 0.02; mu <= edge + 0.02; mu += 1e-3) {
    const double psi = selfconsistent_solve(QuantumLatticeParams::from_gamma(mu, g)).psi;
    if (prev >= 0.0) EXPECT_LT(std::abs(psi - prev), 0.1);
    prev = psi;
  }
  EXPECT_EQ(prev, 0.0);
}

TEST(SelfConsistent, HoppingOpensSuperfluid) {
  QuantumLatticeParams p;
  p.mu_over_U = 0.5;
  p.t0_over_U = 0.1;
  const auto s = selfconsistent_solve(p);
  EXPECT_GT(s.psi, 1e-3);
  EXPECT_TRUE(s.phase == MeanFieldPhase::superfluid || s.phase == MeanFieldPhase::superfluid_minimal);
  p.t0_over_U = 0.02;
  EXPECT_LT(selfconsistent_solve(p).psi, 1e-9);
}

TEST(AtomicLimitED, FourSitesGiveFourSteps) {
  const double g = 2.0;
  const int K = 4;
  auto p = QuantumLatticeParams::from_gamma(0.0, g, K);
  const double a = p.alpha_D;
  // plateau rho = 1 spans [a(2K - 1), 1 + a(2K + 1)]; rho = 2 starts at 1 + a(4K - 1)
  const double mid1 = 0.5 * (a * (2 * K - 1) + 1.0 + a * (2 * K + 1));
  const double mid2 = 0.5 * (1.0 + a * (4 * K - 1) + 2.0 + a * (4 * K + 1));
  const auto first = atomic_limit_ed(p, grid(-0.2, mid1, 4001));
  EXPECT_EQ(count_steps(first), K);
  EXPECT_EQ(first.back().atoms, K);
  const auto second = atomic_limit_ed(p, grid(mid1, mid2, 4001));
  EXPECT_EQ(count_steps(second), K);
  EXPECT_EQ(second.back().atoms, 2 * K);
}

TEST(AtomicLimitED, NoLightGivesSingleJumps) {
  QuantumLatticeParams p;
  p.K = 6;
  const auto st = atomic_limit_ed(p, grid(-0.5, 2.5, 3001));
  EXPECT_EQ(count_steps(st), 3);
  for (const auto& pt : st) {
    const double expected = pt.mu_over_U < 0.0 ? 0.0 : std::floor(pt.mu_over_U) + 1.0;
    if (std::abs(pt.mu_over_U - std::round(pt.mu_over_U)) > 1e-9) EXPECT_EQ(pt.rho, expected);
  }
}

TEST(AtomicLimitED, LargeKSlopeApproachesGamma) {
  const double g = 2.0;
  const auto p = QuantumLatticeParams::from_gamma(0.0, g, 1000);
  const auto st = atomic_limit_ed(p, grid(0.0, 0.5, 2001));
  std::vector<double> x, y;
  for (const auto& pt : st) {
    if (pt.rho > 0.05 && pt.rho < 0.95) {
      x.push_back(pt.mu_over_U);
      y.push_back(pt.rho);
    }
  }
  ASSERT_GT(x.size(), 100u);
  EXPECT_NEAR(fit_slope(x, y), g, 0.01 * g);
}

TEST(PhaseDiagram, LightSuppressesMottLobes) {
  const auto mu = grid(0.0, 3.0, 301);
  const auto alphas = log_grid(1e-3, 10.0, 9);
  const auto pd = phase_diagram(mu, alphas, QuantumLatticeParams{}, MeanFieldMethod::analytic, 2);
  ASSERT_EQ(pd.cells.size(), mu.size() * alphas.size());
  for (std::size_t a = 1; a < alphas.size(); ++a) {
    EXPECT_LE(pd.insulating_fraction(a), pd.insulating_fraction(a - 1) + 1e-12);
  }
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t k = 1; k < mu.size(); ++k) EXPECT_GE(pd.at(a, k).rho, pd.at(a, k - 1).rho - 1e-12);
  }
}

TEST(PhaseDiagram, BoundariesSitOnWindowEdges) {
  const double step = 0.005;
  const auto mu = default_mu_grid();
  ASSERT_EQ(mu.size(), 601u);
  const std::vector<double> alphas{0.05, 0.25};
  const auto pd = phase_diagram(mu, alphas, QuantumLatticeParams{}, MeanFieldMethod::analytic);
  for (const auto& b : pd.boundaries) {
    const double inv = 2.0 * b.alpha_D;
    double nearest = std::abs(b.mu_over_U);
    for (int m = 0; m < 4; ++m) {
      for (double e : {sf_end(inv, m), mott_end(inv, m)}) nearest = std::min(nearest, std::abs(e - b.mu_over_U));
    }
    EXPECT_LE(nearest, step);
  }
  EXPECT_FALSE(pd.boundaries.empty());
}

TEST(PhaseDiagram, SelfConsistentRouteAgrees) {
  const auto mu = grid(0.0, 2.0, 81);
  const std::vector<double> alphas{0.01, 0.3};
  const auto a = phase_diagram(mu, alphas, QuantumLatticeParams{}, MeanFieldMethod::analytic);
  const auto s = phase_diagram(mu, alphas, QuantumLatticeParams{}, MeanFieldMethod::selfconsistent);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_NEAR(a.cells[i].rho, s.cells[i].rho, 1e-8);
    EXPECT_EQ(a.cells[i].label(), s.cells[i].label());
  }
}

TEST(Grids, LogGridEndpoints) {
  const auto g = log_grid(1e-3, 10.0, 41);
  ASSERT_EQ(g.size(), 41u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-3);
  EXPECT_NEAR(g.back(), 10.0, 1e-12);
  EXPECT_NEAR(g[20], std::sqrt(1e-3 * 10.0), 1e-12);
}
