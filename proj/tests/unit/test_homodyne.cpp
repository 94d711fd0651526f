#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qolat/errors.hpp"
#include "qolat/homodyne.hpp"
#include "qolat/trajectories.hpp"

using namespace qolat;

namespace {

constexpr double kPi = std::numbers::pi;

HomodyneConfig config(double flux, double dphi, double kappa = 1.0, double coupling = 1.0) {
  HomodyneConfig c;
  c.flux = flux;
  c.delta_phi = dphi;
  c.kappa = kappa;
  c.coupling = coupling;
  return c;
}

// |<a|b>| for normalised component lists over the same z values.
double overlap(const std::vector<HomodyneComponent>& a, const std::vector<HomodyneComponent>& b) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i].amplitude) * b[i].amplitude;
  return std::abs(s);
}

}  // namespace

TEST(EigenvaluePair, FragileClosedForm) {
  for (double r : {0.5, 1.0, 3.0}) {
    const auto cfg = config(1.3, 0.0, 0.7, 0.4);
    const auto z = eigenvalue_pair_at_rate(cfg, r);
    const double scale = std::sqrt(1.0 / (2.0 * 0.7 * 0.16));
    EXPECT_NEAR(z.plus, scale * (std::sqrt(r) - std::sqrt(1.3)), 1e-10);
    EXPECT_NEAR(z.minus, scale * (-std::sqrt(r) - std::sqrt(1.3)), 1e-10);
  }
}

TEST(EigenvaluePair, RobustClosedForm) {
  const auto cfg = config(0.9, kPi / 2, 1.4, 0.6);
  for (double r : {0.9, 1.0, 2.5}) {
    const auto z = eigenvalue_pair_at_rate(cfg, r);
    const double expected = std::sqrt(1.0 / (2.0 * 1.4 * 0.36)) * std::sqrt(r - 0.9);
    EXPECT_NEAR(z.plus, expected, 1e-10);
    EXPECT_NEAR(z.minus, -expected, 1e-10);
  }
}

TEST(EigenvaluePair, Examples) {
  auto z = eigenvalue_pair_at_rate(config(1.0, 0.0), 1.0);
  EXPECT_NEAR(z.zeta_plus, 0.0, 1e-15);
  EXPECT_NEAR(z.zeta_minus, -2.0, 1e-15);
  EXPECT_NEAR(z.minus, -2.0 * std::sqrt(0.5), 1e-15);
  z = eigenvalue_pair_at_rate(config(1.0, kPi / 2), 1.0);
  EXPECT_NEAR(z.plus, 0.0, 1e-15);
  z = eigenvalue_pair(config(1.0, kPi / 2), 20, 10.0);
  EXPECT_NEAR(z.plus, std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(z.plus, 0.7071, 5e-5);
}

TEST(EigenvaluePair, CountFactorModulusEqualsRate) {
  for (double dphi : {0.0, 0.3, kPi / 2, 2.0}) {
    const auto cfg = config(1.1, dphi, 0.8, 1.7);
    const double r = 2.0;
    const auto z = eigenvalue_pair_at_rate(cfg, r);
    EXPECT_NEAR(detection_rate(cfg, z.plus), r, 1e-12);
    EXPECT_NEAR(detection_rate(cfg, z.minus), r, 1e-12);
  }
}

TEST(EigenvaluePair, BelowThresholdIsRegimeError) {
  EXPECT_THROW(eigenvalue_pair_at_rate(config(1.0, kPi / 2), 0.99), RegimeError);
  EXPECT_NO_THROW(eigenvalue_pair_at_rate(config(1.0, 0.0), 0.0));
  EXPECT_THROW(eigenvalue_pair(config(1.0, 0.0), 1, 0.0), InvalidArgument);
  HomodyneConfig bad = config(1.0, 0.0);
  bad.coupling = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(ConditionalState, FragileSignFlipsEveryCount) {
  const auto cfg = config(1.0, 0.0);
  for (int m = 1; m <= 6; ++m) {
    const auto s = conditional_state(cfg, 0.5, 0.5, m, m / 1.5);
    const Complex rel = s.c_plus * std::conj(s.c_minus) / std::abs(s.c_plus * std::conj(s.c_minus));
    EXPECT_NEAR(rel.real(), m % 2 == 0 ? 1.0 : -1.0, 1e-12);
    EXPECT_NEAR(s.relative_phase, m * kPi, 1e-12);
  }
}

TEST(ConditionalState, RobustPhaseAccumulatesSmoothly) {
  const auto cfg = config(1.0, kPi / 2);
  const auto s = conditional_state(cfg, 0.5, 0.5, 100, 100.0 / 1.01);
  EXPECT_NEAR(s.relative_phase, 200.0 * std::atan(0.1), 1e-10);
  EXPECT_NEAR(s.relative_phase, 19.93, 5e-3);
  const auto at_flux = conditional_state(cfg, 0.5, 0.5, 40, 40.0);
  EXPECT_NEAR(at_flux.relative_phase, 0.0, 1e-12);
  EXPECT_NEAR(std::norm(s.c_plus) + std::norm(s.c_minus), 1.0, 1e-14);
}

TEST(ConditionalState, RobustFactorMatchesBracketForm) {
  // [sqrt(F) + i sqrt(r - F)]^m on the + branch
  const double F = 1.2, r = 1.5;
  const auto cfg = config(F, kPi / 2);
  const auto z = eigenvalue_pair_at_rate(cfg, r);
  const Complex expected(std::sqrt(F), std::sqrt(r - F));
  EXPECT_NEAR(std::abs(count_factor(cfg, z.plus) - expected), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(count_factor(cfg, z.minus) - std::conj(expected)), 0.0, 1e-12);
  EXPECT_NEAR(per_count_phase(cfg, r), 2.0 * std::atan(std::sqrt(r / F - 1.0)), 1e-12);
}

TEST(ConditionalAmplitudes, PhiRotatesBranchesOppositely) {
  auto cfg = config(1.0, kPi / 2);
  cfg.phi = 0.3;
  const std::vector<HomodyneComponent> prior{{-0.5, {std::sqrt(0.5), 0.0}}, {0.5, {std::sqrt(0.5), 0.0}}};
  const auto c = conditional_amplitudes(cfg, prior, 0, 2.0);
  EXPECT_NEAR(std::arg(c[1].amplitude * std::conj(c[0].amplitude)), 1.2, 1e-12);
}

TEST(Simulation, FinalStateMatchesConditionalAmplitudes) {
  for (double dphi : {0.0, kPi / 2, 1.0}) {
    auto cfg = config(1.0, dphi, 1.0, 0.5);
    cfg.phi = 0.2;
    const std::vector<HomodyneComponent> prior{{-1.0, {0.6, 0.0}}, {1.0, {0.0, 0.8}}};
    for (std::uint64_t stream = 0; stream < 20; ++stream) {
      const auto rec = simulate_homodyne_trajectory(cfg, prior, 3.0, 17, stream);
      const int m = static_cast<int>(rec.detection_times.size());
      const auto ref = conditional_amplitudes(cfg, prior, m, 3.0);
      EXPECT_NEAR(overlap(rec.final_state, ref), 1.0, 1e-8);
      const Complex rel_sim = rec.final_state[1].amplitude * std::conj(rec.final_state[0].amplitude);
      const Complex rel_ref = ref[1].amplitude * std::conj(ref[0].amplitude);
      EXPECT_NEAR(std::abs(rel_sim - rel_ref), 0.0, 1e-8);
      ASSERT_FALSE(rec.log.empty());
      EXPECT_DOUBLE_EQ(rec.log.back().time, 3.0);
      EXPECT_EQ(rec.log.back().counts, m);
      EXPECT_NEAR(std::remainder(rec.log.back().relative_phase - std::arg(rel_sim) + std::arg(Complex(0.0, 0.8)) -
                                     std::arg(Complex(0.6, 0.0)),
                                 2.0 * kPi),
                  0.0, 1e-8);
    }
  }
}

TEST(Simulation, ZeroFluxReducesToDirectDetection) {
  const auto cfg = config(0.0, 0.0, 1.0, 0.5);
  const DiscreteDistribution p{{-2, 1, 3}, {0.3, 0.5, 0.2}};
  std::vector<HomodyneComponent> prior;
  for (std::size_t i = 0; i < p.size(); ++i) prior.push_back({double(p.support[i]), {std::sqrt(p.probability[i]), 0.0}});
  TrajectoryOptions o{0.5, 1.0, 2.0, {}};
  for (std::uint64_t stream = 0; stream < 10; ++stream) {
    const auto h = simulate_homodyne_trajectory(cfg, prior, 2.0, 8, stream);
    const auto d = sample_trajectory(p, o, 8, stream);
    ASSERT_EQ(h.detection_times.size(), d.detection_times.size());
    for (std::size_t k = 0; k < h.detection_times.size(); ++k) {
      EXPECT_NEAR(h.detection_times[k], d.detection_times[k], 1e-9);
    }
  }
}

TEST(Simulation, UncoupledBranchGivesPoissonAtFlux) {
  const double F = 1.5, T = 4.0;
  const auto cfg = config(F, 0.0);
  const std::vector<HomodyneComponent> prior{{0.0, {1.0, 0.0}}};
  const std::size_t n = 10000;
  const auto ens = simulate_homodyne_ensemble(cfg, prior, T, 31, n);
  double s = 0.0;
  for (const auto& r : ens) s += static_cast<double>(r.detection_times.size());
  EXPECT_NEAR(s / n, F * T, 3.0 * std::sqrt(F * T / n));
}

TEST(Simulation, Deterministic) {
  const auto cfg = config(1.0, kPi / 2);
  const std::vector<HomodyneComponent> prior{{-0.2, {std::sqrt(0.5), 0.0}}, {0.2, {std::sqrt(0.5), 0.0}}};
  const auto a = simulate_homodyne_ensemble(cfg, prior, 5.0, 4, 10, 1);
  const auto b = simulate_homodyne_ensemble(cfg, prior, 5.0, 4, 10, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].detection_times, b[i].detection_times);
}

TEST(Purity, DistantBranchesAreMixed) {
  const auto cfg = config(1.0, 0.0, 1.0, 5.0);
  const std::vector<HomodyneComponent> cat{{-2.0, {std::sqrt(0.5), 0.0}}, {2.0, {std::sqrt(0.5), 0.0}}};
  EXPECT_NEAR(matter_purity(cfg, cat), 0.5, 1e-12);
  const std::vector<HomodyneComponent> single{{1.0, {1.0, 0.0}}};
  EXPECT_NEAR(matter_purity(cfg, single), 1.0, 1e-15);
}

TEST(Robustness, NoMissesKeepsPurity) {
  RobustnessOptions o;
  o.miss_probability = 0.0;
  const auto rep = robustness_compare(config(1.0, 0.0), config(1.0, kPi / 2), o);
  EXPECT_DOUBLE_EQ(rep.fragile.purity_exact, 1.0);
  EXPECT_DOUBLE_EQ(rep.robust.purity_exact, 1.0);
  EXPECT_DOUBLE_EQ(rep.fragile.coherence_sampled, 1.0);
}

TEST(Robustness, FragileWashesOutRobustSurvives) {
  RobustnessOptions o;
  o.miss_probability = 0.5;
  o.seed = 12;
  const auto rep = robustness_compare(config(1.0, 0.0), config(1.0, kPi / 2), o);
  // binomial average of (-1)^k with p = 1/2 vanishes exactly
  EXPECT_NEAR(rep.fragile.coherence_exact, 0.0, 1e-12);
  EXPECT_LT(rep.fragile.coherence_sampled, 0.05);
  EXPECT_LE(std::abs(rep.robust.per_count_phase), 0.1);
  EXPECT_GT(rep.robust.coherence_exact, 0.9);
  EXPECT_GT(rep.robust.coherence_sampled, 0.9);
  EXPECT_GE(rep.robust.coherence_exact, rep.fragile.coherence_exact);

  o.miss_probability = 0.1;
  const auto low = robustness_compare(config(1.0, 0.0), config(1.0, kPi / 2), o);
  // |1 - 2 eta|^n
  EXPECT_NEAR(low.fragile.coherence_exact, std::pow(0.8, 10), 1e-12);
  EXPECT_GT(low.robust.coherence_exact, 0.9);
}

TEST(Robustness, RejectsBadMissProbability) {
  RobustnessOptions o;
  o.miss_probability = 1.0;
  EXPECT_THROW(robustness_row(config(1.0, 0.0), o), InvalidArgument);
}
