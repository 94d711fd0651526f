#include "qolat/entanglement.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qolat/errors.hpp"
#include "qolat/special_functions.hpp"

namespace qolat {

std::string_view to_string(EntropyBase b) { return b == EntropyBase::two ? "2" : "e"; }

std::string_view to_string(EntropyMode m) {
  return m == EntropyMode::orthogonal ? "orthogonal" : "exact_gram";
}

std::string_view to_string(CountDistribution::Family f) {
  switch (f) {
    case CountDistribution::Family::poisson: return "poisson";
    case CountDistribution::Family::skellam: return "skellam";
    case CountDistribution::Family::binomial: return "binomial";
    case CountDistribution::Family::empirical: return "empirical";
  }
  return "?";
}

double base_factor(EntropyBase base) { return base == EntropyBase::two ? 1.0 / std::numbers::ln2 : 1.0; }

double gaussian_entropy(double variance, EntropyBase base) {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidArgument("variance must be positive");
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance) * base_factor(base);
}

namespace {

// Support half-width that leaves negligible tail mass.
int tail_width(double mean) { return static_cast<int>(std::ceil(12.0 * std::sqrt(mean) + 10.0)); }

}  // namespace

CountDistribution CountDistribution::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgument("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return {Family::poisson, DiscreteDistribution::point(0)};
  const int lo = std::max(0, static_cast<int>(std::floor(mean)) - tail_width(mean));
  const int hi = static_cast<int>(std::ceil(mean)) + tail_width(mean);
  DiscreteDistribution d;
  for (int k = lo; k <= hi; ++k) {
    d.support.push_back(k);
    d.probability.push_back(std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0)));
  }
  return {Family::poisson, d.normalized()};
}

CountDistribution CountDistribution::skellam(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgument("Skellam mean must be finite and >= 0");
  if (mean == 0.0) return {Family::skellam, DiscreteDistribution::point(0)};
  const int w = tail_width(mean);
  const auto table = bessel_i_scaled_table(w, mean);
  DiscreteDistribution d;
  for (int k = -w; k <= w; ++k) {
    d.support.push_back(k);
    d.probability.push_back(table[static_cast<std::size_t>(std::abs(k))]);
  }
  return {Family::skellam, d.normalized()};
}

CountDistribution CountDistribution::binomial(int trials, double p) {
  if (trials < 0) throw InvalidArgument("binomial trial count must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("binomial p must lie in [0, 1]");
  if (p == 0.0) return {Family::binomial, DiscreteDistribution::point(0)};
  if (p == 1.0) return {Family::binomial, DiscreteDistribution::point(trials)};
  DiscreteDistribution d;
  const double lc = std::lgamma(trials + 1.0);
  for (int k = 0; k <= trials; ++k) {
    d.support.push_back(k);
    d.probability.push_back(std::exp(lc - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0) +
                                     k * std::log(p) + (trials - k) * std::log1p(-p)));
  }
  return {Family::binomial, d.normalized()};
}

CountDistribution CountDistribution::empirical(DiscreteDistribution d) {
  d.validate(1e-9);
  return {Family::empirical, std::move(d)};
}

double shannon_entropy(const DiscreteDistribution& p, EntropyBase base) {
  if (p.support.size() != p.probability.size()) throw InvalidArgument("support/probability size mismatch");
  double total = 0.0;
  double h = 0.0;
  for (double q : p.probability) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidArgument("probabilities must be finite and >= 0");
    total += q;
    if (q > 0.0) h -= q * std::log(q);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("distribution not normalised (sum=" + std::to_string(total) + ")");
  }
  return std::max(0.0, h) * base_factor(base);
}

double shannon_entropy(const CountDistribution& p, EntropyBase base) {
  return shannon_entropy(p.distribution(), base);
}

LightMatterSuperposition LightMatterSuperposition::from_distribution(const DiscreteDistribution& p,
                                                                     std::complex<double> coupling) {
  LightMatterSuperposition sup;
  sup.coupling = coupling;
  const double s = p.total();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.probability[i] <= 0.0) continue;
    sup.components.push_back({static_cast<double>(p.support[i]), std::sqrt(p.probability[i] / s)});
  }
  return sup;
}

void LightMatterSuperposition::validate() const {
  if (components.empty()) throw InvalidArgument("superposition has no components");
  double s = 0.0;
  for (const auto& c : components) {
    if (!std::isfinite(c.z) || !std::isfinite(std::abs(c.amplitude))) {
      throw InvalidArgument("superposition component is not finite");
    }
    s += std::norm(c.amplitude);
  }
  if (std::abs(s - 1.0) > 1e-12) throw InvalidArgument("superposition weights must sum to 1");
  if (coupling != std::complex<double>(0.0, 0.0)) {
    std::vector<double> zs;
    for (const auto& c : components) zs.push_back(c.z);
    std::sort(zs.begin(), zs.end());
    if (std::adjacent_find(zs.begin(), zs.end()) != zs.end()) {
      throw InvalidArgument("repeated eigenvalue in superposition");
    }
  }
}

std::complex<double> coherent_overlap(std::complex<double> alpha, std::complex<double> beta) {
  return std::exp(-0.5 * std::norm(alpha) - 0.5 * std::norm(beta) + std::conj(alpha) * beta);
}

double light_matter_entropy(const LightMatterSuperposition& sup, EntropyMode mode, EntropyBase base) {
  sup.validate();
  const auto n = static_cast<Eigen::Index>(sup.components.size());
  if (mode == EntropyMode::orthogonal) {
    double h = 0.0;
    for (const auto& c : sup.components) {
      const double w = std::norm(c.amplitude);
      if (w > 0.0) h -= w * std::log(w);
    }
    return std::max(0.0, h) * base_factor(base);
  }

  // Tracing out the matter leaves rho_L = sum_z |c_z|^2 |alpha_z><alpha_z|;
  // its nonzero spectrum is that of W^1/2 G W^1/2.
  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& ca = sup.components[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto& cb = sup.components[static_cast<std::size_t>(b)];
      const auto g = coherent_overlap(sup.coupling * ca.z, sup.coupling * cb.z);
      A(a, b) = std::abs(ca.amplitude) * g * std::abs(cb.amplitude);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");
  double h = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = es.eigenvalues()[k];
    if (lam < 1e-12) continue;
    h -= lam * std::log(lam);
  }
  return std::max(0.0, h) * base_factor(base);
}

CountDistribution squeeze_distribution(const CountDistribution& prior, int counts, double tau) {
  return CountDistribution::empirical(measurement_reweight(prior.distribution(), counts, tau));
}

}  // namespace qolat
