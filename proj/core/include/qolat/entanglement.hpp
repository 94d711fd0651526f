#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include "qolat/distribution.hpp"

namespace qolat {

enum class EntropyBase { two, e };

std::string_view to_string(EntropyBase b);

// 1/ln(base): multiply a natural-log entropy by this.
double base_factor(EntropyBase base);

// Differential entropy of a Gaussian, 1/2 log(2 pi e sigma^2).
double gaussian_entropy(double variance, EntropyBase base = EntropyBase::two);

// Integer-valued count distribution. Parametric families are tabulated on
// construction; `distribution` is normalised on its support.
class CountDistribution {
 public:
  enum class Family { poisson, skellam, binomial, empirical };

  static CountDistribution poisson(double mean);
  // Difference of two independent Poissons, each with mean `mean`/2, so the
  // variance equals `mean`.
  static CountDistribution skellam(double mean);
  static CountDistribution binomial(int trials, double p);
  static CountDistribution empirical(DiscreteDistribution d);

  Family family() const noexcept { return family_; }
  const DiscreteDistribution& distribution() const noexcept { return dist_; }
  double mean() const { return dist_.mean(); }
  double variance() const { return dist_.variance(); }

 private:
  CountDistribution(Family f, DiscreteDistribution d) : family_(f), dist_(std::move(d)) {}
  Family family_;
  DiscreteDistribution dist_;
};

std::string_view to_string(CountDistribution::Family f);

// -sum p log p; throws if the total mass is off by more than 1e-9.
double shannon_entropy(const DiscreteDistribution& p, EntropyBase base = EntropyBase::two);
double shannon_entropy(const CountDistribution& p, EntropyBase base = EntropyBase::two);

struct LightMatterSuperposition {
  struct Component {
    double z = 0.0;
    std::complex<double> amplitude{0.0, 0.0};
  };
  std::vector<Component> components;
  std::complex<double> coupling{1.0, 0.0};  // alpha_z = C z

  // Equal-phase superposition with |c_z|^2 = P(z).
  static LightMatterSuperposition from_distribution(const DiscreteDistribution& p,
                                                    std::complex<double> coupling);
  void validate() const;
};

enum class EntropyMode { orthogonal, exact_gram };

std::string_view to_string(EntropyMode m);

// <alpha|beta> for coherent states.
std::complex<double> coherent_overlap(std::complex<double> alpha, std::complex<double> beta);

double light_matter_entropy(const LightMatterSuperposition& sup, EntropyMode mode,
                            EntropyBase base = EntropyBase::two);

// P(z) |z|^(2m) exp(-tau z^2) / norm.
CountDistribution squeeze_distribution(const CountDistribution& prior, int counts, double tau);

}  // namespace qolat
