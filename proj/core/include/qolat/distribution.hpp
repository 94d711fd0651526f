#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

namespace qolat {

// Probability mass function on a finite, strictly increasing integer support.
struct DiscreteDistribution {
  std::vector<int> support;
  std::vector<double> probability;

  static DiscreteDistribution from_map(const std::map<int, double>& masses);
  static DiscreteDistribution point(int z);
  // Flat over {lo, ..., hi}.
  static DiscreteDistribution uniform(int lo, int hi);

  // Throws InvalidArgument unless sizes match, support increases strictly,
  // masses are finite and nonnegative, and they sum to 1 within `tolerance`.
  void validate(double tolerance = 1e-12) const;

  std::size_t size() const noexcept { return support.size(); }
  double total() const;
  double mean() const;
  double variance() const;
  double at(int z) const;
  // Support point with the largest mass (the smallest such z on ties).
  int argmax() const;
  DiscreteDistribution normalized() const;
};

// Measurement reweighting shared by photodetection conditioning and the
// squeezing law: P(z) -> |z|^(2m) exp(-tau z^2) P(z) / norm. Evaluated in
// log space. Throws MeasurementInconsistent if nothing survives.
DiscreteDistribution measurement_reweight(const DiscreteDistribution& prior, int counts, double tau);

double total_variation(const DiscreteDistribution& a, const DiscreteDistribution& b);

// P(z_up, z_down) over the illuminated region.
struct JointDistribution {
  std::vector<int> up;
  std::vector<int> down;
  Eigen::MatrixXd probability;  // rows: up, cols: down

  // Marginal of z_up - z_down.
  DiscreteDistribution magnetization() const;
  double total() const { return probability.sum(); }
};

}  // namespace qolat
