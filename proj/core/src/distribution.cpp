#include "qolat/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qolat/errors.hpp"

namespace qolat {

DiscreteDistribution DiscreteDistribution::from_map(const std::map<int, double>& masses) {
  DiscreteDistribution d;
  d.support.reserve(masses.size());
  d.probability.reserve(masses.size());
  for (auto [z, p] : masses) {
    d.support.push_back(z);
    d.probability.push_back(p);
  }
  return d;
}

DiscreteDistribution DiscreteDistribution::point(int z) {
  return DiscreteDistribution{{z}, {1.0}};
}

DiscreteDistribution DiscreteDistribution::uniform(int lo, int hi) {
  if (hi < lo) throw InvalidArgument("uniform distribution needs lo <= hi");
  DiscreteDistribution d;
  const double p = 1.0 / (hi - lo + 1);
  for (int z = lo; z <= hi; ++z) {
    d.support.push_back(z);
    d.probability.push_back(p);
  }
  return d;
}

void DiscreteDistribution::validate(double tolerance) const {
  if (support.size() != probability.size()) throw InvalidArgument("support/probability size mismatch");
  if (support.empty()) throw InvalidArgument("empty distribution");
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (support[i] <= support[i - 1]) throw InvalidArgument("support must increase strictly");
  }
  for (double p : probability) {
    if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("probabilities must be finite and nonnegative");
  }
  const double s = total();
  if (std::abs(s - 1.0) > tolerance) {
    throw InvalidArgument("distribution not normalised (sum=" + std::to_string(s) + ")");
  }
}

double DiscreteDistribution::total() const {
  double s = 0.0;
  for (double p : probability) s += p;
  return s;
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += support[i] * probability[i];
  return m / total();
}

double DiscreteDistribution::variance() const {
  const double mu = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double dz = support[i] - mu;
    v += dz * dz * probability[i];
  }
  return v / total();
}

double DiscreteDistribution::at(int z) const {
  auto it = std::lower_bound(support.begin(), support.end(), z);
  if (it == support.end() || *it != z) return 0.0;
  return probability[static_cast<std::size_t>(it - support.begin())];
}

int DiscreteDistribution::argmax() const {
  if (support.empty()) throw InvalidArgument("empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < size(); ++i) {
    if (probability[i] > probability[best]) best = i;
  }
  return support[best];
}

DiscreteDistribution DiscreteDistribution::normalized() const {
  const double s = total();
  if (!(s > 0.0)) throw NumericError("cannot normalise a distribution with zero mass");
  DiscreteDistribution out = *this;
  for (double& p : out.probability) p /= s;
  return out;
}

DiscreteDistribution measurement_reweight(const DiscreteDistribution& prior, int counts, double tau) {
  if (counts < 0) throw InvalidArgument("photocount must be nonnegative");
  if (!(tau >= 0.0)) throw InvalidArgument("scaled time must be nonnegative");
  if (prior.support.size() != prior.probability.size()) {
    throw InvalidArgument("support/probability size mismatch");
  }
  if (counts == 0 && tau == 0.0) return prior.normalized();

  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> logw(prior.size(), neg_inf);
  double top = neg_inf;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const double p = prior.probability[i];
    const double z = prior.support[i];
    if (!(p > 0.0)) continue;
    if (z == 0.0 && counts > 0) continue;
    double lw = std::log(p) - tau * z * z;
    if (counts > 0) lw += 2.0 * counts * std::log(std::abs(z));
    logw[i] = lw;
    top = std::max(top, lw);
  }
  if (top == neg_inf) throw MeasurementInconsistent();

  DiscreteDistribution out;
  out.support = prior.support;
  out.probability.resize(prior.size());
  double s = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    out.probability[i] = logw[i] == neg_inf ? 0.0 : std::exp(logw[i] - top);
    s += out.probability[i];
  }
  for (double& p : out.probability) p /= s;
  return out;
}

double total_variation(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  std::map<int, double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) diff[a.support[i]] += a.probability[i];
  for (std::size_t i = 0; i < b.size(); ++i) diff[b.support[i]] -= b.probability[i];
  double tv = 0.0;
  for (auto [z, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

DiscreteDistribution JointDistribution::magnetization() const {
  std::map<int, double> masses;
  for (std::size_t i = 0; i < up.size(); ++i) {
    for (std::size_t j = 0; j < down.size(); ++j) {
      masses[up[i] - down[j]] +=
          probability(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return DiscreteDistribution::from_map(masses);
}

}  // namespace qolat
