#include "qolat/special_functions.hpp"

#include <cmath>

#include "qolat/errors.hpp"

namespace qolat {

namespace {

constexpr double kSeriesLimit = 50.0;

// Power series, summed in log space for the leading term.
double series_term(int n, double x) {
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  const double half = 0.5 * x;
  const double log_lead = n * std::log(half) - std::lgamma(n + 1.0) - x;
  const double q = half * half;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (k * static_cast<double>(n + k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::exp(log_lead) * sum;
}

// Miller backward recurrence normalised by exp(-x)[I_0 + 2 sum I_k] = 1.
std::vector<double> miller(int max_order, double x) {
  const int start = max_order + static_cast<int>(std::ceil(10.0 * std::sqrt(x))) + 20;
  std::vector<double> vals(static_cast<std::size_t>(max_order) + 1, 0.0);
  double above = 0.0;
  double current = 1e-300;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double below = above + (2.0 * k / x) * current;
    above = current;
    current = below;  // now holds order k-1
    if (k - 1 <= max_order) vals[static_cast<std::size_t>(k - 1)] = current;
    norm += (k - 1 == 0) ? current : 2.0 * current;
    if (current > 1e250) {
      const double s = 1e-250;
      above *= s;
      current *= s;
      norm *= s;
      for (double& v : vals) v *= s;
    }
  }
  for (double& v : vals) v /= norm;
  return vals;
}

}  // namespace

std::vector<double> bessel_i_scaled_table(int max_order, double x) {
  if (max_order < 0) throw InvalidArgument("Bessel order must be nonnegative");
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("Bessel argument must be finite and >= 0");
  if (x <= kSeriesLimit) {
    std::vector<double> vals(static_cast<std::size_t>(max_order) + 1);
    for (int n = 0; n <= max_order; ++n) vals[static_cast<std::size_t>(n)] = series_term(n, x);
    return vals;
  }
  return miller(max_order, x);
}

double bessel_i_scaled(int n, double x) {
  if (n < 0) n = -n;
  return bessel_i_scaled_table(n, x).back();
}

}  // namespace qolat
