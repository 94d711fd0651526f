#pragma once

#include <vector>

namespace qolat {

// exp(-x) I_n(x) for integer n >= 0, x >= 0.
double bessel_i_scaled(int n, double x);

// exp(-x) I_n(x) for n = 0..max_order in one sweep.
std::vector<double> bessel_i_scaled_table(int max_order, double x);

}  // namespace qolat
