// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/profile.hpp"

#include <algorithm>

#include "mslab/errors.hpp"

namespace mslab::fields {

namespace {

// Cubic B-spline end effects decay by a factor 2 - sqrt(3) per node; 48
// padding nodes push them below double precision.
constexpr int kPad = 48;

}  // namespace

NeumannProfile::NeumannProfile(const std::vector<double>& cell_values, double a, double b)
    : a_(a), b_(b) {
  const int n = static_cast<int>(cell_values.size());
  if (n < 3 || !(b > a)) throw PreconditionError("profile needs at least 3 cells and b > a");
  const double step = (b - a) / n;
  const int period = 2 * n;
  std::vector<double> ext(n + 2 * kPad);
  for (int m = -kPad; m < n + kPad; ++m) {
    int q = ((m % period) + period) % period;
    if (q >= n) q = period - 1 - q;
    ext[m + kPad] = cell_values[q];
  }
  const double t0 = a + (0.5 - kPad) * step;
  spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(ext.data(), ext.size(),
                                                                        t0, step);
}

}  // namespace mslab::fields
