// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <vector>

namespace mslab::fields {

/// C2 interpolant of cell-centered samples on [a, b] that honours a zero
/// derivative at both ends. The samples are reflected evenly across a and b
/// (the ghost-cell picture of the Neumann solver), which makes the extended
/// data periodic; a cardinal cubic B-spline is fitted on a padded window so
/// the end conditions of the spline itself sit far outside [a, b].
class NeumannProfile {
 public:
  NeumannProfile() = default;
  NeumannProfile(const std::vector<double>& cell_values, double a, double b);

  double value(double t) const { return spline_(t); }
  double d1(double t) const { return spline_.prime(t); }
  double d2(double t) const { return spline_.double_prime(t); }
  double lower() const { return a_; }
  double upper() const { return b_; }

 private:
  double a_ = 0.0;
  double b_ = 1.0;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

}  // namespace mslab::fields
