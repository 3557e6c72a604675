// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#include "mslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mslab/errors.hpp"

namespace mslab::fields {

GridSpec GridSpec::make(const geometry::Domain& domain, int cells_per_axis) {
  domain.validate();
  if (cells_per_axis < 8) {
    throw PreconditionError("grid needs at least 8 cells per axis, got " +
                            std::to_string(cells_per_axis));
  }
  GridSpec g;
  g.dim = domain.dim;
  g.n = {cells_per_axis, domain.dim == 2 ? cells_per_axis : 1};
  g.lower = domain.lower;
  g.h = {domain.extent(0) / cells_per_axis,
         domain.dim == 2 ? domain.extent(1) / cells_per_axis : 1.0};
  return g;
}

Vec2 GridSpec::center(int idx) const {
  const int i = ix(idx);
  const int j = iy(idx);
  Vec2 c{lower[0] + (i + 0.5) * h[0], 0.0};
  if (dim == 2) c.y = lower[1] + (j + 0.5) * h[1];
  return c;
}

bool GridSpec::operator==(const GridSpec& o) const {
  return dim == o.dim && n == o.n && lower == o.lower && h == o.h;
}

Mask whole_mask(const GridSpec& grid) { return Mask(grid.size(), 1); }

Mask side_mask(const GridSpec& grid, const geometry::Interface& iface, geometry::Side side) {
  if (iface.kind() == geometry::Interface::Kind::point) {
    const double faces = (iface.x0() - grid.lower[0]) / grid.h[0];
    if (std::abs(faces - std::round(faces)) > 1e-9) {
      throw PreconditionError("point interface x0 = " + std::to_string(iface.x0()) +
                              " does not lie on a cell face of the grid");
    }
  }
  Mask m(grid.size(), 0);
  for (int k = 0; k < grid.size(); ++k) {
    geometry::Side s = geometry::classify(grid.center(k), iface);
    if (s == geometry::Side::on_interface) s = geometry::Side::side1;
    m[k] = (s == side) ? 1 : 0;
  }
  return m;
}

bool face_connected(const GridSpec& grid, const Mask& mask) {
  const int n = grid.size();
  int start = -1;
  int total = 0;
  for (int k = 0; k < n; ++k) {
    if (mask[k]) {
      ++total;
      if (start < 0) start = k;
    }
  }
  if (start < 0) return false;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int reached = 0;
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    ++reached;
    const int i = grid.ix(k);
    const int j = grid.iy(k);
    const int cand[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& c : cand) {
      if (c[0] < 0 || c[0] >= grid.n[0] || c[1] < 0 || c[1] >= grid.n[1]) continue;
      const int q = grid.index(c[0], c[1]);
      if (mask[q] && !seen[q]) {
        seen[q] = 1;
        stack.push_back(q);
      }
    }
  }
  return reached == total;
}

int ScalarField::count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double ScalarField::sup_norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask[k]) s = std::max(s, std::abs(values[k]));
  }
  return s;
}

double ScalarField::min() const {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask[k]) s = std::min(s, values[k]);
  }
  return s;
}

double ScalarField::max() const {
  double s = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask[k]) s = std::max(s, values[k]);
  }
  return s;
}

double PiecewiseField::at(int idx) const {
  return inner.mask[idx] ? inner.values[idx] : outer.values[idx];
}

double PiecewiseField::sup_norm() const { return std::max(inner.sup_norm(), outer.sup_norm()); }

}  // namespace mslab::fields
