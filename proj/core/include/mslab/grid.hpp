// Copyright 2026 The mslab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mslab/geometry.hpp"
#include "mslab/vec.hpp"

namespace mslab::fields {

/// Uniform cell-centered grid on the domain box. Cell (i, j) has center
/// lower + (i + 1/2) h on each axis; linear index i + n[0] * j.
struct GridSpec {
  int dim = 1;
  std::array<int, 2> n{0, 1};
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> h{1.0, 1.0};

  /// N cells on every axis of the domain; N >= 8.
  static GridSpec make(const geometry::Domain& domain, int cells_per_axis);

  int size() const { return n[0] * n[1]; }
  int index(int i, int j = 0) const { return i + n[0] * j; }
  int ix(int idx) const { return idx % n[0]; }
  int iy(int idx) const { return idx / n[0]; }
  Vec2 center(int idx) const;
  /// Volume of one cell, h^dim.
  double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }
  int max_cells() const { return dim == 1 ? n[0] : std::max(n[0], n[1]); }
  bool operator==(const GridSpec& o) const;
};

using Mask = std::vector<std::uint8_t>;

Mask whole_mask(const GridSpec& grid);

/// Cells whose center lies on the requested side. Centers classified as on
/// the interface are assigned to side1. A point interface must sit on a cell
/// face; otherwise PreconditionError.
Mask side_mask(const GridSpec& grid, const geometry::Interface& iface, geometry::Side side);

/// True when the masked cells form one face-connected component.
bool face_connected(const GridSpec& grid, const Mask& mask);

/// Scalar values on the masked cells of a grid. Unmasked entries hold NaN.
/// A field restricted to one side remembers the interface so that sampling
/// can refuse points from the other side.
struct ScalarField {
  GridSpec grid;
  Mask mask;
  std::vector<double> values;
  std::optional<geometry::Interface> iface;
  geometry::Side side = geometry::Side::on_interface;

  int count() const;
  double sup_norm() const;
  double min() const;
  double max() const;
};

/// A candidate whose jump set is contained in Gamma.
struct PiecewiseField {
  ScalarField inner;  // side1
  ScalarField outer;  // side2
  geometry::Interface iface;

  const ScalarField& piece(int i) const { return i == 0 ? inner : outer; }
  ScalarField& piece(int i) { return i == 0 ? inner : outer; }
  /// Value at cell idx from whichever piece owns it.
  double at(int idx) const;
  double sup_norm() const;
};

/// Fills a field on the given mask from a pointwise function of the center.
template <class F>
ScalarField make_field(const GridSpec& grid, Mask mask, F&& f) {
  ScalarField out;
  out.grid = grid;
  out.values.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < grid.size(); ++k) {
    if (mask[k]) out.values[k] = f(grid.center(k), k);
  }
  out.mask = std::move(mask);
  return out;
}

}  // namespace mslab::fields
