#pragma once

#include "base.hpp"

namespace spdeopt {

/// Uniform partition of [0, T] into n_steps intervals.
struct time_grid {
  double horizon = 1.0;
  int n_steps = 1;

  time_grid() = default;
  time_grid(double T, int n) : horizon(T), n_steps(n) {
    require(T > 0.0 && n >= 1, "time_grid: need T > 0 and n_steps >= 1");
  }

  double dt() const { return horizon / n_steps; }
  double t(int j) const { return j * dt(); }
};

/// Uniform node grid on (0,1): nodes xi_i = i*h, i = 0..n_cells, h = 1/n_cells.
struct space_grid_1d {
  int n_cells = 2;

  space_grid_1d() = default;
  explicit space_grid_1d(int n) : n_cells(n) {
    require(n >= 1, "space_grid_1d: need n_cells >= 1");
  }

  double h() const { return 1.0 / n_cells; }
  int n_nodes() const { return n_cells + 1; }
  int n_interior() const { return n_cells - 1; }
  double node(int i) const { return i * h(); }
};

}  // namespace spdeopt
