#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "crimelab/discretization.hpp"
#include "crimelab/model.hpp"

namespace crimelab {

/// Limit problem -v'' + v = b on (0, L) with v' = 0 at both ends.
struct SteadyProblem {
  Field b2_inf;
  Grid grid;

  SteadyProblem(Field b, Grid g) : b2_inf(std::move(b)), grid(g) {
    if (b2_inf.size() != grid.n_cells()) throw domain_error("b2_inf length does not match the grid");
    for (double x : b2_inf)
      if (!std::isfinite(x) || x < 0.0) throw domain_error("b2_inf must be finite and nonnegative");
  }
};

/// Samples B(x, t_ref) at cell centers.
template <SpaceTimeSource B>
Field sample_source(const B& b, const Grid& grid, double t = 0.0) {
  Field f(grid.n_cells());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(b(grid.center(i), t));
  return f;
}

/// Discrete v_inf, using the same operator (I - Lap_h) as the implicit v-solve.
inline Field solve_vinfty(const SteadyProblem& problem) {
  return solve_shifted_laplacian(1.0, 1.0, problem.b2_inf, problem.grid);
}

/// max_i |((I - Lap_h) v - b2_inf)_i|
inline double steady_residual(std::span<const double> v, const SteadyProblem& problem) {
  if (v.size() != problem.b2_inf.size()) throw domain_error("field length does not match the problem");
  const Field av = apply_shifted_laplacian(1.0, 1.0, v, problem.grid);
  double r = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) r = std::max(r, std::abs(av[i] - problem.b2_inf[i]));
  return r;
}

}  // namespace crimelab
