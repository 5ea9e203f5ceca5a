#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <concepts>
#include <span>
#include <string>

#include "crimelab/errors.hpp"
#include "crimelab/model.hpp"

namespace crimelab {

/// Anything that can be evaluated as B(x, t).
template <class S>
concept SpaceTimeSource = requires(const S& s, double x, double t) {
  { s(x, t) } -> std::convertible_to<double>;
};

/// How u/v is reconstructed on a face for the taxis flux.
enum class FaceAverage { arithmetic, upwind };

inline const char* to_string(FaceAverage mode) {
  return mode == FaceAverage::upwind ? "upwind" : "arithmetic";
}

/// Neumann-closed discrete Laplacian. Boundary cells mirror their own value
/// into the ghost cell, so the boundary face carries zero flux.
inline Field laplacian(std::span<const double> f, const Grid& grid) {
  const std::size_t n = grid.n_cells();
  assert(f.size() == n);
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  Field out(n);
  out[0] = (f[1] - f[0]) * inv_h2;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_h2;
  out[n - 1] = (f[n - 2] - f[n - 1]) * inv_h2;
  return out;
}

namespace detail {

inline void require_positive_v(std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0)) throw positivity_error("v <= 0 in cell " + std::to_string(i) + " during taxis evaluation");
}

// Face reconstruction of u/v and 1/v on interior face i+1/2.
struct FaceWeights {
  double u_over_v;
  double inv_v;
};

inline FaceWeights face_weights(std::span<const double> u, std::span<const double> v, std::size_t i,
                                FaceAverage mode) {
  if (mode == FaceAverage::arithmetic) {
    return {0.5 * (u[i] / v[i] + u[i + 1] / v[i + 1]), 0.5 * (1.0 / v[i] + 1.0 / v[i + 1])};
  }
  // Transport runs up the gradient of v, so the donor sits on the low side.
  const std::size_t donor = v[i + 1] >= v[i] ? i : i + 1;
  return {u[donor] / v[donor], 1.0 / v[donor]};
}

}  // namespace detail

/// Taxis flux chi (u/v) v_x on all n+1 faces; the two boundary faces are exactly zero.
inline Field taxis_fluxes(std::span<const double> u, std::span<const double> v, double chi, const Grid& grid,
                          FaceAverage mode = FaceAverage::arithmetic) {
  const std::size_t n = grid.n_cells();
  assert(u.size() == n && v.size() == n);
  detail::require_positive_v(v);
  const double inv_h = 1.0 / grid.h();
  Field flux(n + 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double grad = (v[i + 1] - v[i]) * inv_h;
    flux[i + 1] = chi * detail::face_weights(u, v, i, mode).u_over_v * grad;
  }
  return flux;
}

/// Explicitly treated parts of the right-hand side.
///   u: -(F_{i+1/2} - F_{i-1/2})/h - u v + B1
///   v: u v + B2
struct ExplicitTerms {
  Field u;
  Field v;
  double max_wave_speed = 0.0;
};

template <SpaceTimeSource B1, SpaceTimeSource B2>
ExplicitTerms explicit_terms(const State& s, double chi, const B1& b1, const B2& b2, const Grid& grid,
                             FaceAverage mode) {
  const std::size_t n = grid.n_cells();
  assert(s.u.size() == n && s.v.size() == n);
  detail::require_positive_v(s.v);
  const double inv_h = 1.0 / grid.h();

  ExplicitTerms out;
  out.u.assign(n, 0.0);
  out.v.assign(n, 0.0);

  double flux_left = 0.0;
  double speed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double flux_right = 0.0;
    if (i + 1 < n) {
      const double grad = (s.v[i + 1] - s.v[i]) * inv_h;
      const auto w = detail::face_weights(s.u, s.v, i, mode);
      flux_right = chi * w.u_over_v * grad;
      speed = std::max(speed, chi * w.inv_v * std::abs(grad));
    }
    const double x = grid.center(i);
    const double uv = s.u[i] * s.v[i];
    out.u[i] = -(flux_right - flux_left) * inv_h - uv + static_cast<double>(b1(x, s.t));
    out.v[i] = uv + static_cast<double>(b2(x, s.t));
    flux_left = flux_right;
  }
  out.max_wave_speed = speed;
  return out;
}

struct RhsEval {
  Field du_dt;
  Field dv_dt;
  /// Largest face transport speed chi |v_x| / v, used for the CFL cap.
  double max_wave_speed = 0.0;
};

/// Semi-discrete right-hand side of the full system.
template <SpaceTimeSource B1, SpaceTimeSource B2>
RhsEval rhs(const State& s, const ModelParams& params, const B1& b1, const B2& b2, const Grid& grid,
            FaceAverage mode = FaceAverage::arithmetic) {
  auto ex = explicit_terms(s, params.chi, b1, b2, grid, mode);
  const Field lu = laplacian(s.u, grid);
  const Field lv = laplacian(s.v, grid);
  RhsEval out;
  out.du_dt = std::move(ex.u);
  out.dv_dt = std::move(ex.v);
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    out.du_dt[i] += lu[i];
    out.dv_dt[i] += lv[i] - s.v[i];
  }
  out.max_wave_speed = ex.max_wave_speed;
  return out;
}

/// Solves (a I - c Lap_h) x = r with the Neumann closure of laplacian().
/// The matrix is a strictly diagonally dominant M-matrix for a > 0, c >= 0.
inline Field solve_shifted_laplacian(double a, double c, std::span<const double> r, const Grid& grid) {
  const std::size_t n = grid.n_cells();
  assert(r.size() == n);
  assert(a > 0.0 && c >= 0.0);
  const double k = c / (grid.h() * grid.h());

  // Thomas algorithm; sub- and super-diagonals are all -k.
  Field cprime(n);
  Field x(n);
  double diag = a + k;
  cprime[0] = -k / diag;
  x[0] = r[0] / diag;
  for (std::size_t i = 1; i < n; ++i) {
    diag = (i + 1 < n ? a + 2.0 * k : a + k) + k * cprime[i - 1];
    assert(diag > 0.0);
    cprime[i] = -k / diag;
    x[i] = (r[i] + k * x[i - 1]) / diag;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime[i] * x[i + 1];
  return x;
}

/// Applies (a I - c Lap_h) to f.
inline Field apply_shifted_laplacian(double a, double c, std::span<const double> f, const Grid& grid) {
  Field out = laplacian(f, grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * f[i] - c * out[i];
  return out;
}

}  // namespace crimelab
