#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "crimelab/diagnostics.hpp"
#include "crimelab/discretization.hpp"
#include "crimelab/errors.hpp"
#include "crimelab/model.hpp"

namespace crimelab {

struct StepController {
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 0.05;
  double rel_tol = 1e-4;
  double abs_tol = 1e-8;
  double safety = 0.9;
  double cfl_fraction = 0.5;

  void validate() const {
    if (!(dt_min > 0.0) || !(dt_min <= dt_init) || !(dt_init <= dt_max))
      throw domain_error("step controller needs 0 < dt_min <= dt_init <= dt_max");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw domain_error("tolerances must be positive");
    if (!(safety > 0.0) || !(safety <= 1.0)) throw domain_error("safety factor must lie in (0, 1]");
    if (!(cfl_fraction > 0.0) || !(cfl_fraction <= 1.0)) throw domain_error("cfl_fraction must lie in (0, 1]");
  }

  friend bool operator==(const StepController&, const StepController&) = default;
};

enum class RunStatus { completed, dt_underflow, positivity_failure };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::dt_underflow: return "dt_underflow";
    case RunStatus::positivity_failure: return "positivity_failure";
  }
  return "?";
}

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected_error = 0;
  std::size_t rejected_positivity = 0;
  double min_dt = std::numeric_limits<double>::infinity();
  double max_dt = 0.0;
};

struct Trajectory {
  std::vector<State> states;
  std::vector<DiagnosticsRow> rows;
  RunStatus status = RunStatus::completed;
  StepStats stats;
  std::string message;
};

/// One backward-Euler IMEX step. Diffusion and the linear decay -v are
/// implicit (two tridiagonal solves); taxis and the remaining reaction and
/// source terms are frozen at t. Validity of the result is not checked.
template <SpaceTimeSource B1, SpaceTimeSource B2>
State step_imex(const State& s, double dt, const ModelParams& params, const B1& b1, const B2& b2, const Grid& grid,
                FaceAverage mode = FaceAverage::arithmetic) {
  if (!(dt > 0.0)) throw domain_error("step size must be positive");
  const auto ex = explicit_terms(s, params.chi, b1, b2, grid, mode);
  const std::size_t n = grid.n_cells();
  Field ru(n);
  Field rv(n);
  for (std::size_t i = 0; i < n; ++i) {
    ru[i] = s.u[i] + dt * ex.u[i];
    rv[i] = s.v[i] + dt * ex.v[i];
  }
  State out;
  out.t = s.t + dt;
  out.u = solve_shifted_laplacian(1.0, dt, ru, grid);
  out.v = solve_shifted_laplacian(1.0 + dt, dt, rv, grid);
  return out;
}

/// Step-doubling: one step of dt against two of dt/2.
struct DoubledStep {
  State half;          // two half steps
  State extrapolated;  // 2 half - full, second order
  double error = 0.0;  // weighted max-norm of half - full
};

template <SpaceTimeSource B1, SpaceTimeSource B2>
DoubledStep step_doubled(const State& s, double dt, const ModelParams& params, const B1& b1, const B2& b2,
                         const Grid& grid, FaceAverage mode, double rel_tol, double abs_tol) {
  const State full = step_imex(s, dt, params, b1, b2, grid, mode);
  const State mid = step_imex(s, 0.5 * dt, params, b1, b2, grid, mode);
  DoubledStep out;
  // The midpoint can already have lost positivity; the second half-step
  // would then throw, so surface it as a failed candidate instead.
  for (double v : mid.v)
    if (!(v > 0.0)) {
      out.half = mid;
      out.extrapolated = mid;
      out.extrapolated.t = s.t + dt;
      out.error = std::numeric_limits<double>::infinity();
      return out;
    }
  out.half = step_imex(mid, 0.5 * dt, params, b1, b2, grid, mode);
  out.half.t = s.t + dt;
  out.extrapolated.t = s.t + dt;
  const std::size_t n = grid.n_cells();
  out.extrapolated.u.resize(n);
  out.extrapolated.v.resize(n);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = out.half.u[i] - full.u[i];
    const double dv = out.half.v[i] - full.v[i];
    out.extrapolated.u[i] = out.half.u[i] + du;
    out.extrapolated.v[i] = out.half.v[i] + dv;
    const double su = abs_tol + rel_tol * std::max(std::abs(out.half.u[i]), std::abs(s.u[i]));
    const double sv = abs_tol + rel_tol * std::max(std::abs(out.half.v[i]), std::abs(s.v[i]));
    err = std::max({err, std::abs(du) / su, std::abs(dv) / sv});
  }
  out.error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  return out;
}

template <SpaceTimeSource B1, SpaceTimeSource B2>
State step_extrapolated(const State& s, double dt, const ModelParams& params, const B1& b1, const B2& b2,
                        const Grid& grid, FaceAverage mode = FaceAverage::arithmetic) {
  return step_doubled(s, dt, params, b1, b2, grid, mode, 1.0, 1.0).extrapolated;
}

/// Largest face transport speed chi |v_x| / v of a state.
inline double max_wave_speed(const State& s, double chi, const Grid& grid, FaceAverage mode) {
  double speed = 0.0;
  const double inv_h = 1.0 / grid.h();
  for (std::size_t i = 0; i + 1 < grid.n_cells(); ++i) {
    const double grad = std::abs(s.v[i + 1] - s.v[i]) * inv_h;
    speed = std::max(speed, chi * detail::face_weights(s.u, s.v, i, mode).inv_v * grad);
  }
  return speed;
}

/// Candidate acceptance test: v > 0 everywhere and u >= -1e-12 max u.
inline bool admissible_candidate(const State& s) {
  double max_u = 0.0;
  double min_u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    if (!(s.v[i] > 0.0) || !std::isfinite(s.v[i]) || !std::isfinite(s.u[i])) return false;
    max_u = std::max(max_u, s.u[i]);
    min_u = std::min(min_u, s.u[i]);
  }
  return min_u >= -1e-12 * max_u;
}

struct AdvanceOptions {
  /// Spacing of recorded samples; 0 records only the start and the end.
  double output_interval = 0.0;
  FaceAverage face = FaceAverage::arithmetic;
  DiagnosticsConfig diagnostics{};
  /// Called after every accepted step with the states before and after.
  std::function<void(const State&, const State&)> on_accept;
};

/// Adaptive integration from s.t to t_end.
///
/// Each attempt takes a doubled step; the attempt is accepted when the
/// step-doubling error is within tolerance and the extrapolated candidate is
/// admissible. The step is capped by cfl_fraction h / max_wave_speed and
/// shortened to land exactly on output times. Rejections halve dt; on
/// acceptance dt grows by at most 2x. Falling below dt_min ends the run with
/// the last accepted state recorded.
template <SpaceTimeSource B1, SpaceTimeSource B2>
Trajectory advance(const State& initial, double t_end, const StepController& ctl, const ModelParams& params,
                   const B1& b1, const B2& b2, const Grid& grid, const AdvanceOptions& opt = {}) {
  ctl.validate();
  check_state(initial, grid.n_cells());
  if (!(t_end >= initial.t)) throw domain_error("t_end must not precede the initial time");

  Trajectory traj;
  const auto record = [&](const State& s) {
    traj.rows.push_back(diagnostics_row(s, grid, opt.diagnostics, params.chi));
    traj.states.push_back(s);
  };
  record(initial);
  if (t_end == initial.t) return traj;

  const double t0 = initial.t;
  std::size_t n_outputs = 1;
  if (opt.output_interval > 0.0)
    n_outputs = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::ceil(
                                             (t_end - t0) / opt.output_interval - 1e-9))));
  const auto output_time = [&](std::size_t k) {
    return k >= n_outputs ? t_end : std::min(t_end, t0 + static_cast<double>(k) * opt.output_interval);
  };

  State s = initial;
  std::size_t next = 1;
  double dt = std::clamp(ctl.dt_init, ctl.dt_min, ctl.dt_max);
  double speed = max_wave_speed(s, params.chi, grid, opt.face);
  bool last_reject_positivity = false;

  while (next <= n_outputs) {
    const double target = output_time(next);
    double dt_try = std::min(dt, ctl.dt_max);
    if (speed > 0.0) dt_try = std::min(dt_try, ctl.cfl_fraction * grid.h() / speed);
    bool landing = false;
    if (s.t + dt_try >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      dt_try = target - s.t;
      landing = true;
    }

    DoubledStep step = step_doubled(s, dt_try, params, b1, b2, grid, opt.face, ctl.rel_tol, ctl.abs_tol);
    const bool admissible = admissible_candidate(step.extrapolated);
    if (!admissible || !(step.error <= 1.0)) {
      if (!admissible)
        ++traj.stats.rejected_positivity;
      else
        ++traj.stats.rejected_error;
      last_reject_positivity = !admissible;
      dt = 0.5 * dt_try;
      if (dt < ctl.dt_min) {
        traj.status = last_reject_positivity ? RunStatus::positivity_failure : RunStatus::dt_underflow;
        traj.message = "step size fell below dt_min at t = " + std::to_string(s.t);
        if (s.t > traj.states.back().t) record(s);
        return traj;
      }
      continue;
    }

    State accepted = std::move(step.extrapolated);
    for (double& u : accepted.u) u = std::max(u, 0.0);
    accepted.t = landing ? target : s.t + dt_try;
    if (opt.on_accept) opt.on_accept(s, accepted);
    s = std::move(accepted);

    ++traj.stats.accepted;
    traj.stats.min_dt = std::min(traj.stats.min_dt, dt_try);
    traj.stats.max_dt = std::max(traj.stats.max_dt, dt_try);

    const double factor =
        step.error > 0.0 ? std::clamp(ctl.safety / std::sqrt(step.error), 0.2, 2.0) : 2.0;
    double proposal = dt_try * factor;
    // A step shortened only to hit an output time should not throttle the next one.
    if (landing && dt_try < dt) proposal = std::max(proposal, dt * std::min(1.0, factor));
    dt = std::clamp(proposal, ctl.dt_min, ctl.dt_max);
    speed = max_wave_speed(s, params.chi, grid, opt.face);

    if (landing) {
      record(s);
      ++next;
    }
  }
  return traj;
}

}  // namespace crimelab
