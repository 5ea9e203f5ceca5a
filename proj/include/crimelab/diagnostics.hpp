#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crimelab/errors.hpp"
#include "crimelab/exponents.hpp"
#include "crimelab/model.hpp"

namespace crimelab {

/// Exponents and norms evaluated for every recorded sample.
struct DiagnosticsConfig {
  double p = 0.5;
  double q = 0.5;
  double gamma_u = 0.3;
  double gamma_v = 0.25;
  std::vector<double> r_list{2.0, 4.0, 8.0};

  /// Admissible defaults for a given chi: p halfway into (0, min{1, 1/chi^2}),
  /// q at the center of its window, gamma_u = min(0.3, 0.9/(1 + 2 chi^2)).
  static DiagnosticsConfig defaults_for(double chi) {
    DiagnosticsConfig c;
    c.p = 0.5 * exponents::p_star(chi);
    const auto w = exponents::q_window(c.p, chi);
    c.q = 0.5 * (w.q_minus + w.q_plus);
    c.gamma_u = default_gamma_u(chi);
    c.gamma_v = 0.25;
    return c;
  }

  static double default_gamma_u(double chi) { return std::min(0.3, 0.9 / (1.0 + 2.0 * chi * chi)); }
};

struct DiagnosticsRow {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double int_uv = 0.0;
  double sup_u = 0.0;
  double sup_v = 0.0;
  double min_v = 0.0;
  std::vector<double> lr_norms;  // ||v||_{L^r}, one per configured r
  double entropy = 0.0;          // h sum u^p v^q
  double diss_u = 0.0;           // h sum u^{p-2} v^q u_x^2
  double diss_v = 0.0;           // h sum u^p v^{q-2} v_x^2
  double holder_u = 0.0;
  double holder_v = 0.0;
  bool exponents_admissible = true;
};

/// Discrete C^gamma seminorm: max_{i != j} |f_i - f_j| / |x_i - x_j|^gamma.
inline double holder_seminorm(std::span<const double> f, double gamma, const Grid& grid) {
  if (!(gamma > 0.0) || gamma > 1.0) throw domain_error("holder exponent must lie in (0, 1]");
  const std::size_t n = f.size();
  const double h = grid.h();
  // |x_i - x_j|^gamma depends only on the index distance.
  std::vector<double> inv_dist(n, 0.0);
  for (std::size_t d = 1; d < n; ++d) inv_dist[d] = 1.0 / std::pow(static_cast<double>(d) * h, gamma);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, std::abs(f[i] - f[j]) * inv_dist[j - i]);
  return best;
}

inline DiagnosticsRow diagnostics_row(const State& s, const Grid& grid, const DiagnosticsConfig& cfg) {
  const std::size_t n = grid.n_cells();
  if (s.u.size() != n || s.v.size() != n) throw domain_error("state does not match the grid");
  constexpr double kFloor = 1e-300;
  const double h = grid.h();
  const double p = cfg.p;
  const double q = cfg.q;

  DiagnosticsRow row;
  row.t = s.t;
  row.sup_u = -std::numeric_limits<double>::infinity();
  row.sup_v = -std::numeric_limits<double>::infinity();
  row.min_v = std::numeric_limits<double>::infinity();
  row.lr_norms.assign(cfg.r_list.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s.u[i];
    const double v = s.v[i];
    row.mass_u += u;
    row.mass_v += v;
    row.int_uv += u * v;
    row.sup_u = std::max(row.sup_u, u);
    row.sup_v = std::max(row.sup_v, v);
    row.min_v = std::min(row.min_v, v);
    row.entropy += std::pow(std::max(u, 0.0), p) * std::pow(v, q);
    for (std::size_t k = 0; k < cfg.r_list.size(); ++k) row.lr_norms[k] += std::pow(std::abs(v), cfg.r_list[k]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double ux = (s.u[i + 1] - s.u[i]) / h;
    const double vx = (s.v[i + 1] - s.v[i]) / h;
    const double uf = std::max(0.5 * (s.u[i] + s.u[i + 1]), kFloor);
    const double vf = 0.5 * (s.v[i] + s.v[i + 1]);
    if (ux != 0.0) row.diss_u += std::pow(uf, p - 2.0) * std::pow(vf, q) * ux * ux;
    if (vx != 0.0) row.diss_v += std::pow(uf, p) * std::pow(vf, q - 2.0) * vx * vx;
  }
  row.mass_u *= h;
  row.mass_v *= h;
  row.int_uv *= h;
  row.entropy *= h;
  row.diss_u *= h;
  row.diss_v *= h;
  for (std::size_t k = 0; k < cfg.r_list.size(); ++k)
    row.lr_norms[k] = std::pow(h * row.lr_norms[k], 1.0 / cfg.r_list[k]);
  row.holder_u = holder_seminorm(s.u, cfg.gamma_u, grid);
  row.holder_v = holder_seminorm(s.v, cfg.gamma_v, grid);
  return row;
}

/// Same as above, additionally flagging (p, q) outside the admissible window for chi.
inline DiagnosticsRow diagnostics_row(const State& s, const Grid& grid, const DiagnosticsConfig& cfg, double chi) {
  DiagnosticsRow row = diagnostics_row(s, grid, cfg);
  try {
    row.exponents_admissible = exponents::q_window(cfg.p, chi).contains(cfg.q);
  } catch (const domain_error&) {
    row.exponents_admissible = false;
  }
  return row;
}

/// Trapezoidal integral of a sampled series over [t, t + tau]. The window
/// end points are linearly interpolated between samples.
inline double window_integral(std::span<const double> times, std::span<const double> values, double t, double tau) {
  if (times.size() != values.size()) throw alignment_error("times and values differ in length");
  if (times.size() < 2) throw coverage_error("need at least two samples");
  if (!(tau >= 0.0)) throw domain_error("window length must be nonnegative");
  const double a = t;
  const double b = t + tau;
  const double slack = 1e-12 * std::max(1.0, std::abs(b));
  if (a < times.front() - slack || b > times.back() + slack)
    throw coverage_error("series covers [" + std::to_string(times.front()) + ", " + std::to_string(times.back()) +
                         "] but the window is [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  const auto interp = [&](double s) {
    if (s <= times.front()) return values.front();
    if (s >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double w = (s - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - w) * values[k - 1] + w * values[k];
  };
  double sum = 0.0;
  double s_prev = a;
  double f_prev = interp(a);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] <= a) continue;
    if (times[k] >= b) break;
    sum += 0.5 * (f_prev + values[k]) * (times[k] - s_prev);
    s_prev = times[k];
    f_prev = values[k];
  }
  sum += 0.5 * (f_prev + interp(b)) * (b - s_prev);
  return sum;
}

enum class DecayVerdict { decays, no_decay, not_applicable };

inline const char* to_string(DecayVerdict v) {
  switch (v) {
    case DecayVerdict::decays: return "decays";
    case DecayVerdict::no_decay: return "no_decay";
    case DecayVerdict::not_applicable: return "not_applicable";
  }
  return "?";
}

struct OdeBoundOptions {
  /// Absolute slack on the bound and, per unit time, on the integrated inequality.
  double slack = 1e-6;
  /// Relative slack on the integrated inequality, covering trapezoid quadrature error.
  double rel_slack = 1e-3;
  /// Threshold for "small" in the decay variant (unit window of h and final y).
  double decay_threshold = 1e-6;
};

/// Checks a sampled pair (y, h) against the linear differential inequality
/// y' + a y <= h and its consequences:
///   bound:  y(t) <= y(0) + b tau / (1 - e^{-a tau}),  b = sup_t (1/tau) int_t^{t+tau} h
///   decay:  unit-window integrals of h small  =>  y small at the end
struct OdeBoundReport {
  double b = 0.0;
  double bound = 0.0;
  double max_y = 0.0;
  bool bound_holds = true;
  /// Integrated form y_{k+1} - y_k + a int y <= int h on every sample interval.
  bool inequality_holds = true;
  double worst_inequality_excess = 0.0;
  double final_window_h = 0.0;
  double final_y = 0.0;
  DecayVerdict decay = DecayVerdict::not_applicable;

  bool violation() const { return !bound_holds || !inequality_holds; }
};

inline OdeBoundReport ode_bound_check(std::span<const double> times, std::span<const double> y,
                                      std::span<const double> h, double a, double tau, OdeBoundOptions opt = {}) {
  if (times.size() != y.size() || times.size() != h.size())
    throw alignment_error("time, y and h series must have equal length");
  if (!(a > 0.0) || !(tau > 0.0)) throw domain_error("ode_bound_check needs a > 0 and tau > 0");
  if (times.size() < 2) throw coverage_error("need at least two samples");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw alignment_error("sample times must be strictly increasing");
  const double t0 = times.front();
  const double t1 = times.back();
  if (t1 - t0 < tau) throw coverage_error("series is shorter than one window");

  OdeBoundReport rep;
  // b: sup over window starts at recorded times that leave a full window.
  rep.b = 0.0;
  for (std::size_t k = 0; k < times.size() && times[k] + tau <= t1 + 1e-12; ++k)
    rep.b = std::max(rep.b, window_integral(times, h, times[k], tau) / tau);
  rep.bound = y.front() + rep.b * tau / (1.0 - std::exp(-a * tau));
  rep.max_y = *std::max_element(y.begin(), y.end());
  rep.bound_holds = rep.max_y <= rep.bound + opt.slack;

  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    const double lhs = y[k + 1] - y[k] + a * 0.5 * (y[k] + y[k + 1]) * dt;
    const double rhs = 0.5 * (h[k] + h[k + 1]) * dt;
    const double excess = lhs - rhs;
    rep.worst_inequality_excess = std::max(rep.worst_inequality_excess, excess);
    const double allowance = opt.slack * dt + opt.rel_slack * (std::abs(y[k + 1] - y[k]) + a * 0.5 * (y[k] + y[k + 1]) * dt);
    if (excess > allowance) rep.inequality_holds = false;
  }

  rep.final_y = y.back();
  if (t1 - t0 >= 1.0) {
    rep.final_window_h = window_integral(times, h, t1 - 1.0, 1.0);
    if (rep.final_window_h <= opt.decay_threshold)
      rep.decay = rep.final_y <= opt.decay_threshold ? DecayVerdict::decays : DecayVerdict::no_decay;
  }
  return rep;
}

}  // namespace crimelab
