#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "crimelab/integrator.hpp"
#include "crimelab/model.hpp"

namespace crimelab {

enum class Verdict { holds, fails, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Verdicts on the source hypotheses. H1 and H1' read the source as B1, H2 and
/// H3 read it as B2.
///   H1   int_0^inf int B < inf
///   H1'  int_t^{t+1} int B -> 0
///   H2   inf_t int B(., t) > 0
///   H3   int_t^{t+1} int (B - B2inf)^2 -> 0
struct HypothesisReport {
  double horizon = 0.0;
  double h1_integral = 0.0;    // over [0, horizon]
  double h1_tail_bound = 0.0;  // analytic bound on the rest; inf when not integrable
  Verdict h1 = Verdict::inconclusive;
  double h1prime_window = 0.0;  // window starting at the horizon
  Verdict h1prime = Verdict::inconclusive;
  double h2_inf = 0.0;
  Verdict h2 = Verdict::inconclusive;
  double h3_window = 0.0;
  Verdict h3 = Verdict::inconclusive;
  /// Large-time limit of B at the cell centers, when known analytically.
  std::optional<Field> limit_profile;
};

namespace detail {

inline bool has_table(const SourceSpec& s) {
  if (s.kind() == SourceKind::tabulated) return true;
  if (s.kind() == SourceKind::product)
    return std::any_of(s.factors().begin(), s.factors().end(), [](const SourceSpec& f) { return has_table(f); });
  return false;
}

/// Every analytic preset factorizes as B(x, t) = B(x, 0) e^{-rate t}.
inline double total_decay_rate(const SourceSpec& s) {
  switch (s.kind()) {
    case SourceKind::exp_decay: return s.amplitude() == 0.0 ? 0.0 : s.rate();
    case SourceKind::product: {
      double r = 0.0;
      for (const auto& f : s.factors()) r += total_decay_rate(f);
      return r;
    }
    default: return 0.0;
  }
}

// Composite Simpson over [a, b].
template <class F>
double simpson(F&& f, double a, double b, std::size_t intervals = 2000) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (std::size_t k = 1; k < intervals; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(k));
  return sum * h / 3.0;
}

}  // namespace detail

inline HypothesisReport hypothesis_check(const SourceSpec& spec, double horizon, const Grid& grid,
                                         const std::optional<Field>& b2_inf = std::nullopt) {
  if (!(horizon > 0.0)) throw domain_error("hypothesis horizon must be positive");
  if (b2_inf && b2_inf->size() != grid.n_cells()) throw domain_error("b2_inf length does not match the grid");
  const double length = grid.length();
  const auto mass_at = [&](double t) {
    return detail::simpson([&](double x) { return spec(x, t); }, 0.0, length);
  };

  HypothesisReport rep;
  rep.horizon = horizon;
  rep.h1_integral = detail::simpson(mass_at, 0.0, horizon, 400);
  rep.h1prime_window = detail::simpson(mass_at, horizon, horizon + 1.0, 100);

  const auto sq_window = [&](const Field& limit) {
    const auto f = [&](double t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const double d = spec(grid.center(i), t) - limit[i];
        acc += d * d;
      }
      return acc * grid.h();
    };
    return detail::simpson(f, horizon, horizon + 1.0, 100);
  };

  if (detail::has_table(spec)) {
    // Tables carry no information about large times: report samples only.
    double inf_mass = mass_at(0.0);
    for (int k = 1; k <= 100; ++k) inf_mass = std::min(inf_mass, mass_at(horizon * k / 100.0));
    rep.h2_inf = inf_mass;
    rep.h1_tail_bound = std::numeric_limits<double>::infinity();
    if (b2_inf) rep.h3_window = sq_window(*b2_inf);
    return rep;
  }

  const double rate = detail::total_decay_rate(spec);
  const double base_mass = mass_at(0.0);  // int B(x, 0) dx
  const bool vanishes = base_mass == 0.0;

  if (vanishes) {
    rep.h1 = Verdict::holds;
    rep.h1prime = Verdict::holds;
    rep.h1_tail_bound = 0.0;
  } else if (rate > 0.0) {
    rep.h1 = Verdict::holds;
    rep.h1prime = Verdict::holds;
    rep.h1_integral = base_mass * (1.0 - std::exp(-rate * horizon)) / rate;
    rep.h1_tail_bound = base_mass * std::exp(-rate * horizon) / rate;
    rep.h1prime_window = base_mass * std::exp(-rate * horizon) * (1.0 - std::exp(-rate)) / rate;
  } else {
    rep.h1 = Verdict::fails;
    rep.h1prime = Verdict::fails;
    rep.h1_tail_bound = std::numeric_limits<double>::infinity();
  }

  rep.h2_inf = rate > 0.0 ? 0.0 : base_mass;
  rep.h2 = rep.h2_inf > 0.0 ? Verdict::holds : Verdict::fails;

  Field limit(grid.n_cells(), 0.0);
  if (rate == 0.0)
    for (std::size_t i = 0; i < limit.size(); ++i) limit[i] = spec(grid.center(i), 0.0);
  rep.limit_profile = limit;

  if (b2_inf) {
    rep.h3_window = sq_window(*b2_inf);
    double gap = 0.0;
    for (std::size_t i = 0; i < limit.size(); ++i) gap = std::max(gap, std::abs(limit[i] - (*b2_inf)[i]));
    rep.h3 = gap <= 1e-9 * (1.0 + spec.bound()) ? Verdict::holds : Verdict::fails;
  } else {
    rep.h3_window = sq_window(limit);
    rep.h3 = Verdict::holds;
  }
  return rep;
}

/// Entry time after which both sup|v - v_inf| < eps and sup u < eps hold at
/// every later sample.
struct ConvergenceReport {
  bool attained = false;
  double entry_time = std::numeric_limits<double>::quiet_NaN();
  double final_v_error = 0.0;
  double final_sup_u = 0.0;
  std::vector<double> v_errors;
};

inline ConvergenceReport convergence_check(const Trajectory& traj, const Field& v_inf, double eps) {
  if (traj.status != RunStatus::completed) throw domain_error("convergence_check needs a completed trajectory");
  if (traj.states.empty()) throw domain_error("trajectory has no samples");
  ConvergenceReport rep;
  std::vector<bool> inside;
  for (const auto& s : traj.states) {
    if (s.v.size() != v_inf.size()) throw domain_error("v_inf length does not match the trajectory");
    double err = 0.0;
    for (std::size_t i = 0; i < v_inf.size(); ++i) err = std::max(err, std::abs(s.v[i] - v_inf[i]));
    const double sup_u = *std::max_element(s.u.begin(), s.u.end());
    rep.v_errors.push_back(err);
    inside.push_back(err < eps && sup_u < eps);
    rep.final_v_error = err;
    rep.final_sup_u = sup_u;
  }
  std::size_t k = inside.size();
  while (k > 0 && inside[k - 1]) --k;
  if (k < inside.size()) {
    rep.attained = true;
    rep.entry_time = traj.states[k].t;
  }
  return rep;
}

}  // namespace crimelab
