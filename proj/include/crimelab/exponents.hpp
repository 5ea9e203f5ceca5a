#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crimelab/errors.hpp"

namespace crimelab::exponents {

/// Comparison slack used for window-membership and sequence checks.
inline constexpr double kSlack = 1e-12;

/// Largest chi for which the v-bootstrap closes: sqrt(6 sqrt(3) + 9) / 2.
inline double chi_max() { return std::sqrt(6.0 * std::sqrt(3.0) + 9.0) / 2.0; }

/// (2 sqrt(3) - 3) / 3
inline double p_zero() { return (2.0 * std::sqrt(3.0) - 3.0) / 3.0; }

/// min{1, 1/chi^2}
inline double p_star(double chi) { return std::min(1.0, 1.0 / (chi * chi)); }

namespace detail {
inline void require_chi(double chi) {
  if (!(chi > 0.0) || !std::isfinite(chi)) throw domain_error("chi must be positive and finite");
}
inline void require_below_threshold(double chi) {
  require_chi(chi);
  if (!(chi < chi_max()))
    throw threshold_error("chi = " + std::to_string(chi) + " is not below the critical value " +
                          std::to_string(chi_max()));
}
}  // namespace detail

/// Admissible range (q_minus, q_plus) for the exponent q of int u^p v^q.
struct ExponentWindow {
  double p;
  double chi;
  double q_minus;
  double q_plus;

  bool contains(double q) const { return q > q_minus && q < q_plus; }
};

/// q(+/-)(p) = (1-p)/2 (1 +/- sqrt(1 - p chi^2)).
/// p = 1/chi^2 is accepted as the degenerate limit with q_minus = q_plus.
inline ExponentWindow q_window(double p, double chi) {
  detail::require_chi(chi);
  const double disc = 1.0 - p * chi * chi;
  if (!(p > 0.0) || !(p < 1.0) || disc < 0.0)
    throw domain_error("q_window needs 0 < p < 1 and p <= 1/chi^2; got p = " + std::to_string(p));
  const double root = std::sqrt(disc);
  const double half = 0.5 * (1.0 - p);
  return {p, chi, half * (1.0 - root), half * (1.0 + root)};
}

/// The auxiliary functions phi1, phi2, phi3 on (0, p_star).
struct PhiValues {
  double phi1;
  double phi2;
  double phi3;
};

inline PhiValues phi(double p, double chi) {
  detail::require_chi(chi);
  if (!(p > 0.0) || !(p < p_star(chi)))
    throw domain_error("phi needs 0 < p < min{1, 1/chi^2}; got p = " + std::to_string(p));
  const double root = std::sqrt(1.0 - p * chi * chi);
  const double scale = (1.0 - p) / (2.0 * p);
  return {(p + 1.0) / (1.0 - p), scale * (1.0 + root), scale * (1.0 - root)};
}

/// sup S(r), S(r) = { p in (0, p0) : phi2(p) >= r phi1(p) }.
///
/// phi2/phi1 is strictly decreasing, so the supremum is p0 when the
/// inequality holds there and otherwise the unique crossing, found by
/// bisection down to adjacent doubles. The returned point always satisfies
/// phi2 >= r phi1.
inline double sup_S(double r, double chi) {
  detail::require_below_threshold(chi);
  if (!(r >= 1.0) || !std::isfinite(r)) throw domain_error("sup_S needs r >= 1");
  const double p0 = p_zero();
  const auto gap = [&](double p) {
    const auto f = phi(p, chi);
    return f.phi2 - r * f.phi1;
  };
  if (gap(p0) >= 0.0) return p0;

  double lo = 0.0;  // gap -> +inf as p -> 0
  double hi = p0;
  // Shrink until the bracket can no longer be split.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gap(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (lo == 0.0) throw domain_error("sup_S bisection failed to bracket a positive point");
  return lo;
}

struct BootstrapSequence {
  double chi = 0.0;
  /// Index k = 0..K. p_seq[0] = p0 and r_seq[0] = 1; q_seq[0] = p0 is
  /// carried only to keep the columns aligned, the recursion starts at k = 1.
  std::vector<double> p_seq;
  std::vector<double> r_seq;
  std::vector<double> q_seq;

  std::size_t size() const { return r_seq.size(); }
};

struct SequenceCheck {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Verifies monotonicity of p and r, q_k = p_k r_k, the window bounds on
/// q_k and the upper bound q_k <= p_k (p_k + 1) / (1 - p_k) r_{k-1}.
inline SequenceCheck check_bootstrap(const BootstrapSequence& s, double slack = 1e-10) {
  SequenceCheck out;
  const auto fail = [&](std::size_t k, const std::string& what) {
    out.ok = false;
    out.failures.push_back("k = " + std::to_string(k) + ": " + what);
  };
  if (s.r_seq.empty() || s.r_seq[0] != 1.0) fail(0, "r_0 must equal 1");
  if (s.p_seq.size() != s.r_seq.size() || s.q_seq.size() != s.r_seq.size()) {
    fail(0, "sequence lengths differ");
    return out;
  }
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double p = s.p_seq[k];
    const double r = s.r_seq[k];
    const double q = s.q_seq[k];
    if (!(r > s.r_seq[k - 1])) fail(k, "r not strictly increasing");
    if (!(p <= s.p_seq[k - 1] + slack)) fail(k, "p increased");
    if (std::abs(q - p * r) > slack * std::max(1.0, std::abs(q))) fail(k, "q != p r");
    const auto w = q_window(p, s.chi);
    if (!(q > w.q_minus - slack)) fail(k, "q below q_minus");
    if (!(q <= w.q_plus + slack)) fail(k, "q above q_plus");
    if (!(q <= p * (p + 1.0) / (1.0 - p) * s.r_seq[k - 1] + slack)) fail(k, "q above p(p+1)/(1-p) r_{k-1}");
  }
  return out;
}

/// Builds (p_k, r_k, q_k) with p_k = sup S(r_{k-1}), r_k = phi1(p_k) r_{k-1},
/// q_k = p_k r_k until r_K >= r_target.
inline BootstrapSequence bootstrap_sequence(double chi, double r_target, std::size_t max_iterations = 10000) {
  detail::require_below_threshold(chi);
  if (!(r_target > 1.0) || !std::isfinite(r_target)) throw domain_error("bootstrap needs r_target > 1");

  BootstrapSequence s;
  s.chi = chi;
  s.p_seq.push_back(p_zero());
  s.r_seq.push_back(1.0);
  s.q_seq.push_back(p_zero());

  while (s.r_seq.back() < r_target) {
    if (s.size() > max_iterations)
      throw divergence_error("bootstrap did not reach r = " + std::to_string(r_target) + " within " +
                             std::to_string(max_iterations) + " steps");
    const double r_prev = s.r_seq.back();
    const double p = sup_S(r_prev, chi);
    const double r = phi(p, chi).phi1 * r_prev;
    s.p_seq.push_back(p);
    s.r_seq.push_back(r);
    s.q_seq.push_back(p * r);
  }

  if (const auto check = check_bootstrap(s); !check.ok)
    throw error("bootstrap sequence violates its invariants: " + check.failures.front());
  return s;
}

}  // namespace crimelab::exponents
