#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crimelab/errors.hpp"

namespace crimelab {

using Field = std::vector<double>;

/// Uniform cell-centered mesh over (0, L). Cell i has center (i + 1/2) h.
class Grid {
public:
  Grid(double length, std::size_t n_cells) : length_(length), n_cells_(n_cells) {
    if (!(length > 0.0) || !std::isfinite(length))
      throw domain_error("grid length must be positive and finite");
    if (n_cells < 4) throw domain_error("grid needs at least 4 cells");
    h_ = length_ / static_cast<double>(n_cells_);
  }

  double length() const noexcept { return length_; }
  std::size_t n_cells() const noexcept { return n_cells_; }
  double h() const noexcept { return h_; }
  double center(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * h_; }

  Field centers() const {
    Field x(n_cells_);
    for (std::size_t i = 0; i < n_cells_; ++i) x[i] = center(i);
    return x;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  double length_;
  std::size_t n_cells_;
  double h_;
};

/// Criminal density u and attractiveness v at time t, one value per cell.
struct State {
  double t = 0.0;
  Field u;
  Field v;
};

struct ModelParams {
  double chi = 2.0;

  explicit ModelParams(double chi_value = 2.0) : chi(chi_value) {
    if (!(chi > 0.0) || !std::isfinite(chi)) throw domain_error("chi must be positive");
  }
};

/// Throws positivity_error unless every u >= 0 and every v > 0.
inline void check_state(const State& s, std::size_t n_cells) {
  if (s.u.size() != n_cells || s.v.size() != n_cells)
    throw domain_error("state field length does not match the grid");
  for (std::size_t i = 0; i < n_cells; ++i) {
    if (!(s.u[i] >= 0.0) || !std::isfinite(s.u[i]))
      throw positivity_error("u is negative or not finite in cell " + std::to_string(i));
    if (!(s.v[i] > 0.0) || !std::isfinite(s.v[i]))
      throw positivity_error("v is not strictly positive in cell " + std::to_string(i));
  }
}

/// Piecewise-linear profile through (x_k, y_k) with strictly increasing x_k.
class TabulatedProfile {
public:
  TabulatedProfile() = default;
  TabulatedProfile(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.empty())
      throw domain_error("table needs matching, nonempty x and value columns");
    for (std::size_t k = 1; k < x_.size(); ++k)
      if (!(x_[k] > x_[k - 1])) throw domain_error("table abscissae must be strictly increasing");
    for (double y : y_)
      if (!std::isfinite(y)) throw domain_error("table values must be finite");
  }

  double operator()(double x) const {
    const double slack = 1e-12 * std::max({1.0, std::abs(x_.front()), std::abs(x_.back())});
    if (x < x_.front() - slack || x > x_.back() + slack)
      throw extrapolation_error("table queried at x = " + std::to_string(x) + " outside [" +
                                std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
    if (x_.size() == 1 || x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin());
    const double w = (x - x_[k - 1]) / (x_[k] - x_[k - 1]);
    return (1.0 - w) * y_[k - 1] + w * y_[k];
  }

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }
  double max_value() const { return *std::max_element(y_.begin(), y_.end()); }
  double min_value() const { return *std::min_element(y_.begin(), y_.end()); }

  friend bool operator==(const TabulatedProfile&, const TabulatedProfile&) = default;

private:
  std::vector<double> x_;
  std::vector<double> y_;
};

enum class SourceKind { constant, exp_decay, gaussian_space, cosine_space, product, tabulated };

/// Nonnegative, bounded source term B(x, t) drawn from a fixed family of presets.
///
/// Presets are closed-form so that tail integrals and limits needed by the
/// hypothesis checks are known analytically:
///   constant        B = c
///   exp_decay       B = a e^{-lambda t}
///   gaussian_space  B = a exp(-(x - x0)^2 / (2 w^2))
///   cosine_space    B = base + a cos(m pi x / L),   base >= |a|
///   product         B = prod_k B_k
///   tabulated       B = piecewise-linear in x, time independent
class SourceSpec {
public:
  static SourceSpec constant(double c) {
    require_nonneg(c, "constant source value");
    SourceSpec s(SourceKind::constant);
    s.a_ = c;
    return s;
  }

  static SourceSpec exp_decay(double amplitude, double rate) {
    require_nonneg(amplitude, "exp_decay amplitude");
    require_nonneg(rate, "exp_decay rate");
    SourceSpec s(SourceKind::exp_decay);
    s.a_ = amplitude;
    s.b_ = rate;
    return s;
  }

  static SourceSpec gaussian_space(double amplitude, double center, double width) {
    require_nonneg(amplitude, "gaussian amplitude");
    if (!(width > 0.0) || !std::isfinite(center)) throw domain_error("gaussian width must be positive");
    SourceSpec s(SourceKind::gaussian_space);
    s.a_ = amplitude;
    s.b_ = center;
    s.c_ = width;
    return s;
  }

  static SourceSpec cosine_space(double base, double amplitude, double mode, double length) {
    if (!std::isfinite(base) || !std::isfinite(amplitude) || base < std::abs(amplitude))
      throw domain_error("cosine source needs base >= |amplitude| to stay nonnegative");
    if (!(length > 0.0) || !std::isfinite(mode)) throw domain_error("cosine source needs a positive length");
    SourceSpec s(SourceKind::cosine_space);
    s.a_ = amplitude;
    s.b_ = base;
    s.c_ = mode;
    s.d_ = length;
    return s;
  }

  static SourceSpec product(std::vector<SourceSpec> factors) {
    if (factors.empty()) throw domain_error("product source needs at least one factor");
    SourceSpec s(SourceKind::product);
    s.factors_ = std::move(factors);
    return s;
  }

  static SourceSpec tabulated(TabulatedProfile table) {
    if (table.min_value() < 0.0) throw domain_error("tabulated source values must be nonnegative");
    SourceSpec s(SourceKind::tabulated);
    s.table_ = std::move(table);
    return s;
  }

  SourceKind kind() const noexcept { return kind_; }

  double operator()(double x, double t) const {
    switch (kind_) {
      case SourceKind::constant: return a_;
      case SourceKind::exp_decay: return a_ * std::exp(-b_ * t);
      case SourceKind::gaussian_space: {
        const double z = (x - b_) / c_;
        return a_ * std::exp(-0.5 * z * z);
      }
      case SourceKind::cosine_space:
        return std::max(0.0, b_ + a_ * std::cos(c_ * std::numbers::pi * x / d_));
      case SourceKind::product: {
        double p = 1.0;
        for (const auto& f : factors_) p *= f(x, t);
        return p;
      }
      case SourceKind::tabulated: return table_(x);
    }
    return 0.0;
  }

  /// Declared upper bound over all (x, t).
  double bound() const {
    switch (kind_) {
      case SourceKind::constant:
      case SourceKind::exp_decay:
      case SourceKind::gaussian_space: return a_;
      case SourceKind::cosine_space: return b_ + std::abs(a_);
      case SourceKind::product: {
        double p = 1.0;
        for (const auto& f : factors_) p *= f.bound();
        return p;
      }
      case SourceKind::tabulated: return table_.max_value();
    }
    return 0.0;
  }

  /// True when B does not depend on t.
  bool time_independent() const {
    switch (kind_) {
      case SourceKind::exp_decay: return a_ == 0.0 || b_ == 0.0;
      case SourceKind::product:
        return std::all_of(factors_.begin(), factors_.end(), [](const SourceSpec& f) { return f.time_independent(); });
      default: return true;
    }
  }

  double amplitude() const noexcept { return a_; }
  double rate() const noexcept { return b_; }
  double center() const noexcept { return b_; }
  double width() const noexcept { return c_; }
  double base() const noexcept { return b_; }
  double mode() const noexcept { return c_; }
  double length() const noexcept { return d_; }
  const std::vector<SourceSpec>& factors() const noexcept { return factors_; }
  const TabulatedProfile& table() const noexcept { return table_; }

  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;

private:
  explicit SourceSpec(SourceKind kind) : kind_(kind) {}

  static void require_nonneg(double value, const char* what) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw domain_error(std::string(what) + " must be finite and >= 0");
  }

  SourceKind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
  double d_ = 0.0;
  std::vector<SourceSpec> factors_;
  TabulatedProfile table_;
};

inline double eval_source(const SourceSpec& spec, double x, double t) {
  if (!(t >= 0.0)) throw domain_error("sources are defined for t >= 0 only");
  return spec(x, t);
}

enum class InitialKind { expneg, constant, tabulated };

/// Which component an initial profile feeds; v0 must be strictly positive.
enum class FieldRole { density, attractiveness };

struct InitialCondition {
  InitialKind kind = InitialKind::expneg;
  double value = 0.0;  // constant level
  TabulatedProfile table;

  static InitialCondition expneg() { return {}; }
  static InitialCondition constant(double c) { return {InitialKind::constant, c, {}}; }
  static InitialCondition tabulated(TabulatedProfile t) { return {InitialKind::tabulated, 0.0, std::move(t)}; }

  double operator()(double x) const {
    switch (kind) {
      case InitialKind::expneg: return std::exp(-x);
      case InitialKind::constant: return value;
      case InitialKind::tabulated: return table(x);
    }
    return 0.0;
  }

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

inline Field sample_ic(const InitialCondition& ic, const Grid& grid, FieldRole role = FieldRole::density) {
  Field f(grid.n_cells());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double value = ic(grid.center(i));
    if (!std::isfinite(value)) throw invalid_ic_error("initial value is not finite");
    if (role == FieldRole::attractiveness && !(value > 0.0))
      throw invalid_ic_error("v0 must be strictly positive; got " + std::to_string(value) + " in cell " +
                             std::to_string(i));
    if (role == FieldRole::density && value < 0.0)
      throw invalid_ic_error("u0 must be nonnegative; got " + std::to_string(value) + " in cell " + std::to_string(i));
    f[i] = value;
  }
  return f;
}

struct SteadyPair {
  double u;
  double v;
};

/// Spatially constant equilibrium of the reaction terms for constant sources:
/// -u v + b1 = 0 and u v - v + b2 = 0.
inline SteadyPair homogeneous_steady(double b1, double b2) {
  if (!(b1 >= 0.0) || !(b2 >= 0.0)) throw domain_error("homogeneous steady state needs b1, b2 >= 0");
  if (b1 + b2 == 0.0) throw degenerate_error("b1 = b2 = 0 has no positive steady state");
  const double v = b1 + b2;
  return {b1 / v, v};
}

}  // namespace crimelab
