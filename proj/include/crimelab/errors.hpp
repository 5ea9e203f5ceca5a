#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crimelab {

/// Base of every error thrown by the library.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the mathematical domain of an operation.
class domain_error : public error {
public:
  using error::error;
};

/// chi is at or above the critical value sqrt(6 sqrt(3) + 9) / 2.
class threshold_error : public error {
public:
  using error::error;
};

/// A state violates u >= 0 or v > 0 where positivity is required.
class positivity_error : public error {
public:
  using error::error;
};

/// A tabulated profile was queried outside its sample range.
class extrapolation_error : public error {
public:
  using error::error;
};

class invalid_ic_error : public error {
public:
  using error::error;
};

/// b1 = b2 = 0: no strictly positive homogeneous steady state.
class degenerate_error : public error {
public:
  using error::error;
};

/// A time series does not cover the requested window.
class coverage_error : public error {
public:
  using error::error;
};

class alignment_error : public error {
public:
  using error::error;
};

/// The bootstrap recursion did not reach its target within the iteration cap.
class divergence_error : public error {
public:
  using error::error;
};

/// Configuration problems. Each message is anchored to a line when one applies.
class config_error : public error {
public:
  explicit config_error(std::vector<std::string> messages)
      : error(join(messages)), messages_(std::move(messages)) {}

  const std::vector<std::string>& messages() const noexcept { return messages_; }

private:
  static std::string join(const std::vector<std::string>& messages) {
    std::string out;
    for (const auto& m : messages) {
      if (!out.empty()) out += '\n';
      out += m;
    }
    return out;
  }

  std::vector<std::string> messages_;
};

}  // namespace crimelab
