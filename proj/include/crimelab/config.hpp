#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crimelab/diagnostics.hpp"
#include "crimelab/discretization.hpp"
#include "crimelab/errors.hpp"
#include "crimelab/integrator.hpp"
#include "crimelab/model.hpp"

namespace crimelab {

/// Shortest decimal string that parses back to the same double.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<double> parse_numbers(std::string_view s, const std::string& what) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) {
    const auto v = parse_number(item);
    if (!v) throw domain_error(what + ": '" + item + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

inline std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

inline TabulatedProfile parse_table(std::string_view body) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& pair : split(body, ',')) {
    const auto parts = split(pair, ':');
    if (parts.size() != 2) throw domain_error("table entries are written x:value; got '" + pair + "'");
    const auto xv = parse_number(parts[0]);
    const auto yv = parse_number(parts[1]);
    if (!xv || !yv) throw domain_error("table entry '" + pair + "' is not numeric");
    x.push_back(*xv);
    y.push_back(*yv);
  }
  return TabulatedProfile(std::move(x), std::move(y));
}

}  // namespace detail

/// Builds a source from its preset string:
///   const:C | exp:A,RATE | gauss:A,CENTER,WIDTH | cos:BASE,AMP[,MODE]
///   table:x0:y0,x1:y1,... | F1*F2*...  (product of presets)
/// The cosine preset uses cos(MODE pi x / length).
inline SourceSpec make_source(std::string_view preset, double length) {
  const std::string text = detail::strip_spaces(preset);
  if (text.find('*') != std::string::npos) {
    std::vector<SourceSpec> factors;
    for (const auto& f : detail::split(text, '*')) factors.push_back(make_source(f, length));
    return SourceSpec::product(std::move(factors));
  }
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "table") return SourceSpec::tabulated(detail::parse_table(body));
  const auto args = detail::parse_numbers(body, "source '" + text + "'");
  const auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw domain_error("source '" + text + "' has the wrong number of parameters");
  };
  if (kind == "const") {
    need(1, 1);
    return SourceSpec::constant(args[0]);
  }
  if (kind == "exp") {
    need(2, 2);
    return SourceSpec::exp_decay(args[0], args[1]);
  }
  if (kind == "gauss") {
    need(3, 3);
    return SourceSpec::gaussian_space(args[0], args[1], args[2]);
  }
  if (kind == "cos") {
    need(2, 3);
    return SourceSpec::cosine_space(args[0], args[1], args.size() == 3 ? args[2] : 1.0, length);
  }
  throw domain_error("unknown source preset '" + kind + "'");
}

/// expneg | const:C | table:x0:y0,...
inline InitialCondition make_ic(std::string_view preset) {
  const std::string text = detail::strip_spaces(preset);
  if (text == "expneg") return InitialCondition::expneg();
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "const") {
    const auto args = detail::parse_numbers(body, "initial condition '" + text + "'");
    if (args.size() != 1) throw domain_error("const initial condition takes one value");
    return InitialCondition::constant(args[0]);
  }
  if (kind == "table") return InitialCondition::tabulated(detail::parse_table(body));
  throw domain_error("unknown initial-condition preset '" + kind + "'");
}

enum class FaceChoice { arithmetic, upwind, automatic };

enum class ProfileOutput { ends, all };

struct RunConfig {
  // [grid]
  double length = 1.0;
  std::size_t n_cells = 200;
  // [model]
  double chi = 2.0;
  FaceChoice face = FaceChoice::arithmetic;
  /// chi at or above which `auto` switches to upwind faces.
  double upwind_threshold = 100.0;
  // [sources]
  std::string b1 = "const:1";
  std::string b2 = "const:1";
  // [ic]
  std::string u0 = "expneg";
  std::string v0 = "expneg";
  // [time]
  double t_end = 1.0;
  double output_interval = 0.1;
  StepController controller{};
  // [diagnostics]; unset entries are derived from chi
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> gamma_u;
  double gamma_v = 0.25;
  std::vector<double> r_list{2.0, 4.0, 8.0};
  double tau = 1.0;
  // [output]
  std::string directory = "out";
  bool svg = true;
  ProfileOutput profiles = ProfileOutput::ends;

  FaceAverage face_average() const {
    switch (face) {
      case FaceChoice::arithmetic: return FaceAverage::arithmetic;
      case FaceChoice::upwind: return FaceAverage::upwind;
      case FaceChoice::automatic: return chi >= upwind_threshold ? FaceAverage::upwind : FaceAverage::arithmetic;
    }
    return FaceAverage::arithmetic;
  }

  DiagnosticsConfig diagnostics() const {
    DiagnosticsConfig d = DiagnosticsConfig::defaults_for(chi);
    if (p) {
      d.p = *p;
      if (!q) {
        try {
          const auto w = exponents::q_window(d.p, chi);
          d.q = 0.5 * (w.q_minus + w.q_plus);
        } catch (const domain_error&) {
          d.q = 0.5 * (1.0 - d.p);
        }
      }
    }
    if (q) d.q = *q;
    if (gamma_u) d.gamma_u = *gamma_u;
    d.gamma_v = gamma_v;
    d.r_list = r_list;
    return d;
  }

  Grid grid() const { return Grid(length, n_cells); }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline std::string emit_config(const RunConfig& c) {
  const auto num = format_number;
  const auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string("auto"); };
  std::string r_list;
  for (std::size_t k = 0; k < c.r_list.size(); ++k) r_list += (k ? "," : "") + num(c.r_list[k]);
  const char* face = c.face == FaceChoice::arithmetic ? "arithmetic" : c.face == FaceChoice::upwind ? "upwind" : "auto";

  std::ostringstream os;
  os << "[grid]\n"
     << "length = " << num(c.length) << "\n"
     << "n_cells = " << c.n_cells << "\n\n"
     << "[model]\n"
     << "chi = " << num(c.chi) << "\n"
     << "face_average = " << face << "\n"
     << "upwind_threshold = " << num(c.upwind_threshold) << "\n\n"
     << "[sources]\n"
     << "b1 = " << c.b1 << "\n"
     << "b2 = " << c.b2 << "\n\n"
     << "[ic]\n"
     << "u0 = " << c.u0 << "\n"
     << "v0 = " << c.v0 << "\n\n"
     << "[time]\n"
     << "t_end = " << num(c.t_end) << "\n"
     << "output_interval = " << num(c.output_interval) << "\n"
     << "dt_init = " << num(c.controller.dt_init) << "\n"
     << "dt_min = " << num(c.controller.dt_min) << "\n"
     << "dt_max = " << num(c.controller.dt_max) << "\n"
     << "rel_tol = " << num(c.controller.rel_tol) << "\n"
     << "abs_tol = " << num(c.controller.abs_tol) << "\n"
     << "safety = " << num(c.controller.safety) << "\n"
     << "cfl_fraction = " << num(c.controller.cfl_fraction) << "\n\n"
     << "[diagnostics]\n"
     << "p = " << opt(c.p) << "\n"
     << "q = " << opt(c.q) << "\n"
     << "gamma_u = " << opt(c.gamma_u) << "\n"
     << "gamma_v = " << num(c.gamma_v) << "\n"
     << "r_list = " << r_list << "\n"
     << "tau = " << num(c.tau) << "\n\n"
     << "[output]\n"
     << "directory = " << c.directory << "\n"
     << "formats = " << (c.svg ? "csv,svg" : "csv") << "\n"
     << "profiles = " << (c.profiles == ProfileOutput::all ? "all" : "ends") << "\n";
  return os.str();
}

/// Checks cross-field constraints; returns one message per violation.
inline std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> errs;
  const auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  check(c.length > 0.0 && std::isfinite(c.length), "grid.length: must be positive");
  check(c.n_cells >= 4, "grid.n_cells: must be at least 4");
  check(c.chi > 0.0 && std::isfinite(c.chi), "model.chi: must be positive");
  check(c.upwind_threshold > 0.0, "model.upwind_threshold: must be positive");
  check(c.t_end >= 0.0 && std::isfinite(c.t_end), "time.t_end: must be >= 0");
  check(c.output_interval >= 0.0, "time.output_interval: must be >= 0");
  try {
    c.controller.validate();
  } catch (const domain_error& e) {
    errs.push_back(std::string("time: ") + e.what());
  }
  check(!c.p || (*c.p > 0.0 && *c.p < 1.0), "diagnostics.p: must lie in (0, 1)");
  check(!c.q || std::isfinite(*c.q), "diagnostics.q: must be finite");
  check(!c.gamma_u || (*c.gamma_u > 0.0 && *c.gamma_u <= 1.0), "diagnostics.gamma_u: must lie in (0, 1]");
  check(c.gamma_v > 0.0 && c.gamma_v <= 1.0, "diagnostics.gamma_v: must lie in (0, 1]");
  for (double r : c.r_list) check(r >= 1.0, "diagnostics.r_list: entries must be >= 1");
  check(c.tau > 0.0, "diagnostics.tau: must be positive");
  check(!c.directory.empty(), "output.directory: must not be empty");
  for (const auto& [name, preset] : {std::pair{"sources.b1", c.b1}, std::pair{"sources.b2", c.b2}}) {
    try {
      make_source(preset, c.length > 0.0 ? c.length : 1.0);
    } catch (const error& e) {
      errs.push_back(std::string(name) + ": " + e.what());
    }
  }
  for (const auto& [name, preset] : {std::pair{"ic.u0", c.u0}, std::pair{"ic.v0", c.v0}}) {
    try {
      make_ic(preset);
    } catch (const error& e) {
      errs.push_back(std::string(name) + ": " + e.what());
    }
  }
  return errs;
}

/// Parses the sectioned key = value format. Comments start with '#'.
/// Unknown sections or keys, duplicates, and malformed values are errors;
/// missing keys keep their defaults. Throws config_error listing every problem.
inline RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::vector<std::string> errs;
  std::map<std::string, int> seen;
  std::string section;
  int line_no = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errs.push_back(where + "malformed section header");
        continue;
      }
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      static const char* known[] = {"grid", "model", "sources", "ic", "time", "diagnostics", "output"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        errs.push_back(where + "unknown section [" + section + "]");
        section = "?";
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (section.empty()) {
      errs.push_back(where + "key '" + key + "' appears before any section");
      continue;
    }
    if (section == "?") continue;
    const std::string full = section + "." + key;
    if (seen.count(full)) {
      errs.push_back(where + "duplicate key " + full + " (first set on line " + std::to_string(seen[full]) + ")");
      continue;
    }
    seen[full] = line_no;

    const auto number = [&](double& dst) {
      if (const auto v = parse_number(value))
        dst = *v;
      else
        errs.push_back(where + full + ": '" + value + "' is not a number");
    };
    const auto optional_number = [&](std::optional<double>& dst) {
      if (value == "auto") {
        dst.reset();
        return;
      }
      double v = 0.0;
      const auto before = errs.size();
      number(v);
      if (errs.size() == before) dst = v;
    };

    if (full == "grid.length") {
      number(c.length);
    } else if (full == "grid.n_cells") {
      double v = 0.0;
      const auto before = errs.size();
      number(v);
      if (errs.size() == before) {
        if (v < 0.0 || v != std::floor(v) || v > 1e8)
          errs.push_back(where + "grid.n_cells: must be a nonnegative integer");
        else
          c.n_cells = static_cast<std::size_t>(v);
      }
    } else if (full == "model.chi") {
      number(c.chi);
    } else if (full == "model.face_average") {
      if (value == "arithmetic")
        c.face = FaceChoice::arithmetic;
      else if (value == "upwind")
        c.face = FaceChoice::upwind;
      else if (value == "auto")
        c.face = FaceChoice::automatic;
      else
        errs.push_back(where + "model.face_average: expected arithmetic, upwind or auto");
    } else if (full == "model.upwind_threshold") {
      number(c.upwind_threshold);
    } else if (full == "sources.b1") {
      c.b1 = detail::strip_spaces(value);
    } else if (full == "sources.b2") {
      c.b2 = detail::strip_spaces(value);
    } else if (full == "ic.u0") {
      c.u0 = detail::strip_spaces(value);
    } else if (full == "ic.v0") {
      c.v0 = detail::strip_spaces(value);
    } else if (full == "time.t_end") {
      number(c.t_end);
    } else if (full == "time.output_interval") {
      number(c.output_interval);
    } else if (full == "time.dt_init") {
      number(c.controller.dt_init);
    } else if (full == "time.dt_min") {
      number(c.controller.dt_min);
    } else if (full == "time.dt_max") {
      number(c.controller.dt_max);
    } else if (full == "time.rel_tol") {
      number(c.controller.rel_tol);
    } else if (full == "time.abs_tol") {
      number(c.controller.abs_tol);
    } else if (full == "time.safety") {
      number(c.controller.safety);
    } else if (full == "time.cfl_fraction") {
      number(c.controller.cfl_fraction);
    } else if (full == "diagnostics.p") {
      optional_number(c.p);
    } else if (full == "diagnostics.q") {
      optional_number(c.q);
    } else if (full == "diagnostics.gamma_u") {
      optional_number(c.gamma_u);
    } else if (full == "diagnostics.gamma_v") {
      number(c.gamma_v);
    } else if (full == "diagnostics.r_list") {
      try {
        c.r_list = detail::parse_numbers(value, full);
      } catch (const domain_error& e) {
        errs.push_back(where + e.what());
      }
    } else if (full == "diagnostics.tau") {
      number(c.tau);
    } else if (full == "output.directory") {
      c.directory = value;
    } else if (full == "output.formats") {
      c.svg = false;
      for (const auto& f : detail::split(value, ',')) {
        if (f == "svg")
          c.svg = true;
        else if (f != "csv")
          errs.push_back(where + "output.formats: unknown format '" + f + "'");
      }
    } else if (full == "output.profiles") {
      if (value == "ends")
        c.profiles = ProfileOutput::ends;
      else if (value == "all")
        c.profiles = ProfileOutput::all;
      else
        errs.push_back(where + "output.profiles: expected ends or all");
    } else {
      errs.push_back(where + "unknown key " + full);
    }
  }

  // Fields that failed to parse kept their defaults, so validation still applies.
  for (auto& e : validate_config(c)) {
    const auto dot = e.find(':');
    const std::string field = e.substr(0, dot);
    if (seen.count(field)) e = "line " + std::to_string(seen[field]) + ": " + e;
    errs.push_back(e);
  }
  if (!errs.empty()) throw config_error(std::move(errs));
  return c;
}

}  // namespace crimelab
