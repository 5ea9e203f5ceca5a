#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "crimelab/config.hpp"
#include "crimelab/diagnostics.hpp"
#include "crimelab/hypotheses.hpp"
#include "crimelab/integrator.hpp"
#include "crimelab/steady_state.hpp"
#include "crimelab/svg.hpp"

namespace crimelab {

namespace fs = std::filesystem;

inline constexpr const char* kTimeseriesHeader =
    "t,mass_u,mass_v,int_uv,sup_u,sup_v,min_v,entropy,diss_u,diss_v,holder_u,holder_v";
inline constexpr const char* kProfileHeader = "x,u,v";
inline constexpr const char* kSummaryHeader = "chi,peak_sup_u,t_peak,final_sup_u,status";

// ---------------------------------------------------------------- CSV I/O

inline std::string profile_filename(double t) { return "profile_t" + format_number(t) + ".csv"; }

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error("cannot write " + path.string());
  out << text;
}

inline std::string timeseries_csv(const std::vector<DiagnosticsRow>& rows) {
  std::string out = std::string(kTimeseriesHeader) + "\n";
  for (const auto& r : rows) {
    for (double x : {r.t, r.mass_u, r.mass_v, r.int_uv, r.sup_u, r.sup_v, r.min_v, r.entropy, r.diss_u, r.diss_v,
                     r.holder_u}) {
      out += format_number(x);
      out += ',';
    }
    out += format_number(r.holder_v);
    out += '\n';
  }
  return out;
}

inline std::string lr_norms_csv(const std::vector<DiagnosticsRow>& rows, const std::vector<double>& r_list) {
  std::string out = "t";
  for (double r : r_list) out += ",L" + format_number(r);
  out += '\n';
  for (const auto& row : rows) {
    out += format_number(row.t);
    for (double x : row.lr_norms) out += "," + format_number(x);
    out += '\n';
  }
  return out;
}

inline std::string profile_csv(const State& s, const Grid& grid) {
  std::string out = std::string(kProfileHeader) + "\n";
  for (std::size_t i = 0; i < grid.n_cells(); ++i)
    out += format_number(grid.center(i)) + "," + format_number(s.u[i]) + "," + format_number(s.v[i]) + "\n";
  return out;
}

/// Reads a numeric CSV; the first line must equal `header` when one is given.
inline std::vector<std::vector<double>> read_csv(const fs::path& path, const std::string& header = {}) {
  std::ifstream in(path);
  if (!in) throw error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (!header.empty() && line != header) throw error(path.string() + ": unexpected header '" + line + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : detail::split(line, ',')) {
      const auto v = parse_number(cell);
      if (!v) throw error(path.string() + ": non-numeric cell '" + cell + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------- runs

struct RunRecord {
  RunConfig config;
  RunStatus status = RunStatus::completed;
  std::string message;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
  FaceAverage face = FaceAverage::arithmetic;
  StepStats stats;
  DiagnosticsConfig diagnostics;
  Trajectory trajectory;
};

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["config"] = emit_config(r.config);
  j["chi"] = r.config.chi;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["files"] = r.files;
  j["wall_seconds"] = r.wall_seconds;
  j["scheme"] = {
      {"face_average", to_string(r.face)},
      {"time_scheme", "imex-backward-euler, step doubling with extrapolation"},
      {"accepted_steps", r.stats.accepted},
      {"rejected_error", r.stats.rejected_error},
      {"rejected_positivity", r.stats.rejected_positivity},
      {"min_dt", r.stats.accepted ? r.stats.min_dt : 0.0},
      {"max_dt", r.stats.max_dt},
  };
  j["diagnostics"] = {{"p", r.diagnostics.p},
                      {"q", r.diagnostics.q},
                      {"gamma_u", r.diagnostics.gamma_u},
                      {"gamma_v", r.diagnostics.gamma_v},
                      {"r_list", r.diagnostics.r_list}};
  return j;
}

struct RunHooks {
  std::function<void(const State&, const State&)> on_accept;
  /// Skip writing files; the trajectory is still returned.
  bool in_memory = false;
};

inline svg::Chart sup_u_chart(const std::vector<DiagnosticsRow>& rows, const std::string& title) {
  svg::Series s{"sup u", {}, {}};
  for (const auto& r : rows) {
    s.x.push_back(r.t);
    s.y.push_back(r.sup_u);
  }
  return {title, "t", "max u", {s}};
}

inline svg::Chart profile_chart(const State& st, const Grid& grid, const std::string& title) {
  svg::Series u{"u", grid.centers(), st.u};
  svg::Series v{"v", grid.centers(), st.v};
  return {title, "x", "value", {u, v}};
}

/// Runs one simulation and writes its outputs into config.directory.
/// Abnormal termination is recorded in the result, never thrown.
inline RunRecord run_simulate(const RunConfig& config, const RunHooks& hooks = {}) {
  if (auto errs = validate_config(config); !errs.empty()) throw config_error(std::move(errs));
  const auto started = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.config = config;
  rec.face = config.face_average();
  rec.diagnostics = config.diagnostics();

  const Grid grid = config.grid();
  const ModelParams params(config.chi);
  const SourceSpec b1 = make_source(config.b1, config.length);
  const SourceSpec b2 = make_source(config.b2, config.length);
  State init;
  init.t = 0.0;
  init.u = sample_ic(make_ic(config.u0), grid, FieldRole::density);
  init.v = sample_ic(make_ic(config.v0), grid, FieldRole::attractiveness);

  AdvanceOptions opt;
  opt.output_interval = config.output_interval;
  opt.face = rec.face;
  opt.diagnostics = rec.diagnostics;
  opt.on_accept = hooks.on_accept;
  rec.trajectory = advance(init, config.t_end, config.controller, params, b1, b2, grid, opt);
  rec.status = rec.trajectory.status;
  rec.message = rec.trajectory.message;
  rec.stats = rec.trajectory.stats;

  if (!hooks.in_memory) {
    const fs::path dir(config.directory);
    fs::create_directories(dir);
    const auto emit = [&](const std::string& name, const std::string& text) {
      write_text(dir / name, text);
      rec.files.push_back(name);
    };
    emit("timeseries.csv", timeseries_csv(rec.trajectory.rows));
    emit("lr_norms.csv", lr_norms_csv(rec.trajectory.rows, rec.diagnostics.r_list));
    const auto& states = rec.trajectory.states;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const bool end = k == 0 || k + 1 == states.size();
      if (end || config.profiles == ProfileOutput::all) emit(profile_filename(states[k].t), profile_csv(states[k], grid));
    }
    if (config.svg) {
      const std::string tag = "chi = " + format_number(config.chi);
      emit("sup_u.svg", svg::render(sup_u_chart(rec.trajectory.rows, "max u over time, " + tag)));
      emit("profile_final.svg",
           svg::render(profile_chart(states.back(), grid, "profiles at t = " + format_number(states.back().t) + ", " + tag)));
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    rec.files.push_back("run.json");
    write_text(dir / "run.json", to_json(rec).dump(2) + "\n");
  } else {
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

// ---------------------------------------------------------------- sweeps

struct SweepRow {
  double chi = 0.0;
  double peak_sup_u = 0.0;
  double t_peak = 0.0;
  double final_sup_u = 0.0;
  std::string status;
  std::string directory;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<RunRecord> records;

  bool all_completed() const {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == "completed"; });
  }
};

inline std::string summary_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows)
    out += format_number(r.chi) + "," + format_number(r.peak_sup_u) + "," + format_number(r.t_peak) + "," +
           format_number(r.final_sup_u) + "," + r.status + "\n";
  return out;
}

inline SweepRow summarize(const RunRecord& rec) {
  SweepRow row;
  row.chi = rec.config.chi;
  row.status = to_string(rec.status);
  row.directory = rec.config.directory;
  const auto& rows = rec.trajectory.rows;
  if (!rows.empty()) {
    const auto peak = std::max_element(rows.begin(), rows.end(),
                                       [](const DiagnosticsRow& a, const DiagnosticsRow& b) { return a.sup_u < b.sup_u; });
    row.peak_sup_u = peak->sup_u;
    row.t_peak = peak->t;
    row.final_sup_u = rows.back().sup_u;
  }
  return row;
}

/// One run per chi in its own subdirectory of out_root, executed on up to
/// `threads` workers (0 = hardware concurrency). Failures are recorded per row.
inline SweepResult run_sweep(const RunConfig& base, const std::vector<double>& chi_list, const fs::path& out_root,
                             unsigned threads = 0, bool keep_trajectories = true) {
  if (chi_list.empty()) throw domain_error("sweep needs at least one chi");
  std::vector<RunConfig> configs;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < chi_list.size(); ++k) {
    RunConfig c = base;
    c.chi = chi_list[k];
    std::string name = "chi_" + format_number(chi_list[k]);
    if (std::find(names.begin(), names.end(), name) != names.end()) name += "_" + std::to_string(k);
    names.push_back(name);
    c.directory = (out_root / name).string();
    configs.push_back(std::move(c));
  }

  SweepResult result;
  result.rows.resize(configs.size());
  result.records.resize(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      SweepRow row;
      try {
        RunRecord rec = run_simulate(configs[k]);
        row = summarize(rec);
        if (!keep_trajectories) rec.trajectory.states.clear();
        result.records[k] = std::move(rec);
      } catch (const std::exception& e) {
        row.chi = configs[k].chi;
        row.status = std::string("error: ") + e.what();
        row.directory = configs[k].directory;
        result.records[k].config = configs[k];
        result.records[k].message = e.what();
      }
      result.rows[k] = row;
    }
  };
  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(configs.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fs::create_directories(out_root);
  write_text(out_root / "summary.csv", summary_csv(result.rows));
  return result;
}

// ---------------------------------------------------------------- figure presets

enum class Figure { short_time, long_time, solution };

inline Figure parse_figure(const std::string& which) {
  if (which == "short") return Figure::short_time;
  if (which == "long") return Figure::long_time;
  if (which == "soln") return Figure::solution;
  throw domain_error("unknown figure '" + which + "'; expected short, long or soln");
}

inline const char* to_string(Figure f) {
  switch (f) {
    case Figure::short_time: return "short";
    case Figure::long_time: return "long";
    case Figure::solution: return "soln";
  }
  return "?";
}

struct FigurePreset {
  RunConfig base;
  std::vector<double> chi_list;
};

/// u0 = v0 = e^{-x}, B1 = B2 = 1 on (0, 1), upwind faces for chi >= 100.
inline FigurePreset figure_preset(Figure which, std::size_t n_cells = 400) {
  FigurePreset p;
  RunConfig& c = p.base;
  c.length = 1.0;
  c.n_cells = n_cells;
  c.face = FaceChoice::automatic;
  c.upwind_threshold = 100.0;
  c.b1 = "const:1";
  c.b2 = "const:1";
  c.u0 = "expneg";
  c.v0 = "expneg";
  c.controller.dt_init = 1e-6;
  c.controller.rel_tol = 1e-4;
  c.controller.abs_tol = 1e-8;
  c.controller.cfl_fraction = 0.9;
  switch (which) {
    case Figure::short_time:
      c.t_end = 0.05;
      c.output_interval = 0.001;
      c.controller.dt_max = 0.001;
      p.chi_list = {20, 50, 100, 150, 500, 1000};
      break;
    case Figure::long_time:
      c.t_end = 5.0;
      c.output_interval = 0.05;
      c.controller.dt_max = 0.05;
      p.chi_list = {20, 50, 100, 150, 500, 1000};
      break;
    case Figure::solution:
      c.t_end = 20.0;
      c.output_interval = 0.5;
      c.controller.dt_max = 0.05;
      p.chi_list = {12, 13, 20, 50};
      break;
  }
  return p;
}

inline SweepResult reproduce_figure(Figure which, const fs::path& out_root, std::size_t n_cells = 400,
                                    unsigned threads = 0) {
  const FigurePreset preset = figure_preset(which, n_cells);
  const fs::path dir = out_root / to_string(which);
  SweepResult res = run_sweep(preset.base, preset.chi_list, dir, threads);

  svg::Chart chart;
  if (which == Figure::solution) {
    chart = {"u at t = " + format_number(preset.base.t_end), "x", "u", {}};
    const Grid grid = preset.base.grid();
    for (const auto& rec : res.records)
      if (!rec.trajectory.states.empty())
        chart.series.push_back({"chi = " + format_number(rec.config.chi), grid.centers(), rec.trajectory.states.back().u});
  } else {
    chart = {"max u, t in [0, " + format_number(preset.base.t_end) + "]", "t", "max u", {}};
    for (const auto& rec : res.records) {
      svg::Series s{"chi = " + format_number(rec.config.chi), {}, {}};
      for (const auto& r : rec.trajectory.rows) {
        s.x.push_back(r.t);
        s.y.push_back(r.sup_u);
      }
      chart.series.push_back(std::move(s));
    }
  }
  write_text(dir / "figure.svg", svg::render(chart));
  return res;
}

// ---------------------------------------------------------------- diagnose

/// Re-derives diagnostics from a run directory written by run_simulate:
/// rows for every stored profile, hypothesis verdicts for B1 and B2, the
/// v-balance checked against the linear ODE inequality, and convergence of
/// the stored profiles toward v_inf of the limit of B2.
inline nlohmann::json diagnose_run(const fs::path& dir, double eps = 1e-3) {
  std::ifstream in(dir / "run.json");
  if (!in) throw error("no run.json in " + dir.string());
  const auto record = nlohmann::json::parse(in);
  const RunConfig config = parse_config(record.at("config").get<std::string>());
  const Grid grid = config.grid();
  const DiagnosticsConfig dcfg = config.diagnostics();

  Trajectory traj;
  traj.status = record.at("status") == "completed" ? RunStatus::completed
                : record.at("status") == "dt_underflow" ? RunStatus::dt_underflow
                                                         : RunStatus::positivity_failure;
  std::vector<std::pair<double, fs::path>> profiles;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("profile_t", 0) == 0 && entry.path().extension() == ".csv") {
      const auto t = parse_number(name.substr(9, name.size() - 9 - 4));
      if (t) profiles.emplace_back(*t, entry.path());
    }
  }
  std::sort(profiles.begin(), profiles.end());
  for (const auto& [t, path] : profiles) {
    const auto rows = read_csv(path, kProfileHeader);
    if (rows.size() != grid.n_cells()) throw error(path.string() + ": wrong number of cells");
    State s;
    s.t = t;
    for (const auto& r : rows) {
      s.u.push_back(r.at(1));
      s.v.push_back(r.at(2));
    }
    traj.rows.push_back(diagnostics_row(s, grid, dcfg, config.chi));
    traj.states.push_back(std::move(s));
  }

  nlohmann::json out;
  out["directory"] = dir.string();
  out["status"] = to_string(traj.status);
  out["rows"] = nlohmann::json::array();
  for (const auto& r : traj.rows)
    out["rows"].push_back({{"t", r.t},
                           {"mass_u", r.mass_u},
                           {"mass_v", r.mass_v},
                           {"int_uv", r.int_uv},
                           {"sup_u", r.sup_u},
                           {"sup_v", r.sup_v},
                           {"min_v", r.min_v},
                           {"lr_norms", r.lr_norms},
                           {"entropy", r.entropy},
                           {"diss_u", r.diss_u},
                           {"diss_v", r.diss_v},
                           {"holder_u", r.holder_u},
                           {"holder_v", r.holder_v},
                           {"exponents_admissible", r.exponents_admissible}});

  const SourceSpec b1 = make_source(config.b1, config.length);
  const SourceSpec b2 = make_source(config.b2, config.length);
  const double horizon = std::max(config.t_end, 1.0);
  const auto h1 = hypothesis_check(b1, horizon, grid);
  const auto h2 = hypothesis_check(b2, horizon, grid);
  out["hypotheses"] = {{"H1", {{"verdict", to_string(h1.h1)}, {"integral", h1.h1_integral}, {"tail_bound", h1.h1_tail_bound}}},
                       {"H1prime", {{"verdict", to_string(h1.h1prime)}, {"window", h1.h1prime_window}}},
                       {"H2", {{"verdict", to_string(h2.h2)}, {"inf_mass", h2.h2_inf}}},
                       {"H3", {{"verdict", to_string(h2.h3)}, {"window", h2.h3_window}}}};

  // d/dt int v + int v = int uv + int B2 is an equality, so the recorded
  // series must satisfy the ODE-inequality bound with a = 1.
  const fs::path ts = dir / "timeseries.csv";
  if (fs::exists(ts)) {
    const auto rows = read_csv(ts, kTimeseriesHeader);
    std::vector<double> t, y, h;
    for (const auto& r : rows) {
      t.push_back(r[0]);
      y.push_back(r[2]);
      double b2_mass = 0.0;
      for (std::size_t i = 0; i < grid.n_cells(); ++i) b2_mass += b2(grid.center(i), r[0]);
      h.push_back(r[3] + b2_mass * grid.h());
    }
    if (t.size() >= 2 && t.back() - t.front() >= config.tau) {
      OdeBoundOptions o;
      o.slack = 1e-3 * (1.0 + *std::max_element(y.begin(), y.end()));
      const auto rep = ode_bound_check(t, y, h, 1.0, config.tau, o);
      out["v_mass_bound"] = {{"b", rep.b},
                             {"bound", rep.bound},
                             {"max_y", rep.max_y},
                             {"bound_holds", rep.bound_holds},
                             {"inequality_holds", rep.inequality_holds}};
    }
  }

  if (h2.limit_profile && traj.status == RunStatus::completed && !traj.states.empty()) {
    const Field v_inf = solve_vinfty(SteadyProblem(*h2.limit_profile, grid));
    const auto conv = convergence_check(traj, v_inf, eps);
    out["convergence"] = {{"eps", eps},
                          {"attained", conv.attained},
                          {"entry_time", conv.attained ? nlohmann::json(conv.entry_time) : nlohmann::json(nullptr)},
                          {"final_v_error", conv.final_v_error},
                          {"final_sup_u", conv.final_sup_u}};
  }
  return out;
}

}  // namespace crimelab
