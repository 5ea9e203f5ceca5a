// Command-line front end: simulate, sweep, reproduce-figures, steady,
// exponents, bootstrap, diagnose.
//
// Exit codes: 0 success, 2 configuration error, 3 run terminated
// abnormally, 4 threshold or precondition error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crimelab/crimelab.hpp"

namespace {

using namespace crimelab;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kAbnormalRun = 3;
constexpr int kPrecondition = 4;

struct Globals {
  std::string config_path;
  std::string out;
  bool quiet = false;
};

RunConfig load_config(const Globals& g) {
  if (g.config_path.empty()) return RunConfig{};
  std::ifstream in(g.config_path);
  if (!in) throw config_error({"cannot open config file " + g.config_path});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void print_sweep(const SweepResult& res, bool quiet) {
  if (quiet) return;
  std::cout << summary_csv(res.rows);
}

int cmd_simulate(const Globals& g) {
  RunConfig c = load_config(g);
  if (!g.out.empty()) c.directory = g.out;
  const RunRecord rec = run_simulate(c);
  if (!g.quiet) {
    std::cout << "status: " << to_string(rec.status) << "\n"
              << "directory: " << c.directory << "\n"
              << "samples: " << rec.trajectory.rows.size() << ", accepted steps: " << rec.stats.accepted
              << ", rejected: " << rec.stats.rejected_error + rec.stats.rejected_positivity << "\n";
    if (!rec.message.empty()) std::cout << rec.message << "\n";
  }
  return rec.status == RunStatus::completed ? kOk : kAbnormalRun;
}

int cmd_sweep(const Globals& g, const std::vector<double>& chis, unsigned threads) {
  const RunConfig c = load_config(g);
  const fs::path out = g.out.empty() ? fs::path(c.directory) : fs::path(g.out);
  const SweepResult res = run_sweep(c, chis, out, threads, false);
  print_sweep(res, g.quiet);
  return res.all_completed() ? kOk : kAbnormalRun;
}

int cmd_reproduce(const Globals& g, const std::string& which, std::size_t n_cells, unsigned threads) {
  const fs::path out = g.out.empty() ? fs::path("figures") : fs::path(g.out);
  std::vector<Figure> figures;
  if (which == "all")
    figures = {Figure::short_time, Figure::long_time, Figure::solution};
  else
    figures = {parse_figure(which)};
  bool ok = true;
  for (Figure f : figures) {
    const SweepResult res = reproduce_figure(f, out, n_cells, threads);
    if (!g.quiet) std::cout << "# " << to_string(f) << "\n";
    print_sweep(res, g.quiet);
    ok = ok && res.all_completed();
  }
  return ok ? kOk : kAbnormalRun;
}

int cmd_steady(const Globals& g, std::string b2, double length, std::size_t n_cells, bool b2_given) {
  if (!g.config_path.empty()) {
    const RunConfig c = load_config(g);
    if (!b2_given) b2 = c.b2;
    length = c.length;
    n_cells = c.n_cells;
  }
  const Grid grid(length, n_cells);
  const SourceSpec spec = make_source(b2, length);
  const auto hyp = hypothesis_check(spec, 1.0, grid);
  // Time-dependent presets are solved against their large-time limit.
  const Field b2_inf = hyp.limit_profile ? *hyp.limit_profile : sample_source(spec, grid, 0.0);
  const SteadyProblem problem(b2_inf, grid);
  const Field v = solve_vinfty(problem);

  std::ostringstream os;
  os << "x,b2_inf,v_inf\n";
  for (std::size_t i = 0; i < grid.n_cells(); ++i)
    os << format_number(grid.center(i)) << ',' << format_number(b2_inf[i]) << ',' << format_number(v[i]) << '\n';
  if (g.out.empty()) {
    std::cout << os.str();
  } else {
    write_text(g.out, os.str());
  }
  if (!g.quiet) std::cerr << "residual: " << steady_residual(v, problem) << "\n";
  return kOk;
}

int cmd_exponents(double chi, std::optional<double> p, std::optional<double> q) {
  namespace ex = exponents;
  nlohmann::json j;
  j["chi"] = chi;
  j["chi_max"] = ex::chi_max();
  j["below_threshold"] = chi < ex::chi_max();
  j["p0"] = ex::p_zero();
  j["p_star"] = ex::p_star(chi);
  if (p) {
    const auto w = ex::q_window(*p, chi);
    j["p"] = *p;
    j["q_minus"] = w.q_minus;
    j["q_plus"] = w.q_plus;
    if (*p < ex::p_star(chi)) {
      const auto f = ex::phi(*p, chi);
      j["phi1"] = f.phi1;
      j["phi2"] = f.phi2;
      j["phi3"] = f.phi3;
    }
    if (q) {
      j["q"] = *q;
      j["admissible"] = w.contains(*q);
    }
  }
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_bootstrap(const Globals& g, double chi, double r_target) {
  const auto seq = exponents::bootstrap_sequence(chi, r_target);
  std::ostringstream os;
  os << "k,p_k,r_k,q_k\n";
  for (std::size_t k = 0; k < seq.size(); ++k)
    os << k << ',' << format_number(seq.p_seq[k]) << ',' << format_number(seq.r_seq[k]) << ','
       << format_number(seq.q_seq[k]) << '\n';
  if (g.out.empty())
    std::cout << os.str();
  else
    write_text(g.out, os.str());
  return kOk;
}

int cmd_diagnose(const Globals& g, const std::string& run_dir, double eps) {
  const std::string dir = !run_dir.empty() ? run_dir : g.out;
  if (dir.empty()) throw config_error({"diagnose needs --run DIR"});
  const auto report = diagnose_run(dir, eps);
  write_text(fs::path(dir) / "diagnose.json", report.dump(2) + "\n");
  if (!g.quiet) std::cout << report.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crimelab: one-dimensional urban-crime cross-diffusion laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Run configuration file");
  app.add_option("--out", g.out, "Output directory (or file for table commands)");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  auto* simulate = app.add_subcommand("simulate", "Run one simulation from a config file");

  std::vector<double> sweep_chis;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Run the config for several chi values");
  sweep->add_option("--chi", sweep_chis, "chi values")->required()->delimiter(',');
  sweep->add_option("--threads", threads, "Concurrent runs (0 = hardware)");

  std::string which = "all";
  std::size_t fig_cells = 400;
  auto* reproduce = app.add_subcommand("reproduce-figures", "Rerun the short, long and profile experiments");
  reproduce->add_option("--which", which, "short, long, soln or all")
      ->check(CLI::IsMember({"short", "long", "soln", "all"}));
  reproduce->add_option("--n-cells", fig_cells, "Grid cells");
  reproduce->add_option("--threads", threads, "Concurrent runs (0 = hardware)");

  std::string b2 = "const:1";
  double length = 1.0;
  std::size_t n_cells = 200;
  auto* steady = app.add_subcommand("steady", "Solve -v'' + v = B2_inf with no-flux ends");
  auto* b2_opt = steady->add_option("--b2", b2, "B2 preset");
  steady->add_option("--length", length, "Domain length");
  steady->add_option("--n-cells", n_cells, "Grid cells");

  double chi = 2.0;
  std::optional<double> p;
  std::optional<double> q;
  auto* exps = app.add_subcommand("exponents", "Exponent window, auxiliary functions and thresholds");
  exps->add_option("--chi", chi, "chi")->required();
  exps->add_option("--p", p, "p");
  exps->add_option("--q", q, "q");

  double r_target = 100.0;
  auto* boot = app.add_subcommand("bootstrap", "Bootstrap sequence (p_k, r_k, q_k)");
  boot->add_option("--chi", chi, "chi")->required();
  boot->add_option("--r-target", r_target, "Stop once r_k reaches this value");

  std::string run_dir;
  double eps = 1e-3;
  auto* diag = app.add_subcommand("diagnose", "Recompute diagnostics from a stored run");
  diag->add_option("--run", run_dir, "Run directory");
  diag->add_option("--eps", eps, "Convergence tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(g);
    if (*sweep) return cmd_sweep(g, sweep_chis, threads);
    if (*reproduce) return cmd_reproduce(g, which, fig_cells, threads);
    if (*steady) return cmd_steady(g, b2, length, n_cells, b2_opt->count() > 0);
    if (*exps) return cmd_exponents(chi, p, q);
    if (*boot) return cmd_bootstrap(g, chi, r_target);
    if (*diag) return cmd_diagnose(g, run_dir, eps);
  } catch (const config_error& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return kConfigError;
  } catch (const threshold_error& e) {
    std::cerr << "threshold error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const crimelab::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
