// Command-line driver: solve, sweep and verify.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "tvpath/diagnostics.hpp"
#include "tvpath/path_following.hpp"
#include "tvpath/run_config.hpp"
#include "verify_suites.hpp"

namespace fs = std::filesystem;
using namespace tvpath;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

struct RunFlags {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> extra;
};

void add_run_flags(CLI::App& app, RunFlags& flags) {
  app.add_option("--config", flags.config_file, "Key=value configuration file");
  const std::vector<std::pair<std::string, std::string>> mapped{
      {"--problem", "problem"},     {"--beta", "beta"},
      {"--n", "n"},                 {"--n-rings", "n_rings"},
      {"--n-sectors", "n_sectors"}, {"--gamma0", "gamma0"},
      {"--delta0", "delta0"},       {"--ratio", "ratio"},
      {"--forcing", "forcing_mode"}, {"--kappa", "kappa"},
      {"--nested-thresholds", "nested_grid_thresholds"},
      {"--out", "output_dir"},      {"--seed", "seed"},
  };
  for (const auto& [flag, key] : mapped) {
    app.add_option_function<std::string>(
        flag, [&flags, key = key](const std::string& v) { flags.overrides[key] = v; },
        "Overrides config key " + key);
  }
  app.add_option("--set", flags.extra, "Any other config key as key=value")->take_all();
}

RunConfig build_config(const RunFlags& flags) {
  RunConfig cfg = flags.config_file.empty() ? RunConfig{} : load_run_config(flags.config_file);
  for (const auto& kv : flags.extra) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : flags.overrides) cfg.set(k, v);
  if (cfg.output_dir.empty()) {
    const char* env = std::getenv("TVC_OUT_DIR");
    cfg.output_dir = env && *env ? env : ".";
  }
  return cfg;
}

struct RunSummary {
  PathStatus status = PathStatus::Failed;
  std::string failure;
  Scalar gamma_final = 0;
  int it = 0;
  int it_u = 0;
  std::optional<Scalar> e_j;
};

std::string summary_line(const RunSummary& s) {
  return "gamma_final=" + format_number(s.gamma_final) + " it=" + std::to_string(s.it) +
         " it_u=" + std::to_string(s.it_u) + " e_j=" + (s.e_j ? format_number(*s.e_j) : "na");
}

RunSummary run_one(RunConfig cfg, const fs::path& out_dir, bool verbose) {
  cfg.finalize();
  const ProblemSpec problem = cfg.make_problem();
  const MeshPtr mesh = cfg.make_mesh();
  fs::create_directories(out_dir);

  auto on_row = [verbose](const PathTraceRow& r) {
    if (!verbose) return;
    std::cerr << "i=" << r.i << " gamma=" << r.gamma << " sigma=" << r.sigma
              << " it=" << r.newton_steps << " it_u=" << r.control_steps
              << " j=" << r.objective << '\n';
  };
  const PathResult result = run_path(problem, mesh, cfg.path, cfg.newton, on_row);

  RunSummary s;
  s.status = result.status;
  s.failure = result.failure;
  s.gamma_final = result.gamma_final;
  s.it = result.total_newton_steps;
  s.it_u = result.total_control_steps;
  if (problem.exact && !result.trace.empty()) {
    const auto& last = result.trace.back();
    s.e_j = last.e_j ? *last.e_j : std::abs(last.objective - problem.exact->j_optimal);
  }

  write_trace_csv((out_dir / "trace.csv").string(), result.trace);
  const MeshPtr& final_mesh = result.disc->mesh;
  write_field_vtk((out_dir / "fields.vtk").string(), *final_mesh,
                  {{"u", result.u}, {"y", to_full_space(result.pair.y)},
                   {"p", to_full_space(result.pair.p)}});
  std::ofstream(out_dir / "summary.txt") << summary_line(s) << '\n';
  return s;
}

int cmd_solve(const RunFlags& flags) {
  RunConfig cfg = build_config(flags);
  const RunSummary s = run_one(cfg, cfg.output_dir, true);
  std::cout << summary_line(s) << std::endl;
  if (s.status != PathStatus::Terminated) {
    std::cerr << "solver failure: " << s.failure << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_sweep(const RunFlags& flags, const std::string& param, const std::string& values_text) {
  if (param != "sigma" && param != "ratio" && param != "beta") {
    throw ConfigError("sweep parameter must be sigma, ratio or beta, got '" + param + "'");
  }
  const std::vector<Scalar> values = parse_number_list(values_text);
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const RunConfig base = build_config(flags);
  const fs::path root = base.output_dir;
  fs::create_directories(root);

  std::ofstream table(root / "comparison.csv");
  table << "param,value,status,gamma_final,it,it_u,e_j\n";
  bool all_ok = true;
  for (Scalar v : values) {
    RunConfig cfg = base;
    const std::string text = format_number(v);
    if (param == "sigma") {
      cfg.path.fixed_sigma = v;
    } else if (param == "ratio") {
      cfg.ratio = v;
      cfg.delta0.reset();
    } else {
      cfg.beta = v;
    }
    RunSummary s;
    try {
      s = run_one(cfg, root / (param + "_" + text), false);
    } catch (const Error& e) {
      s.failure = e.what();
    }
    const bool ok = s.status == PathStatus::Terminated;
    all_ok = all_ok && ok;
    std::cout << param << '=' << text << ' ' << summary_line(s)
              << (ok ? "" : " failed: " + s.failure) << std::endl;
    table << param << ',' << text << ',' << (ok ? "terminated" : "failed") << ','
          << format_number(s.gamma_final) << ',' << s.it << ',' << s.it_u << ','
          << (s.e_j ? format_number(*s.e_j) : "") << '\n';
  }
  return all_ok ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-following inexact Newton solver for TV-regularized elliptic control"};
  app.require_subcommand(1);

  RunFlags solve_flags, sweep_flags;
  auto* solve = app.add_subcommand("solve", "Run one benchmark");
  add_run_flags(*solve, solve_flags);

  auto* sweep = app.add_subcommand("sweep", "Repeat a run over a list of parameter values");
  add_run_flags(*sweep, sweep_flags);
  std::string sweep_param, sweep_values;
  sweep->add_option("--param", sweep_param, "sigma, ratio or beta")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();

  auto* verify = app.add_subcommand("verify", "Run finite-difference oracle suites");
  std::string suite;
  std::uint64_t verify_seed = 1;
  verify->add_option("--suite", suite, "Suite name (gradients)")->required();
  verify->add_option("--seed", verify_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_param, sweep_values);
    if (suite != "gradients") throw ConfigError("unknown verify suite '" + suite + "'");
    return run_gradient_suite(verify_seed, std::cout) ? kExitOk : kExitSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}
