// adammcmc command-line front end: run, scan, compare-mh, verify.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "adammcmc/acceptance.hpp"
#include "adammcmc/config.hpp"
#include "adammcmc/diagnostics.hpp"
#include "adammcmc/experiment.hpp"

namespace fs = std::filesystem;
using namespace adammcmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitNumerical = 3;

constexpr const char* kOutRootEnv = "ADAMMCMC_OUT_ROOT";

// Relative output paths are placed under $ADAMMCMC_OUT_ROOT when it is set.
fs::path resolve_out(const std::string& dir) {
  fs::path p(dir);
  if (const char* root = std::getenv(kOutRootEnv); root != nullptr && *root != '\0' && p.is_relative()) {
    p = fs::path(root) / p;
  }
  return p;
}

RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                      const std::optional<std::string>& out) {
  RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::load(path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("grid", "not a number: " + item);
    }
    if (used != item.size()) throw ConfigError("grid", "not a number: " + item);
    grid.push_back(v);
  }
  if (grid.empty()) throw ConfigError("grid", "empty grid");
  return grid;
}

int cmd_run(const RunConfig& cfg) {
  const Experiment exp = build_experiment(cfg);
  const RunResult result = run_experiment(exp);
  const fs::path dir = resolve_out(cfg.out_dir);
  write_run_artifacts(dir, exp, result);
  std::cout << "acceptance " << result.metrics.acceptance_rate << "\n";
  if (result.metrics.test_accuracy) std::cout << "test_accuracy " << *result.metrics.test_accuracy << "\n";
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_scan(const RunConfig& cfg, const std::string& param, const std::string& grid_text,
             int jobs, int replicates) {
  if (!is_scan_param(param)) throw ConfigError("param", "cannot scan '" + param + "'");
  const std::vector<double> grid = parse_grid(grid_text);
  if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (replicates < 1) throw ConfigError("replicates", "must be >= 1");
  for (double v : grid) {
    RunConfig probe = cfg;
    set_scan_param(probe, param, v);
    probe.validate();
  }
  const auto rows = scan_acceptance(cfg, param, grid, replicates, jobs);
  const fs::path dir = resolve_out(cfg.out_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "scan.csv");
    write_scan_csv(f, rows);
  }
  {
    auto f = open_out(dir / "scan_long.csv");
    write_scan_long_csv(f, rows);
  }
  const auto means = mean_acceptance_by_value(rows, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::cout << param << "=" << grid[i] << " mean_acceptance " << means[i] << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

void write_stats(nlohmann::ordered_json& j, const char* key, const ChainStats& s) {
  j[key] = {{"mean_acceptance", s.mean_acceptance}, {"loss_mean", s.loss_mean}, {"loss_var", s.loss_var}};
}

int cmd_compare_mh(const RunConfig& cfg) {
  if (cfg.batch_size <= 0) throw ConfigError("batch_size", "compare-mh needs batch_size > 0");
  const MhComparison cmp = compare_full_vs_stochastic_mh(cfg, cfg.steps, cfg.burn_in);
  const fs::path dir = resolve_out(cfg.out_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "stochastic_record.csv");
    cmp.stochastic.write_csv(f);
  }
  {
    auto f = open_out(dir / "full_record.csv");
    cmp.full.write_csv(f);
  }
  {
    auto f = open_out(dir / "full_data_loss.csv");
    f << "step,stochastic,full\n";
    f.precision(17);
    for (std::size_t i = 0; i < cmp.full_full_loss.size(); ++i) {
      f << (i + 1) << ',' << cmp.stochastic_full_loss[i] << ',' << cmp.full_full_loss[i] << '\n';
    }
  }
  nlohmann::ordered_json j;
  j["schema_version"] = kArtifactSchemaVersion;
  j["config_hash"] = cfg.hash();
  j["steps"] = cfg.steps;
  j["burn_in"] = cfg.burn_in;
  write_stats(j, "stochastic", cmp.stochastic_stats);
  write_stats(j, "full", cmp.full_stats);
  {
    auto f = open_out(dir / "comparison.json");
    f << j.dump(2) << '\n';
  }
  std::cout << "stochastic acceptance " << cmp.stochastic_stats.mean_acceptance << " loss_mean "
            << cmp.stochastic_stats.loss_mean << "\n"
            << "full       acceptance " << cmp.full_stats.mean_acceptance << " loss_mean "
            << cmp.full_stats.loss_mean << "\n"
            << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_verify(bool quick, const std::optional<std::string>& out, int jobs) {
  SuiteOptions opts;
  opts.quick = quick;
  opts.jobs = jobs;
  if (out) opts.out_dir = resolve_out(*out);
  opts.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
  const auto results = run_acceptance_suite(opts);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AdamMCMC sampler experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out, "output directory (overrides out_dir)");
  };

  auto* run = app.add_subcommand("run", "run one chain and write its artifacts");
  add_common(run);

  std::string param;
  std::string grid;
  int jobs = 1;
  int replicates = 3;
  auto* scan = app.add_subcommand("scan", "acceptance scan over one hyperparameter");
  add_common(scan);
  scan->add_option("--param", param, "sigma | sigma_dir | beta | lambda")->required();
  scan->add_option("--grid", grid, "comma-separated values")->required();
  scan->add_option("--jobs", jobs, "parallel chains");
  scan->add_option("--replicates", replicates, "seeds per grid value");

  auto* compare = app.add_subcommand("compare-mh", "stochastic vs full-data M-H on matched chains");
  add_common(compare);

  bool quick = false;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_flag("--quick", quick, "skip the micro-MLP trend criteria");
  verify->add_option("--out", out, "directory for per-criterion data");
  verify->add_option("--jobs", jobs, "parallel chains in scans");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadConfig;
  }

  try {
    if (*verify) return cmd_verify(quick, out, jobs);
    const RunConfig cfg = load_config(config_path, seed, out);
    if (*run) return cmd_run(cfg);
    if (*scan) return cmd_scan(cfg, param, grid, jobs, replicates);
    if (*compare) return cmd_compare_mh(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitFailed;
}
