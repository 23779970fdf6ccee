// dante: run, sweep and verify the double-loop hierarchical VI solver.

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dante/dante.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kDefaultOutputDir = "dante_out";

int exit_code_for(dante_status status) {
  switch (status) {
    case DANTE_OK: return 0;
    case DANTE_ERR_CONFIG:
    case DANTE_ERR_ARGUMENT: return kExitConfig;
    default: return kExitRuntime;
  }
}

struct ConfigDeleter {
  void operator()(dante_config* c) const { dante_config_destroy(c); }
};
struct RunDeleter {
  void operator()(dante_run* r) const { dante_run_destroy(r); }
};
using ConfigPtr = std::unique_ptr<dante_config, ConfigDeleter>;
using RunPtr = std::unique_ptr<dante_run, RunDeleter>;

struct CliError {
  int code;
  std::string message;
};

void check(dante_status status, const std::string& context) {
  if (status != DANTE_OK) throw CliError{exit_code_for(status), context + ": " + dante_last_error()};
}

std::string config_value(const dante_config* cfg, const char* key, const std::string& fallback) {
  size_t length = 0;
  if (dante_config_get(cfg, key, nullptr, 0, &length) != DANTE_OK) return fallback;
  std::string value(length, '\0');
  check(dante_config_get(cfg, key, value.data(), length + 1, &length), "reading key");
  return value;
}

/// Options shared by run and sweep: experiment, --config, --out and one flag per key.
struct RunOptions {
  std::string experiment;
  std::string config_file;
  std::string out;
  std::map<std::string, std::string> flags;

  void attach(CLI::App& cmd) {
    cmd.add_option("experiment", experiment, "equilibrium, lnls, inpainting or custom");
    cmd.add_option("--config,-c", config_file, "key = value configuration file");
    cmd.add_option("--out,-o", out, "output directory (DANTE_OUT overrides)");
    const size_t count = dante_config_key_count();
    for (size_t i = 0; i < count; ++i) {
      const char* name = nullptr;
      const char* kind = nullptr;
      const char* help = nullptr;
      dante_config_key_info(i, &name, &kind, &help);
      std::string key = name;
      if (key == "experiment" || key == "output_dir") continue;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      std::string flag = "--" + dashed;
      if (dashed != key) flag += ",--" + key;
      cmd.add_option_function<std::string>(
             flag, [this, key](const std::string& v) { flags[key] = v; }, std::string(help) + " [" + kind + "]")
          ->allow_extra_args(false);
    }
  }

  /// File first, then flags, then DANTE_OUT.
  ConfigPtr build() const {
    dante_config* raw = nullptr;
    check(dante_config_create(&raw), "config");
    ConfigPtr cfg(raw);
    if (!config_file.empty()) check(dante_config_load_file(cfg.get(), config_file.c_str()), "config file");
    if (!experiment.empty()) check(dante_config_set(cfg.get(), "experiment", experiment.c_str()), "experiment");
    for (const auto& [key, value] : flags) check(dante_config_set(cfg.get(), key.c_str(), value.c_str()), "--" + key);
    if (!out.empty()) check(dante_config_set(cfg.get(), "output_dir", out.c_str()), "--out");
    if (const char* env = std::getenv("DANTE_OUT"); env && *env) {
      check(dante_config_set(cfg.get(), "output_dir", env), "DANTE_OUT");
    }
    return cfg;
  }
};

double summary_or_nan(const dante_run* run, const char* name) {
  double v = 0.0;
  return dante_run_summary_value(run, name, &v) == DANTE_OK ? v : std::numeric_limits<double>::quiet_NaN();
}

std::string fmt(double v) {
  if (std::isnan(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_run(const RunOptions& opts) {
  ConfigPtr cfg = opts.build();
  const std::string dir = config_value(cfg.get(), "output_dir", kDefaultOutputDir);
  dante_run* raw = nullptr;
  check(dante_run_execute(cfg.get(), &raw), "run");
  RunPtr run(raw);
  check(dante_run_write(run.get(), dir.c_str()), "write");
  size_t n = 0;
  dante_run_outer_iterations(run.get(), &n);
  std::printf("outer iterations: %zu\n", n);
  for (const char* key : {"total_inner_iterations", "final_gap_opt", "final_gap_feas", "final_err_to_ref",
                          "final_lower_obj", "wall_time_seconds"}) {
    const double v = summary_or_nan(run.get(), key);
    if (!std::isnan(v)) std::printf("%s: %.6g\n", key, v);
  }
  std::printf("outputs: %s\n", dir.c_str());
  return 0;
}

const std::vector<std::string> kSweepKeys = {"alpha", "encoding", "b", "seed"};

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

std::vector<GridAxis> parse_grid(const std::vector<std::string>& specs) {
  std::vector<GridAxis> axes;
  for (const std::string& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CliError{kExitConfig, "grid '" + spec + "': expected key=v1,v2,..."};
    GridAxis axis;
    axis.key = spec.substr(0, eq);
    std::replace(axis.key.begin(), axis.key.end(), '-', '_');
    if (axis.key == "encoding_kind") axis.key = "encoding";
    if (std::find(kSweepKeys.begin(), kSweepKeys.end(), axis.key) == kSweepKeys.end()) {
      throw CliError{kExitConfig, "grid key '" + axis.key + "' is not one of alpha, encoding, b, seed"};
    }
    std::stringstream ss(spec.substr(eq + 1));
    std::string v;
    while (std::getline(ss, v, ',')) {
      if (!v.empty()) axis.values.push_back(v);
    }
    if (axis.values.empty()) throw CliError{kExitConfig, "grid '" + spec + "' has no values"};
    for (const auto& other : axes) {
      if (other.key == axis.key) throw CliError{kExitConfig, "grid key '" + axis.key + "' given twice"};
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

struct Cell {
  std::vector<std::string> values;
  std::string dir_name;
  int code = 0;
  std::string error;
  double gap_opt = 0, gap_feas = 0, err = 0, obj = 0, inner = 0, seconds = 0;
};

int cmd_sweep(const RunOptions& opts, const std::vector<std::string>& grid_specs, unsigned jobs) {
  const std::vector<GridAxis> axes = parse_grid(grid_specs);
  if (axes.empty()) {
    std::printf("empty grid: nothing to do\n");
    return 0;
  }
  ConfigPtr base = opts.build();
  const std::filesystem::path root = config_value(base.get(), "output_dir", kDefaultOutputDir);

  std::vector<Cell> cells(1);
  for (const GridAxis& axis : axes) {
    std::vector<Cell> next;
    for (const Cell& c : cells) {
      for (const std::string& v : axis.values) {
        Cell cell = c;
        cell.values.push_back(v);
        cell.dir_name += (cell.dir_name.empty() ? "" : "_") + axis.key + "-" + v;
        next.push_back(cell);
      }
    }
    cells = std::move(next);
  }

  std::atomic<size_t> next_index{0};
  std::mutex print_mutex;
  auto worker = [&] {
    for (size_t i = next_index++; i < cells.size(); i = next_index++) {
      Cell& cell = cells[i];
      try {
        dante_config* raw = nullptr;
        check(dante_config_clone(base.get(), &raw), "config");
        ConfigPtr cfg(raw);
        for (size_t a = 0; a < axes.size(); ++a) {
          check(dante_config_set(cfg.get(), axes[a].key.c_str(), cell.values[a].c_str()), axes[a].key);
        }
        dante_run* run_raw = nullptr;
        check(dante_run_execute(cfg.get(), &run_raw), "run");
        RunPtr run(run_raw);
        check(dante_run_write(run.get(), (root / cell.dir_name).string().c_str()), "write");
        cell.gap_opt = summary_or_nan(run.get(), "final_gap_opt");
        cell.gap_feas = summary_or_nan(run.get(), "final_gap_feas");
        cell.err = summary_or_nan(run.get(), "final_err_to_ref");
        cell.obj = summary_or_nan(run.get(), "final_lower_obj");
        cell.inner = summary_or_nan(run.get(), "total_inner_iterations");
        cell.seconds = summary_or_nan(run.get(), "wall_time_seconds");
      } catch (const CliError& e) {
        cell.code = e.code;
        cell.error = e.message;
      }
      std::lock_guard<std::mutex> lock(print_mutex);
      std::printf("[%s] %s%s\n", cell.code == 0 ? "ok" : "FAILED", cell.dir_name.c_str(),
                  cell.code == 0 ? "" : (": " + cell.error).c_str());
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> threads;
  for (unsigned j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  std::ofstream index(root / "index.csv", std::ios::binary);
  if (!index) throw CliError{kExitRuntime, "cannot write " + (root / "index.csv").string()};
  index << "cell,dir";
  for (const GridAxis& axis : axes) index << ',' << axis.key;
  index << ",status,final_gap_opt,final_gap_feas,final_err_to_ref,final_lower_obj,total_inner_iterations,"
           "wall_time_seconds\n";
  int worst = 0;
  for (size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    index << i << ',' << c.dir_name;
    for (const std::string& v : c.values) index << ',' << v;
    if (c.code == 0) {
      index << ",ok," << fmt(c.gap_opt) << ',' << fmt(c.gap_feas) << ',' << fmt(c.err) << ',' << fmt(c.obj) << ','
            << fmt(c.inner) << ',' << fmt(c.seconds) << '\n';
    } else {
      index << ",failed,,,,,,\n";
      worst = std::max(worst, c.code);
    }
  }
  const auto failed = std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return c.code != 0; });
  std::printf("%zu cells, %ld failed; index: %s\n", cells.size(), static_cast<long>(failed),
              (root / "index.csv").string().c_str());
  if (failed > 0) {
    std::printf("failed cells:\n");
    for (const Cell& c : cells) {
      if (c.code != 0) std::printf("  %s: %s\n", c.dir_name.c_str(), c.error.c_str());
    }
  }
  return worst;
}

void print_row(const char* name, int passed, const char* detail, double seconds, void*) {
  std::printf("%-26s %-4s %8.2fs  %s\n", name, passed ? "PASS" : "FAIL", seconds, detail);
  std::fflush(stdout);
}

int cmd_verify(const std::string& only, const std::optional<double>& tamper_c1) {
  std::printf("%-26s %-4s %9s  %s\n", "check", "", "time", "detail");
  int failures = 0;
  check(dante_verify(only.c_str(), tamper_c1 ? 1 : 0, tamper_c1.value_or(0.0), print_row, nullptr, &failures),
        "verify");
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-loop tracking solver for hierarchical variational inequalities"};
  app.set_version_flag("--version", std::string(dante_version()));
  app.require_subcommand(1);

  RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "run one experiment and write trace.csv and summary.txt");
  run_opts.attach(*run);

  RunOptions sweep_opts;
  std::vector<std::string> grid;
  unsigned jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of experiments into subdirectories with an index.csv");
  sweep_opts.attach(*sweep);
  sweep->add_option("--grid,-g", grid, "key=v1,v2,... over alpha, encoding, b or seed (repeatable)");
  sweep->add_option("--jobs,-j", jobs, "cells run in parallel")->check(CLI::PositiveNumber);

  std::string only;
  std::optional<double> tamper_c1;
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance checks");
  verify->add_option("--only", only, "comma-separated subset of checks");
  verify->add_option("--tamper-c1", tamper_c1, "replace C1 in the energy check (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, grid, jobs);
    return cmd_verify(only, tamper_c1);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  }
}
