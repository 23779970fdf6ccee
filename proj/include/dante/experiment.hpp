#ifndef DANTE_EXPERIMENT_HPP
#define DANTE_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dante/problems.hpp"

namespace dante {

/// Value grammar of one configuration key.
enum class KeyType { Real, Count, Text, Choice, RealList, MatrixText };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* choices;  ///< '|'-separated, for KeyType::Choice
  const char* help;
};

/// All recognized keys, in documentation order.
const std::vector<KeySpec>& config_keys();

/**
 * Flat key/value run configuration.
 *
 * File grammar: one `key = value` per line; `#` starts a comment; blank
 * lines are ignored; later assignments win. Keys are matched after mapping
 * '-' to '_', so `n-outer` and `n_outer` are the same key. Unknown keys and
 * malformed values are rejected when set.
 */
class RunConfig {
 public:
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  /// Parses file text; `origin` names the source in error messages.
  void load_text(const std::string& text, const std::string& origin = "<text>");

  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const { return get(key).has_value(); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string normalize_key(const std::string& key);

/// One trace.csv line. NaN marks an absent value (written as an empty field).
struct TraceCsvRow {
  std::size_t n = 0;
  double beta = 0.0;
  double epsilon = 0.0;
  double tracking_error = kUnavailable;
  double lambda = 1.0;
  double weight_sum = 0.0;
  std::size_t inner_iterations = 0;
  double gap_opt = kUnavailable;
  double gap_feas = kUnavailable;
  double bound_opt = kUnavailable;
  double bound_feas = kUnavailable;
  double err_to_ref = kUnavailable;
  double lower_obj = kUnavailable;
};

inline constexpr const char* kTraceCsvHeader =
    "n,beta_n,eps_n,e_n,lambda_n,S_n,inner_iters,gap_opt,gap_feas,bound_opt,bound_feas,err_to_ref,lower_obj";

struct ExperimentResult {
  ProblemInstance instance;
  DanteConfig config;
  DanteResult run;
  std::vector<TraceCsvRow> rows;
  /// Numeric summary entries in output order.
  std::vector<std::pair<std::string, double>> metrics;
  /// Text summary entries in output order.
  std::vector<std::pair<std::string, std::string>> info;
  std::string output_dir;
  double wall_seconds = 0.0;

  std::optional<double> metric(const std::string& name) const;
};

/// Builds the problem instance named by `experiment` with all overrides.
ProblemInstance build_instance(const RunConfig& config);
/// DanteConfig from the instance defaults and the overrides.
DanteConfig build_dante_config(const RunConfig& config, const ProblemInstance& instance);

/**
 * Builds the instance, runs the solver, evaluates gaps, monitors and bounds
 * on every `log_every`-th outer step (and the last), and assembles the
 * summary. Throws ConfigError for bad configurations and the solver's
 * exceptions for runtime failures. Nothing is written to disk.
 */
ExperimentResult run_experiment(const RunConfig& config);

/// %.17g, empty for NaN.
std::string format_real(double value);

void write_trace_csv(const std::string& path, const std::vector<TraceCsvRow>& rows);
/// trace.csv, summary.txt and, for image problems, restored.pgm,
/// original.pgm and corrupted.pgm. Creates the directory.
void write_outputs(const ExperimentResult& result, const std::string& dir);

}  // namespace dante

#endif  // DANTE_EXPERIMENT_HPP
