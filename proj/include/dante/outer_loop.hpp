#ifndef DANTE_OUTER_LOOP_HPP
#define DANTE_OUTER_LOOP_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dante/encodings.hpp"
#include "dante/inner_loop.hpp"

namespace dante {

enum class ScheduleKind { Monotone, StronglyMonotone };

/// Tikhonov and tolerance schedules.
///   monotone:          beta_n = (n + 1)^{-b}
///   strongly monotone: beta_n = alpha / (2 mu n + xi)
///   tolerance:         eps_n  = eps_bar (n + 1)^{-eps_exponent}
struct Schedules {
  ScheduleKind kind = ScheduleKind::Monotone;
  double b = 0.55;
  double xi = 1.0;
  double eps_bar = 1e-3;
  double eps_exponent = 2.0;

  double beta(std::size_t n, double alpha, double mu) const;
  double epsilon(std::size_t n) const;
  /// Power-law check that eps_n / beta_n -> 0: the tolerance exponent must
  /// exceed b (monotone) or 1 (strongly monotone).
  bool tolerance_vanishes_faster() const;
};

double beta_monotone(std::size_t n, double b);
double beta_strong(std::size_t n, double alpha, double mu, double xi);

/// (S_n w_bar_n + lambda_n beta_n w_{n+1}) / S_{n+1}; returns w_{n+1}
/// unchanged when S_n = 0.
Vector averaged_update(const Vector& average, double weight_sum, double weight_sum_next, double lambda,
                       double beta, const Vector& anchor_next);

struct KmSettings {
  double theta = 0.7;
  /// Fixed momentum; when absent tau = tau_safety * max_tau(theta, q_bar).
  std::optional<double> tau;
  double tau_safety = 0.99;
  /// When absent: 10 * K_bar(eps_n) in contraction mode with a bounded
  /// domain, otherwise kDefaultHardCap.
  std::optional<std::size_t> hard_cap;
};

inline constexpr std::size_t kDefaultHardCap = 1000000;

struct DanteConfig {
  double alpha = 1.0;
  double mu = 0.0;
  std::size_t n_outer = 100;
  Schedules schedules;
  EncodingKind encoding = EncodingKind::ForwardBackward;
  KmSettings km;
  /// Forward step override. Default: alpha / L^2 for FB/BF; for TOS
  /// 0.99 * eta * alpha / L^2 when B is Lipschitz (contraction mode),
  /// alpha / L^2 otherwise.
  std::optional<double> gamma;
  double tos_eta = 0.5;
  Vector w0;
  /// Full points are kept in the trace only up to this dimension.
  Index point_storage_limit = 64;
};

inline constexpr double kUnavailable = std::numeric_limits<double>::quiet_NaN();

struct TraceRow {
  std::size_t n = 0;
  double beta = 0.0;
  double epsilon = 0.0;
  double tracking_error = kUnavailable;  ///< e_n, NaN in nonexpansive mode
  double lambda = 1.0;                   ///< lambda_n
  double lambda_next = 1.0;              ///< lambda_{n+1}
  double weight_sum = 0.0;               ///< S_{n+1} = sum_{k<=n} lambda_k beta_k
  double q = 1.0;
  double gamma = kUnavailable;
  std::size_t inner_iterations = 0;
  std::size_t inner_cap = 0;
  bool hit_cap = false;
  double inner_residual = 0.0;
  Vector anchor;   ///< w_{n+1}; empty when the dimension exceeds the storage limit
  Vector average;  ///< w_bar_{n+1}; same rule
  double anchor_norm = 0.0;
  double average_norm = 0.0;
  std::map<std::string, double> diagnostics;
};

struct Trace {
  Vector initial_anchor;  ///< w_0 (empty when not stored)
  std::vector<TraceRow> rows;
  double alpha = 0.0;
  double mu = 0.0;
  double theta = 0.0;
  double tau = 0.0;
  double q_bar = 1.0;          ///< max_n q_n
  double relaxed_bar = 1.0;    ///< Q_bar = 1 - theta (1 - q_bar^2)
  double domain_diameter = std::numeric_limits<double>::infinity();
  std::optional<double> iteration_constant;  ///< C, contraction mode with bounded domain
  std::size_t total_inner_iterations = 0;
  std::size_t cap_breaches = 0;

  bool contraction_mode() const { return q_bar < 1.0; }
  bool points_stored() const { return initial_anchor.size() > 0; }
};

struct DanteResult {
  Vector average;  ///< w_bar_N
  Vector anchor;   ///< w_N
  Trace trace;
};

struct IterationView {
  std::size_t n;
  const Vector& anchor;   ///< w_{n+1}
  const Vector& average;  ///< w_bar_{n+1}
  TraceRow& row;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// Encoding of the auxiliary problem at (anchor, beta) as configured.
Encoding make_encoding(const OperatorBundle& bundle, const DanteConfig& config, const Vector& anchor, double beta);

/**
 * Double-loop tracking method. For n = 0..N-1 the inner loop is started at
 * the current anchor w_n on the encoding at (w_n, beta_n), the transported
 * result becomes w_{n+1}, and the weighted average w_bar is updated with
 * weights lambda_n beta_n, lambda_{n+1} = lambda_n (1 + 2 mu beta_n / alpha).
 *
 * The momentum is constant across the whole run, chosen from the largest
 * contraction factor over all outer steps so that it is admissible for every
 * inner loop. A hard-cap breach aborts the run with InnerLoopCapExceeded in
 * contraction mode and is recorded and skipped over in nonexpansive mode.
 *
 * The observer, when given, runs after every outer step and may add
 * diagnostics to the row.
 */
DanteResult dante_run(const OperatorBundle& bundle, const DanteConfig& config,
                      const IterationObserver& observer = {});

/// (N (2 log C + log Q_bar) + 2 sum_{n=1}^{N} log(1 / eps_n)) / log(1 / Q_bar).
double combined_inner_bound(std::size_t n_outer, double c_const, double q_relaxed_bar, const Schedules& schedules);
/// sum_{n=0}^{N-1} K_bar(eps_n), the per-loop caps summed.
double summed_inner_caps(std::size_t n_outer, double c_const, double q_relaxed_bar, const Schedules& schedules);

}  // namespace dante

#endif  // DANTE_OUTER_LOOP_HPP
