#include "dante/outer_loop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dante/errors.hpp"

namespace dante {

double beta_monotone(std::size_t n, double b) {
  if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("beta_monotone: b must lie in (0, 1)");
  return std::pow(static_cast<double>(n) + 1.0, -b);
}

double beta_strong(std::size_t n, double alpha, double mu, double xi) {
  if (!(mu > 0.0)) throw std::invalid_argument("beta_strong: mu must be positive (use beta_monotone)");
  if (!(xi > 0.0)) throw std::invalid_argument("beta_strong: xi must be positive");
  return alpha / (2.0 * mu * static_cast<double>(n) + xi);
}

double Schedules::beta(std::size_t n, double alpha, double mu) const {
  return kind == ScheduleKind::Monotone ? beta_monotone(n, b) : beta_strong(n, alpha, mu, xi);
}

double Schedules::epsilon(std::size_t n) const {
  return eps_bar * std::pow(static_cast<double>(n) + 1.0, -eps_exponent);
}

bool Schedules::tolerance_vanishes_faster() const {
  return eps_exponent > (kind == ScheduleKind::Monotone ? b : 1.0);
}

Vector averaged_update(const Vector& average, double weight_sum, double weight_sum_next, double lambda,
                       double beta, const Vector& anchor_next) {
  if (!(weight_sum_next > 0.0)) throw std::invalid_argument("averaged_update: S_{n+1} must be positive");
  if (weight_sum == 0.0) return anchor_next;
  if (average.size() != anchor_next.size()) throw DimensionError("averaged_update: length mismatch");
  return (weight_sum * average + lambda * beta * anchor_next) / weight_sum_next;
}

namespace {

bool has_lipschitz_b(const OperatorBundle& bundle) {
  return bundle.lower_resolvent_b && bundle.lower_resolvent_b->lipschitz().has_value();
}

double configured_step(const OperatorBundle& bundle, const DanteConfig& config, double beta) {
  if (config.gamma) return *config.gamma;
  const double lip = phi_lipschitz(bundle, config.alpha, beta);
  const double step = default_step(config.alpha, lip);
  if (config.encoding == EncodingKind::ThreeOperator && has_lipschitz_b(bundle)) {
    return 0.99 * config.tos_eta * step;
  }
  return step;
}

// Contraction factor of the configured encoding at beta, without building it.
double encoding_factor(const OperatorBundle& bundle, const DanteConfig& config, double beta) {
  const double lip = phi_lipschitz(bundle, config.alpha, beta);
  switch (config.encoding) {
    case EncodingKind::ForwardBackward:
    case EncodingKind::BackwardForward:
      return forward_backward_factor(config.alpha, lip, configured_step(bundle, config, beta));
    case EncodingKind::DouglasRachford:
      return douglas_rachford_factor(config.alpha, lip);
    case EncodingKind::ThreeOperator: {
      const double gamma = configured_step(bundle, config, beta);
      const double nu = config.alpha / (lip * lip);
      if (!has_lipschitz_b(bundle) || !(gamma < config.tos_eta * nu)) return 1.0;
      return three_operator_factor(config.alpha, gamma, config.tos_eta, *bundle.lower_resolvent_b->lipschitz());
    }
  }
  return 1.0;
}

void validate(const OperatorBundle& bundle, const DanteConfig& config) {
  if (!(config.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(config.mu >= 0.0)) throw ConfigError("mu must be nonnegative");
  if (config.mu > bundle.upper.strong_monotonicity() + 1e-12) {
    throw ConfigError("mu exceeds the strong monotonicity of the upper operator");
  }
  if (config.n_outer == 0) throw ConfigError("n_outer must be at least 1");
  if (!(config.km.theta > 0.0 && config.km.theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (config.km.tau && !(*config.km.tau >= 0.0 && *config.km.tau < 1.0)) {
    throw ConfigError("tau must lie in [0, 1)");
  }
  if (!(config.km.tau_safety > 0.0 && config.km.tau_safety <= 1.0)) {
    throw ConfigError("tau_safety must lie in (0, 1]");
  }
  if (config.gamma && !(*config.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (config.encoding == EncodingKind::ThreeOperator && !bundle.lower_resolvent_b) {
    throw ConfigError("TOS encoding requires a second resolvent operator");
  }
  if (config.schedules.kind == ScheduleKind::StronglyMonotone && !(config.mu > 0.0)) {
    throw ConfigError("strongly monotone schedule requires mu > 0");
  }
  if (config.schedules.kind == ScheduleKind::Monotone && !(config.schedules.b > 0.0 && config.schedules.b < 1.0)) {
    throw ConfigError("b must lie in (0, 1)");
  }
  if (!(config.schedules.eps_bar > 0.0)) throw ConfigError("eps_bar must be positive");
  const Index dim = bundle.dimension();
  if (config.w0.size() == 0 || (dim > 0 && config.w0.size() != dim)) {
    throw ConfigError("w0 has length " + std::to_string(config.w0.size()) + ", problem dimension is " +
                      std::to_string(dim));
  }
  if (!config.w0.allFinite()) throw ConfigError("w0 must be finite");
}

}  // namespace

Encoding make_encoding(const OperatorBundle& bundle, const DanteConfig& config, const Vector& anchor, double beta) {
  switch (config.encoding) {
    case EncodingKind::ForwardBackward:
      return fb_encoding(bundle, anchor, config.alpha, beta, configured_step(bundle, config, beta));
    case EncodingKind::BackwardForward:
      return bf_encoding(bundle, anchor, config.alpha, beta, configured_step(bundle, config, beta));
    case EncodingKind::DouglasRachford:
      return dr_encoding(bundle, anchor, config.alpha, beta);
    case EncodingKind::ThreeOperator:
      return tos_encoding(bundle, anchor, config.alpha, beta, configured_step(bundle, config, beta),
                          config.tos_eta);
  }
  throw std::logic_error("make_encoding: unknown encoding");
}

DanteResult dante_run(const OperatorBundle& bundle, const DanteConfig& config, const IterationObserver& observer) {
  validate(bundle, config);
  const std::size_t n_outer = config.n_outer;
  const double alpha = config.alpha;
  const double mu = config.mu;
  const double theta = config.km.theta;

  std::vector<double> betas(n_outer);
  std::vector<double> factors(n_outer);
  double q_bar = 0.0;
  for (std::size_t n = 0; n < n_outer; ++n) {
    betas[n] = config.schedules.beta(n, alpha, mu);
    factors[n] = encoding_factor(bundle, config, betas[n]);
    q_bar = std::max(q_bar, factors[n]);
  }

  double tau = 0.0;
  if (config.km.tau) {
    tau = *config.km.tau;
  } else {
    const TauBound bound = max_tau(theta, q_bar);
    tau = bound.has_root ? std::clamp(config.km.tau_safety * bound.value, 0.0, 0.99) : 0.0;
  }

  Trace trace;
  trace.alpha = alpha;
  trace.mu = mu;
  trace.theta = theta;
  trace.tau = tau;
  trace.q_bar = q_bar;
  trace.relaxed_bar = relaxed_factor(theta, q_bar);
  trace.domain_diameter = bundle.domain().diameter();
  const bool store_points = config.w0.size() <= config.point_storage_limit;
  if (store_points) trace.initial_anchor = config.w0;
  if (q_bar < 1.0 && std::isfinite(trace.domain_diameter) && trace.relaxed_bar > 0.0) {
    trace.iteration_constant = iteration_constant(tau, theta, trace.relaxed_bar, trace.domain_diameter);
  }
  trace.rows.reserve(n_outer);

  Vector anchor = config.w0;
  Vector average = config.w0;
  double lambda = 1.0;
  double weight_sum = 0.0;

  for (std::size_t n = 0; n < n_outer; ++n) {
    const double beta = betas[n];
    const double eps = config.schedules.epsilon(n);
    const Encoding encoding = make_encoding(bundle, config, anchor, beta);

    KmParams params;
    params.tau = tau;
    params.theta = theta;
    params.epsilon = eps;
    if (config.km.hard_cap) {
      params.hard_cap = *config.km.hard_cap;
    } else if (trace.iteration_constant) {
      params.hard_cap = 10 * iteration_cap(*trace.iteration_constant, eps, trace.relaxed_bar);
    } else {
      params.hard_cap = kDefaultHardCap;
    }

    const KmResult inner = km_solve(anchor, encoding, params);
    trace.total_inner_iterations += inner.iterations;
    if (!inner.stopped_by_criterion) {
      ++trace.cap_breaches;
      if (encoding.is_contraction()) {
        throw InnerLoopCapExceeded("outer step " + std::to_string(n) + ": inner loop exceeded its cap of " +
                                   std::to_string(params.hard_cap) + " iterations in contraction mode");
      }
    }

    Vector anchor_next = encoding.transport(inner.v_final);
    const double weight = lambda * beta;
    const double weight_sum_next = weight_sum + weight;
    average = averaged_update(average, weight_sum, weight_sum_next, lambda, beta, anchor_next);
    const double lambda_next = lambda * (1.0 + 2.0 * mu * beta / alpha);

    TraceRow row;
    row.n = n;
    row.beta = beta;
    row.epsilon = eps;
    row.q = encoding.contraction_factor();
    row.tracking_error = row.q < 1.0 ? tracking_error_bound(eps, theta, row.q) : kUnavailable;
    row.lambda = lambda;
    row.lambda_next = lambda_next;
    row.weight_sum = weight_sum_next;
    row.gamma = encoding.step().value_or(kUnavailable);
    row.inner_iterations = inner.iterations;
    row.inner_cap = params.hard_cap;
    row.hit_cap = !inner.stopped_by_criterion;
    row.inner_residual = inner.residual;
    row.anchor_norm = anchor_next.norm();
    row.average_norm = average.norm();
    if (store_points) {
      row.anchor = anchor_next;
      row.average = average;
    }
    trace.rows.push_back(std::move(row));

    anchor = std::move(anchor_next);
    lambda = lambda_next;
    weight_sum = weight_sum_next;

    if (observer) observer(IterationView{n, anchor, average, trace.rows.back()});
  }

  return DanteResult{std::move(average), std::move(anchor), std::move(trace)};
}

double combined_inner_bound(std::size_t n_outer, double c_const, double q_relaxed_bar, const Schedules& schedules) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= n_outer; ++n) log_sum += std::log(1.0 / schedules.epsilon(n));
  const double n = static_cast<double>(n_outer);
  return (n * (2.0 * std::log(c_const) + std::log(q_relaxed_bar)) + 2.0 * log_sum) / std::log(1.0 / q_relaxed_bar);
}

double summed_inner_caps(std::size_t n_outer, double c_const, double q_relaxed_bar, const Schedules& schedules) {
  double total = 0.0;
  for (std::size_t n = 0; n < n_outer; ++n) {
    total += static_cast<double>(iteration_cap(c_const, schedules.epsilon(n), q_relaxed_bar));
  }
  return total;
}

}  // namespace dante
