#ifndef DANTE_INNER_LOOP_HPP
#define DANTE_INNER_LOOP_HPP

#include <cstddef>

#include "dante/encodings.hpp"

namespace dante {

/// Constant parameters of one inertial Krasnoselskii-Mann loop.
struct KmParams {
  double tau = 0.0;       ///< momentum, in [0, 1)
  double theta = 0.5;     ///< relaxation, in (0, 1)
  double epsilon = 1e-6;  ///< stopping tolerance on ||v_{k+1} - z_k||
  std::size_t hard_cap = 1000000;
};

struct KmResult {
  Vector v_final;
  std::size_t iterations = 0;  ///< K(eps): number of (z_k, v_{k+1}) pairs computed
  bool stopped_by_criterion = false;
  double residual = 0.0;  ///< last ||v_{k+1} - z_k||
};

/**
 * Inertial Krasnoselskii-Mann iteration started from v_1 = v_0 = v0:
 *
 *   z_k     = v_k + tau (v_k - v_{k-1})
 *   v_{k+1} = (1 - theta) z_k + theta T(z_k)
 *
 * The stopping test ||v_{k+1} - z_k|| <= epsilon is evaluated after every
 * update, so at least one pair is always computed. Reaching the hard cap
 * is reported through `stopped_by_criterion == false`, never thrown.
 */
KmResult km_solve(const Vector& v0, const Encoding& encoding, const KmParams& params);

/// (eps / theta_bar) ((1 - theta_bar) + q_bar / (1 - q_bar)); distance of
/// the returned iterate to the fixed point. Requires q_bar < 1.
double tracking_error_bound(double epsilon, double theta_bar, double q_bar);

/// Q = 1 - theta (1 - q^2).
double relaxed_factor(double theta, double q);

/// Left-hand side of the constant-parameter admissibility inequality,
///   -tau^2 (1 - 2 theta + theta^2 (1 - q^2)) + tau (2 - (2 - q^2) theta)
///   - (1 - (1 - q^2) theta) (1 - theta).
double km_parameter_quadratic(double tau, double theta, double q);

/// True iff the quadratic is negative and Q < 1. Out-of-range tau or theta
/// give false.
bool validate_km_params(double tau, double theta, double q);

struct TauBound {
  double value = 0.0;
  bool has_root = false;
};

/**
 * Supremum of the admissible momentum interval [0, tau_bar) at fixed
 * (theta, q): the first positive root of km_parameter_quadratic. When the
 * leading coefficient is positive (theta large enough, the usual regime)
 * this is the largest root. No real root gives {0, false}.
 *
 * Accepts q in [0, 1]; q = 1 evaluates the quadratic literally for the
 * nonexpansive mode.
 */
TauBound max_tau(double theta, double q);

/// C = 2 (1 + tau_bar) / sqrt(Q_bar (1 - tau_bar)(1 - theta_bar)) * diameter.
double iteration_constant(double tau_bar, double theta_bar, double q_relaxed_bar, double diameter);

/// ceil(2 log(C / eps) / log(1 / Q_bar)), clamped below at 1.
std::size_t iteration_cap(double c_const, double epsilon, double q_relaxed_bar);

}  // namespace dante

#endif  // DANTE_INNER_LOOP_HPP
