#include "dante/inner_loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dante/errors.hpp"

namespace dante {

KmResult km_solve(const Vector& v0, const Encoding& encoding, const KmParams& params) {
  if (!(params.tau >= 0.0 && params.tau < 1.0)) throw std::invalid_argument("km_solve: tau must lie in [0, 1)");
  if (!(params.theta > 0.0 && params.theta <= 1.0)) {
    throw std::invalid_argument("km_solve: theta must lie in (0, 1]");
  }
  if (!(params.epsilon >= 0.0)) throw std::invalid_argument("km_solve: epsilon must be nonnegative");
  if (params.hard_cap == 0) throw std::invalid_argument("km_solve: hard cap must be positive");

  Vector previous = v0;
  Vector current = v0;
  Vector z(v0.size());
  Vector next(v0.size());
  KmResult result;
  for (std::size_t k = 1; k <= params.hard_cap; ++k) {
    z = current + params.tau * (current - previous);
    next = (1.0 - params.theta) * z + params.theta * encoding.apply(z);
    result.iterations = k;
    result.residual = (next - z).norm();
    if (!std::isfinite(result.residual)) throw NumericalError("km_solve: iterate became non-finite");
    if (result.residual <= params.epsilon) {
      result.stopped_by_criterion = true;
      break;
    }
    previous.swap(current);
    current.swap(next);
  }
  // On a cap exit the last v_{k+1} was already rotated into `current`.
  result.v_final = result.stopped_by_criterion ? std::move(next) : std::move(current);
  return result;
}

double tracking_error_bound(double epsilon, double theta_bar, double q_bar) {
  if (!(theta_bar > 0.0 && theta_bar < 1.0)) {
    throw std::invalid_argument("tracking_error_bound: theta_bar must lie in (0, 1)");
  }
  if (!(q_bar >= 0.0 && q_bar < 1.0)) {
    throw std::invalid_argument("tracking_error_bound: undefined unless q_bar < 1");
  }
  return epsilon / theta_bar * ((1.0 - theta_bar) + q_bar / (1.0 - q_bar));
}

double relaxed_factor(double theta, double q) { return 1.0 - theta * (1.0 - q * q); }

double km_parameter_quadratic(double tau, double theta, double q) {
  const double q2 = q * q;
  return -tau * tau * (1.0 - 2.0 * theta + theta * theta * (1.0 - q2)) + tau * (2.0 - (2.0 - q2) * theta) -
         (1.0 - (1.0 - q2) * theta) * (1.0 - theta);
}

bool validate_km_params(double tau, double theta, double q) {
  if (!(tau >= 0.0 && tau < 1.0) || !(theta > 0.0 && theta < 1.0)) return false;
  return km_parameter_quadratic(tau, theta, q) < 0.0 && relaxed_factor(theta, q) < 1.0;
}

TauBound max_tau(double theta, double q) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("max_tau: theta must lie in (0, 1)");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("max_tau: q must lie in [0, 1]");
  const double q2 = q * q;
  const double a = -(1.0 - 2.0 * theta + theta * theta * (1.0 - q2));
  const double b = 2.0 - (2.0 - q2) * theta;
  const double c = -(1.0 - (1.0 - q2) * theta) * (1.0 - theta);

  std::vector<double> roots;
  if (a == 0.0) {
    if (b != 0.0) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    // Cancellation-free pair: r1 = t / a, r2 = c / t.
    const double t = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (t != 0.0) {
      roots.push_back(t / a);
      roots.push_back(c / t);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (double r : roots) {
    if (r > 0.0 && r < best) best = r;
  }
  if (!std::isfinite(best)) return {};
  return {best, true};
}

double iteration_constant(double tau_bar, double theta_bar, double q_relaxed_bar, double diameter) {
  if (!(tau_bar >= 0.0 && tau_bar < 1.0) || !(theta_bar > 0.0 && theta_bar < 1.0) ||
      !(q_relaxed_bar > 0.0 && q_relaxed_bar < 1.0)) {
    throw std::invalid_argument("iteration_constant: parameters out of range");
  }
  return 2.0 * (1.0 + tau_bar) / std::sqrt(q_relaxed_bar * (1.0 - tau_bar) * (1.0 - theta_bar)) * diameter;
}

std::size_t iteration_cap(double c_const, double epsilon, double q_relaxed_bar) {
  if (!(q_relaxed_bar > 0.0 && q_relaxed_bar < 1.0)) {
    throw std::invalid_argument("iteration_cap: Q_bar must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("iteration_cap: epsilon must be positive");
  if (epsilon >= c_const) return 1;
  const double k = std::ceil(2.0 * std::log(c_const / epsilon) / std::log(1.0 / q_relaxed_bar));
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

}  // namespace dante
