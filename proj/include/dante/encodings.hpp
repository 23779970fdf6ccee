#ifndef DANTE_ENCODINGS_HPP
#define DANTE_ENCODINGS_HPP

#include <functional>
#include <optional>
#include <string_view>

#include "dante/operators.hpp"

namespace dante {

enum class EncodingKind { ForwardBackward, BackwardForward, DouglasRachford, ThreeOperator };

/// "FB", "BF", "DR", "TOS".
std::string_view to_string(EncodingKind kind);
std::optional<EncodingKind> parse_encoding_kind(std::string_view name);

/**
 * A fixed-point map T for the anchored auxiliary inclusion
 * 0 in M(u) + beta G(u) + alpha (u - w), its Lipschitz factor q and the
 * transport map Z carrying Fix(T) to the auxiliary solution.
 *
 * q < 1 means T is a contraction (the inner-loop guarantees apply); q = 1
 * means T is only known to be nonexpansive.
 */
class Encoding {
 public:
  using Map = std::function<Vector(const Vector&)>;

  Encoding(EncodingKind kind, Map apply, Map transport, double q, std::optional<double> step,
           bool step_out_of_range = false);

  Vector apply(const Vector& z) const { return apply_(z); }
  Vector transport(const Vector& v) const { return transport_(v); }

  EncodingKind kind() const { return kind_; }
  double contraction_factor() const { return q_; }
  bool is_contraction() const { return q_ < 1.0; }
  /// Forward step gamma; absent for Douglas-Rachford (unit resolvent steps).
  std::optional<double> step() const { return step_; }
  /// Set when the requested step lies outside the contraction range and
  /// the encoding was built in nonexpansive mode instead.
  bool step_out_of_range() const { return step_out_of_range_; }

 private:
  EncodingKind kind_;
  Map apply_;
  Map transport_;
  double q_;
  std::optional<double> step_;
  bool step_out_of_range_;
};

/// sqrt(1 - gamma (2 alpha - gamma L^2)) for gamma in (0, 2 alpha / L^2),
/// otherwise 1.
double forward_backward_factor(double alpha, double lipschitz, double gamma);
/// 1/2 + 1/2 sqrt((1 - 2 alpha + L^2) / (1 + 2 alpha + L^2)).
double douglas_rachford_factor(double alpha, double lipschitz);
/// sqrt(1 - 2 gamma alpha (1 - eta) / (1 + gamma L_B)^2).
double three_operator_factor(double alpha, double gamma, double eta, double lipschitz_b);

/// alpha / L^2, the minimizer of the forward-backward factor over gamma.
double default_step(double alpha, double lipschitz);

/// T = J_{gamma A} o (Id - gamma Phi), Z = Id.
Encoding fb_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta, double gamma);

/// T = (Id - gamma Phi) o J_{gamma A}, Z = J_{gamma A}.
Encoding bf_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta, double gamma);

/// T = (Id + R_Phi o R_A) / 2 with unit-step reflected resolvents
/// R = 2J - Id, Z = J_A.
Encoding dr_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta);

/**
 * Davis-Yin three-operator map
 *   T = Id - J_{gamma B} + J_{gamma A} o (2 J_{gamma B} - Id - gamma Psi o J_{gamma B}).
 *
 * Contraction mode needs B single-valued with known Lipschitz constant L_B
 * and gamma < eta * alpha / L^2; otherwise q = 1. The transport is
 * J_{gamma B}: at a fixed point p the A- and B-resolvent points coincide and
 * equal J_{gamma B}(p), which is the auxiliary solution.
 */
Encoding tos_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta, double gamma,
                      double eta = 0.5);

/// Lipschitz constant of Phi at the given (alpha, beta).
double phi_lipschitz(const OperatorBundle& bundle, double alpha, double beta);

}  // namespace dante

#endif  // DANTE_ENCODINGS_HPP
