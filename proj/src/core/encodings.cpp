#include "dante/encodings.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace dante {

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

std::string_view to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::ForwardBackward: return "FB";
    case EncodingKind::BackwardForward: return "BF";
    case EncodingKind::DouglasRachford: return "DR";
    case EncodingKind::ThreeOperator: return "TOS";
  }
  return "?";
}

std::optional<EncodingKind> parse_encoding_kind(std::string_view name) {
  if (name == "FB" || name == "fb") return EncodingKind::ForwardBackward;
  if (name == "BF" || name == "bf") return EncodingKind::BackwardForward;
  if (name == "DR" || name == "dr") return EncodingKind::DouglasRachford;
  if (name == "TOS" || name == "tos") return EncodingKind::ThreeOperator;
  return std::nullopt;
}

Encoding::Encoding(EncodingKind kind, Map apply, Map transport, double q, std::optional<double> step,
                   bool step_out_of_range)
    : kind_(kind),
      apply_(std::move(apply)),
      transport_(std::move(transport)),
      q_(q),
      step_(step),
      step_out_of_range_(step_out_of_range) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("Encoding: factor must lie in [0, 1]");
}

double forward_backward_factor(double alpha, double lipschitz, double gamma) {
  if (!(gamma > 0.0) || !(gamma < 2.0 * alpha / (lipschitz * lipschitz))) return 1.0;
  const double sq = 1.0 - gamma * (2.0 * alpha - gamma * lipschitz * lipschitz);
  return std::sqrt(std::max(0.0, sq));
}

double douglas_rachford_factor(double alpha, double lipschitz) {
  const double l2 = lipschitz * lipschitz;
  const double ratio = (1.0 - 2.0 * alpha + l2) / (1.0 + 2.0 * alpha + l2);
  return 0.5 + 0.5 * std::sqrt(std::max(0.0, ratio));
}

double three_operator_factor(double alpha, double gamma, double eta, double lipschitz_b) {
  const double denom = (1.0 + gamma * lipschitz_b) * (1.0 + gamma * lipschitz_b);
  return std::sqrt(std::max(0.0, 1.0 - 2.0 * gamma * alpha * (1.0 - eta) / denom));
}

double default_step(double alpha, double lipschitz) {
  require_positive(alpha, "default_step: alpha");
  if (!(lipschitz >= alpha)) throw std::invalid_argument("default_step: requires L >= alpha");
  return alpha / (lipschitz * lipschitz);
}

double phi_lipschitz(const OperatorBundle& bundle, double alpha, double beta) {
  return bundle.lower_smooth.lipschitz() + beta * bundle.upper.lipschitz() + alpha;
}

Encoding fb_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta, double gamma) {
  require_positive(alpha, "fb_encoding: alpha");
  require_positive(gamma, "fb_encoding: gamma");
  const SingleValuedOp phi = build_phi(anchor, alpha, beta, bundle.lower_smooth, bundle.upper);
  const double q = forward_backward_factor(alpha, phi.lipschitz(), gamma);
  auto resolvent = bundle.lower_resolvent_a;
  return Encoding(
      EncodingKind::ForwardBackward,
      [phi, resolvent, gamma](const Vector& z) { return resolvent(z - gamma * phi(z), gamma); },
      [](const Vector& v) { return v; }, q, gamma, q >= 1.0);
}

Encoding bf_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta, double gamma) {
  require_positive(alpha, "bf_encoding: alpha");
  require_positive(gamma, "bf_encoding: gamma");
  const SingleValuedOp phi = build_phi(anchor, alpha, beta, bundle.lower_smooth, bundle.upper);
  const double q = forward_backward_factor(alpha, phi.lipschitz(), gamma);
  auto resolvent = bundle.lower_resolvent_a;
  return Encoding(
      EncodingKind::BackwardForward,
      [phi, resolvent, gamma](const Vector& z) {
        const Vector x = resolvent(z, gamma);
        return Vector(x - gamma * phi(x));
      },
      [resolvent, gamma](const Vector& v) { return resolvent(v, gamma); }, q, gamma, q >= 1.0);
}

Encoding dr_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta) {
  require_positive(alpha, "dr_encoding: alpha");
  const SingleValuedOp phi = build_phi(anchor, alpha, beta, bundle.lower_smooth, bundle.upper);
  const double q = douglas_rachford_factor(alpha, phi.lipschitz());
  auto resolve_phi_unit = make_phi_resolvent(phi, 1.0);
  auto resolvent = bundle.lower_resolvent_a;
  return Encoding(
      EncodingKind::DouglasRachford,
      [resolve_phi_unit, resolvent](const Vector& z) {
        const Vector reflected_a = 2.0 * resolvent(z, 1.0) - z;
        const Vector reflected_phi = 2.0 * resolve_phi_unit(reflected_a) - reflected_a;
        return Vector(0.5 * (z + reflected_phi));
      },
      [resolvent](const Vector& v) { return resolvent(v, 1.0); }, q, std::nullopt);
}

Encoding tos_encoding(const OperatorBundle& bundle, const Vector& anchor, double alpha, double beta, double gamma,
                      double eta) {
  require_positive(alpha, "tos_encoding: alpha");
  require_positive(gamma, "tos_encoding: gamma");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("tos_encoding: eta must lie in [0, 1]");
  if (!bundle.lower_resolvent_b) throw std::invalid_argument("tos_encoding: bundle has no B resolvent");
  const SingleValuedOp psi = build_phi(anchor, alpha, beta, bundle.lower_smooth, bundle.upper);
  const double nu = alpha / (psi.lipschitz() * psi.lipschitz());
  const auto lip_b = bundle.lower_resolvent_b->lipschitz();
  const bool contraction = lip_b.has_value() && gamma < eta * nu;
  const double q = contraction ? three_operator_factor(alpha, gamma, eta, *lip_b) : 1.0;
  auto res_a = bundle.lower_resolvent_a;
  auto res_b = *bundle.lower_resolvent_b;
  return Encoding(
      EncodingKind::ThreeOperator,
      [psi, res_a, res_b, gamma](const Vector& z) {
        const Vector xb = res_b(z, gamma);
        const Vector xa = res_a(2.0 * xb - z - gamma * psi(xb), gamma);
        return Vector(z - xb + xa);
      },
      [res_b, gamma](const Vector& v) { return res_b(v, gamma); }, q, gamma,
      lip_b.has_value() && !contraction);
}

}  // namespace dante
