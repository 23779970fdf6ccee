#ifndef DANTE_OPERATORS_HPP
#define DANTE_OPERATORS_HPP

#include <functional>
#include <optional>

#include "dante/vectorspace.hpp"

namespace dante {

/// x -> linear * x + shift * x + offset. `linear` is absent for scaled
/// identities so that large identity-like maps never materialize a matrix.
struct AffineMap {
  std::optional<Matrix> linear;
  double shift = 0.0;
  Vector offset;

  Index dimension() const { return offset.size(); }
  Vector apply(const Vector& x) const;
  /// Dense linear part (linear + shift * I).
  Matrix dense_linear() const;
};

/**
 * A single-valued monotone operator together with the constants the
 * encodings rely on: a Lipschitz bound and a strong-monotonicity modulus
 * (zero for merely monotone maps).
 *
 * Affine operators keep their matrix and offset so that Lipschitz constants
 * are exact spectral norms and resolvents reduce to linear solves.
 */
class SingleValuedOp {
 public:
  using Fn = std::function<Vector(const Vector&)>;

  SingleValuedOp(Fn evaluate, double lipschitz, double strong_monotonicity = 0.0);

  /// Lipschitz constant is the spectral norm of the linear part and the
  /// modulus is the smallest eigenvalue of its symmetric part (clamped at 0).
  static SingleValuedOp affine(AffineMap map);
  static SingleValuedOp affine(Matrix linear, Vector offset);
  /// Affine map with caller-supplied constants (used where the advertised
  /// constants are bounds rather than exact values).
  static SingleValuedOp affine(AffineMap map, double lipschitz, double strong_monotonicity);
  static SingleValuedOp identity(Index n);
  static SingleValuedOp scaled_identity(Index n, double scale, Vector offset);
  static SingleValuedOp zero(Index n);

  Vector operator()(const Vector& x) const;

  double lipschitz() const { return lipschitz_; }
  double strong_monotonicity() const { return strong_monotonicity_; }
  /// mu / L^2, the cocoercivity modulus implied by the two constants.
  double cocoercivity() const;
  const std::optional<AffineMap>& affine_map() const { return affine_; }

 private:
  Fn evaluate_;
  double lipschitz_;
  double strong_monotonicity_;
  std::optional<AffineMap> affine_;
};

struct DomainDescriptor {
  enum class Kind { WholeSpace, Box, MatrixBox };

  Kind kind = Kind::WholeSpace;
  Vector lower;
  Vector upper;
  std::optional<Shape> shape;

  static DomainDescriptor whole_space();
  static DomainDescriptor box(Vector lower, Vector upper);
  static DomainDescriptor matrix_box(double lower, double upper, Shape shape);

  bool is_box() const { return kind != Kind::WholeSpace; }
  /// Corner-to-corner distance for boxes, +inf for the whole space.
  double diameter() const;
  bool contains(const Vector& x, double tolerance = 0.0) const;
};

/// Resolvent access to a maximally monotone operator.
class ResolventOp {
 public:
  using Fn = std::function<Vector(const Vector& y, double gamma)>;

  /// `lipschitz` is set only when the operator itself is single-valued and
  /// Lipschitz (needed by the contraction mode of three-operator splitting).
  ResolventOp(Fn resolve, DomainDescriptor domain, std::optional<double> lipschitz = std::nullopt);

  /// Normal cone of a box; the resolvent is the projection for every step.
  static ResolventOp box_normal_cone(Vector lower, Vector upper);
  static ResolventOp matrix_box_normal_cone(double lower, double upper, Shape shape);
  /// sigma times the subdifferential of the nuclear norm; resolvent is
  /// singular value thresholding at gamma * sigma.
  static ResolventOp nuclear_norm(double sigma, Shape shape);
  /// Monotone linear operator x -> K x; resolvent (I + gamma K)^{-1}.
  static ResolventOp linear(Matrix k);
  /// The zero operator; its resolvent is the identity.
  static ResolventOp zero(Index n);

  Vector operator()(const Vector& y, double gamma) const;

  const DomainDescriptor& domain() const { return domain_; }
  std::optional<double> lipschitz() const { return lipschitz_; }

 private:
  Fn resolve_;
  DomainDescriptor domain_;
  std::optional<double> lipschitz_;
};

/// Diameter, operator bound (minimal-norm selection) and upper-level bound
/// over dom(M).
struct ProblemConstants {
  double domain_diameter = 0.0;
  double lower_bound_norm = 0.0;
  double upper_bound_norm = 0.0;
};

/**
 * Problem data: the upper operator G, and the lower operator
 * M = F + A (+ B) split into a single-valued part F and resolvent-accessible
 * parts A and optionally B.
 */
struct OperatorBundle {
  SingleValuedOp upper;
  SingleValuedOp lower_smooth;
  ResolventOp lower_resolvent_a;
  std::optional<ResolventOp> lower_resolvent_b;
  ProblemConstants constants;

  Index dimension() const;
  /// dom(M): A's domain unless A is everywhere defined and B is bounded.
  const DomainDescriptor& domain() const;
};

Vector project_box(const Vector& y, const Vector& lower, const Vector& upper);

/// U max(S - threshold, 0) V^T for the thin SVD Y = U S V^T.
Matrix svt(const Matrix& y, double threshold);
Vector svt(const Vector& y, Shape shape, double threshold);
double nuclear_norm(const Matrix& y);

/// v -> F(v) + beta G(v) + alpha (v - w). The advertised Lipschitz constant
/// is L_F + beta L_G + alpha and the strong-monotonicity modulus is alpha.
/// Affine inputs give an affine result.
SingleValuedOp build_phi(const Vector& anchor, double alpha, double beta, const SingleValuedOp& smooth,
                         const SingleValuedOp& upper);

/// Sub-iteration cap used by resolve_phi for non-affine maps.
inline constexpr std::size_t kResolventSubIterationCap = 100000;

/// The unique x with x + gamma * phi(x) = y. Affine maps are solved by LU;
/// other maps by a damped fixed-point iteration on the strongly monotone
/// residual map, capped at kResolventSubIterationCap sweeps.
Vector resolve_phi(const SingleValuedOp& phi, const Vector& y, double gamma);

/// Same as resolve_phi with the step fixed up front; affine maps are
/// factorized once and the factorization is reused by every call.
std::function<Vector(const Vector&)> make_phi_resolvent(const SingleValuedOp& phi, double gamma);

/// D_M from the box, C_G and C_M (minimal-norm selection F(x), normal-cone
/// part set to zero) as maxima over `samples` uniform draws plus the corners
/// when the map is affine and the box has at most 2^16 corners. Scaled
/// identities are maximized exactly coordinate by coordinate.
ProblemConstants estimate_constants(const OperatorBundle& bundle, SeededRng& rng, std::size_t samples);

}  // namespace dante

#endif  // DANTE_OPERATORS_HPP
