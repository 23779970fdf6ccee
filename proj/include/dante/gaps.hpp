#ifndef DANTE_GAPS_HPP
#define DANTE_GAPS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "dante/operators.hpp"
#include "dante/outer_loop.hpp"

namespace dante {

/// An analytically known lower-level solution set S0.
struct SolutionSetDescriptor {
  enum class Kind { Segment, Singleton, Sampled };

  Kind kind = Kind::Singleton;
  /// Segment: the two endpoints. Singleton: one point. Sampled: any number.
  std::vector<Vector> points;
  std::string description;

  static SolutionSetDescriptor segment(Vector a, Vector b, std::string description = {});
  static SolutionSetDescriptor singleton(Vector p, std::string description = {});
  static SolutionSetDescriptor sampled(std::vector<Vector> points, std::string description = {});

  Index dimension() const;
  /// Nearest represented point: closed-form clamp onto the segment, nearest
  /// sample otherwise.
  Vector project(const Vector& x) const;
};

double distance_to_solution_set(const Vector& x, const SolutionSetDescriptor& sol);

/// Grid size for segment searches with non-affine G.
inline constexpr std::size_t kSegmentGridPoints = 200;
/// Grid size per dimension for feasibility-gap grids over 1-D and 2-D boxes.
inline constexpr std::size_t kBoxGridPoints = 200;
/// Refinement stops once the search window is below this width.
inline constexpr double kRefinementTolerance = 1e-6;

/**
 * sup over v in S0 of <G v, u - v>.
 *
 * On a segment with affine G the objective is a quadratic in the segment
 * parameter and is maximized exactly (vertex if inside, else the better
 * endpoint). Non-affine G on a segment uses a kSegmentGridPoints grid and a
 * golden-section refinement of the best cell down to kRefinementTolerance.
 */
double gap_opt(const Vector& u, const SolutionSetDescriptor& sol, const SingleValuedOp& upper);

struct FeasibilityGap {
  double value = 0.0;
  /// False when x lies outside dom(M); the value is then the restricted
  /// supremum only (the literal one is +inf).
  bool in_domain = true;
};

enum class FeasGapMethod { Auto, Grid };

/**
 * Restricted feasibility gap sup over y in dom(M) of <F(y), x - y>, using the
 * single-valued part F as the selection of M y. The resolvent parts are
 * treated as normal cones of their domains, whose contribution is <= 0 for
 * x in dom(M).
 *
 * Auto picks: affine F with skew linear part, exact corner maximization of
 * the linear objective; other monotone affine F, projected gradient ascent on
 * the concave quadratic; non-affine F on 1-D/2-D boxes, the grid. Grid
 * always uses kBoxGridPoints per dimension plus one zoomed refinement pass.
 */
FeasibilityGap gap_feas(const Vector& x, const OperatorBundle& bundle, FeasGapMethod method = FeasGapMethod::Auto);

/// C1..C4 and the inputs they were derived from.
struct BoundConstants {
  double alpha = 0.0;
  double mu = 0.0;
  double beta_max = 0.0;
  double beta0 = 0.0;
  double e_max = 0.0;
  double e0 = 0.0;
  double domain_diameter = 0.0;
  double lower_bound_norm = 0.0;  ///< C_M
  double upper_bound_norm = 0.0;  ///< C_G

  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
};

BoundConstants make_bound_constants(double alpha, double mu, double beta_max, double beta0, double e_max, double e0,
                                    const ProblemConstants& problem);

/// Constants for a finished contraction-mode run. beta_max and e_max are
/// maxima over the trace. `initial_offset` = dist(w_0, dom(M)) plays the role
/// of the tracking error before the first step: it enters both e_0 and e_max,
/// which keeps the bounds valid for starting points outside dom(M).
/// Throws when e_n is unavailable.
BoundConstants bound_constants_from_trace(const Trace& trace, const ProblemConstants& problem,
                                          double initial_offset = 0.0);

/// Euclidean distance to a box (zero for the whole space).
double distance_to_domain(const Vector& x, const DomainDescriptor& domain);

/// Partial sums over n < N used by both bounds.
struct BoundSums {
  double weight = 0.0;              ///< sum lambda_n beta_n
  double weighted_error = 0.0;      ///< sum lambda_n e_n
  double weighted_beta_sq = 0.0;    ///< sum lambda_n beta_n^2
  double weighted_beta_error = 0.0; ///< sum lambda_n beta_n e_n
};

/// Sums for the first N rows; e_n = NaN counts as unavailable and throws.
BoundSums bound_sums(const Trace& trace, std::size_t n_terms);

/// C2 / S + C1 sum(lambda e) / S.
double bound_opt(const BoundSums& sums, const BoundConstants& constants);
double bound_opt(std::size_t n_terms, const Trace& trace, const BoundConstants& constants);
/// C3 / S + C4 sum(lambda beta^2) / S + C1 sum(lambda beta e) / S.
double bound_feas(const BoundSums& sums, const BoundConstants& constants);
double bound_feas(std::size_t n_terms, const Trace& trace, const BoundConstants& constants);

struct EnergyCheck {
  /// LHS - RHS per outer step n; nonpositive when the inequality holds.
  std::vector<double> residuals;
  double max_residual = 0.0;
  /// Set when e_n is unavailable (nonexpansive mode); residuals stay empty.
  bool skipped = false;
};

/**
 * Per-step check of
 *   lambda_n <v, w_{n+1} - x> + lambda_n beta_n <G x, w_{n+1} - x>
 *     <= -(alpha lambda_{n+1} / 2) ||w_{n+1} - x||^2
 *        + (alpha lambda_n / 2) ||w_n - x||^2 + C1 lambda_n e_n
 * for x in dom(M) and v in M x. Requires the trace to hold full points.
 */
EnergyCheck energy_check(const Trace& trace, const SingleValuedOp& upper, const Vector& x, const Vector& v,
                         double c1);

struct WeakSharpnessFit {
  double kappa = 0.0;          ///< exp(intercept) of the log-log fit
  double rho = 0.0;            ///< fitted slope
  double kappa_certified = 0.0;  ///< min over points of gap / dist^rho
  std::size_t points_used = 0;
};

/// Least-squares fit of log gap_feas against log dist(., S0). Points at
/// distance zero (or with nonpositive gap) are skipped; fewer than three
/// usable points throws.
WeakSharpnessFit weak_sharpness_diag(const std::vector<Vector>& points, const OperatorBundle& bundle,
                                     const SolutionSetDescriptor& sol);

}  // namespace dante

#endif  // DANTE_GAPS_HPP
