#include "dante/gaps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dante/errors.hpp"

namespace dante {

SolutionSetDescriptor SolutionSetDescriptor::segment(Vector a, Vector b, std::string description) {
  if (a.size() != b.size()) throw DimensionError("segment endpoints differ in length");
  return {Kind::Segment, {std::move(a), std::move(b)}, std::move(description)};
}

SolutionSetDescriptor SolutionSetDescriptor::singleton(Vector p, std::string description) {
  return {Kind::Singleton, {std::move(p)}, std::move(description)};
}

SolutionSetDescriptor SolutionSetDescriptor::sampled(std::vector<Vector> points, std::string description) {
  if (points.empty()) throw std::invalid_argument("sampled solution set needs at least one point");
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw DimensionError("sampled solution points differ in length");
  }
  return {Kind::Sampled, std::move(points), std::move(description)};
}

Index SolutionSetDescriptor::dimension() const { return points.empty() ? 0 : points.front().size(); }

Vector SolutionSetDescriptor::project(const Vector& x) const {
  if (points.empty()) throw std::invalid_argument("empty solution set");
  if (x.size() != dimension()) throw DimensionError("point and solution set differ in length");
  switch (kind) {
    case Kind::Singleton:
      return points.front();
    case Kind::Segment: {
      const Vector d = points[1] - points[0];
      const double dd = d.squaredNorm();
      if (dd == 0.0) return points[0];
      const double t = std::clamp((x - points[0]).dot(d) / dd, 0.0, 1.0);
      return points[0] + t * d;
    }
    case Kind::Sampled: {
      const Vector* best = &points.front();
      double best_dist = std::numeric_limits<double>::infinity();
      for (const auto& p : points) {
        const double dist = (x - p).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = &p;
        }
      }
      return *best;
    }
  }
  throw std::logic_error("unknown solution set kind");
}

double distance_to_solution_set(const Vector& x, const SolutionSetDescriptor& sol) {
  return (x - sol.project(x)).norm();
}

namespace {

// Maximum of f on [lo, hi] by golden-section search; f is assumed unimodal
// on the bracket (it comes from the best cell of a fine grid).
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > kRefinementTolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double t = 0.5 * (a + b);
  return {t, f(t)};
}

double segment_gap_affine(const Vector& u, const Vector& a, const Vector& b, const AffineMap& map) {
  // f(t) = <G(a + t d), u - a - t d> = c0 + c1 t - c2 t^2.
  const Vector d = b - a;
  const Vector ga = map.apply(a);
  const Vector gd = map.apply(d) - map.offset;
  const Vector r = u - a;
  const double c0 = ga.dot(r);
  const double c1 = gd.dot(r) - ga.dot(d);
  const double c2 = gd.dot(d);
  auto f = [&](double t) { return c0 + c1 * t - c2 * t * t; };
  double best = std::max(f(0.0), f(1.0));
  if (c2 > 0.0) {
    const double vertex = c1 / (2.0 * c2);
    if (vertex > 0.0 && vertex < 1.0) best = std::max(best, f(vertex));
  }
  return best;
}

double segment_gap_grid(const Vector& u, const Vector& a, const Vector& b, const SingleValuedOp& upper) {
  const Vector d = b - a;
  auto f = [&](double t) {
    const Vector v = a + t * d;
    return upper(v).dot(u - v);
  };
  const std::size_t m = kSegmentGridPoints;
  std::size_t best_i = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double value = f(static_cast<double>(i) / static_cast<double>(m - 1));
    if (value > best) {
      best = value;
      best_i = i;
    }
  }
  const double h = 1.0 / static_cast<double>(m - 1);
  const double lo = std::max(0.0, static_cast<double>(best_i) * h - h);
  const double hi = std::min(1.0, static_cast<double>(best_i) * h + h);
  return std::max(best, golden_max(f, lo, hi).second);
}

double feas_objective(const OperatorBundle& bundle, const Vector& x, const Vector& y) {
  return bundle.lower_smooth(y).dot(x - y);
}

bool is_skew(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m + m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

// Objective <M y + o, x - y> is linear in y when M is skew:
// <y, M^T x - o> + <o, x>.
double feas_skew(const Vector& x, const Matrix& m, const Vector& offset, const DomainDescriptor& box) {
  const Vector coeff = m.transpose() * x - offset;
  double value = offset.dot(x);
  for (Index i = 0; i < coeff.size(); ++i) value += coeff[i] * (coeff[i] > 0.0 ? box.upper[i] : box.lower[i]);
  return value;
}

double feas_projected_gradient(const Vector& x, const Matrix& m, const Vector& offset, const DomainDescriptor& box) {
  const Matrix hessian = m + m.transpose();
  const double lip = hessian.operatorNorm();
  const Vector linear = m.transpose() * x - offset;
  auto value = [&](const Vector& y) { return (m * y + offset).dot(x - y); };
  Vector y = project_box(x, box.lower, box.upper);
  constexpr std::size_t kMaxSweeps = 100000;
  for (std::size_t k = 0; k < kMaxSweeps; ++k) {
    const Vector grad = linear - hessian * y;
    const Vector next = project_box(y + grad / lip, box.lower, box.upper);
    const double step = (next - y).norm();
    y = next;
    if (step <= 1e-13 * (1.0 + y.norm())) break;
  }
  return value(y);
}

double feas_grid(const Vector& x, const OperatorBundle& bundle, const DomainDescriptor& box) {
  const Index dim = x.size();
  if (dim < 1 || dim > 2) throw std::invalid_argument("gap_feas: grid evaluation supports 1-D and 2-D boxes only");
  const std::size_t m = kBoxGridPoints;
  std::array<double, 2> lo{}, hi{};
  for (Index i = 0; i < dim; ++i) {
    lo[i] = box.lower[i];
    hi[i] = box.upper[i];
  }
  Vector best_y = box.lower;
  double best = -std::numeric_limits<double>::infinity();
  Vector y(dim);
  auto scan = [&]() {
    const std::size_t m2 = dim == 2 ? m : 1;
    for (std::size_t i = 0; i < m; ++i) {
      y[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / static_cast<double>(m - 1);
      for (std::size_t j = 0; j < m2; ++j) {
        if (dim == 2) y[1] = lo[1] + (hi[1] - lo[1]) * static_cast<double>(j) / static_cast<double>(m - 1);
        const double value = feas_objective(bundle, x, y);
        if (value > best) {
          best = value;
          best_y = y;
        }
      }
    }
  };
  scan();
  // One zoomed pass over the neighbouring cells of the best grid point.
  for (Index i = 0; i < dim; ++i) {
    const double cell = (hi[i] - lo[i]) / static_cast<double>(m - 1);
    lo[i] = std::max(box.lower[i], best_y[i] - cell);
    hi[i] = std::min(box.upper[i], best_y[i] + cell);
  }
  scan();
  return best;
}

}  // namespace

double gap_opt(const Vector& u, const SolutionSetDescriptor& sol, const SingleValuedOp& upper) {
  if (sol.points.empty()) throw std::invalid_argument("gap_opt: empty solution set");
  if (u.size() != sol.dimension()) throw DimensionError("gap_opt: point and solution set differ in length");
  switch (sol.kind) {
    case SolutionSetDescriptor::Kind::Singleton: {
      const Vector& s = sol.points.front();
      return upper(s).dot(u - s);
    }
    case SolutionSetDescriptor::Kind::Sampled: {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& s : sol.points) best = std::max(best, upper(s).dot(u - s));
      return best;
    }
    case SolutionSetDescriptor::Kind::Segment:
      if (upper.affine_map()) return segment_gap_affine(u, sol.points[0], sol.points[1], *upper.affine_map());
      return segment_gap_grid(u, sol.points[0], sol.points[1], upper);
  }
  throw std::invalid_argument("gap_opt: unsupported solution set kind");
}

FeasibilityGap gap_feas(const Vector& x, const OperatorBundle& bundle, FeasGapMethod method) {
  const DomainDescriptor& box = bundle.domain();
  if (!box.is_box()) throw std::invalid_argument("gap_feas: requires a box domain");
  if (x.size() != box.lower.size()) throw DimensionError("gap_feas: point and domain differ in length");
  FeasibilityGap result;
  result.in_domain = box.contains(x, 1e-9);
  const auto& map = bundle.lower_smooth.affine_map();
  if (method == FeasGapMethod::Grid || !map) {
    result.value = feas_grid(x, bundle, box);
    return result;
  }
  const Matrix m = map->dense_linear();
  result.value = is_skew(m) ? feas_skew(x, m, map->offset, box) : feas_projected_gradient(x, m, map->offset, box);
  return result;
}

BoundConstants make_bound_constants(double alpha, double mu, double beta_max, double beta0, double e_max, double e0,
                                    const ProblemConstants& problem) {
  if (!(alpha > 0.0)) throw std::invalid_argument("bound constants: alpha must be positive");
  BoundConstants k;
  k.alpha = alpha;
  k.mu = mu;
  k.beta_max = beta_max;
  k.beta0 = beta0;
  k.e_max = e_max;
  k.e0 = e0;
  k.domain_diameter = problem.domain_diameter;
  k.lower_bound_norm = problem.lower_bound_norm;
  k.upper_bound_norm = problem.upper_bound_norm;
  const double d = problem.domain_diameter;
  k.c1 = 2.0 * alpha * (1.0 + mu * beta_max / alpha) * (e_max + d) + problem.lower_bound_norm / alpha +
         beta_max * problem.upper_bound_norm / alpha;
  k.c2 = alpha * (e0 * e0 + d * d);
  k.c3 = beta0 * k.c2;
  k.c4 = problem.upper_bound_norm * (e_max + d);
  return k;
}

BoundConstants bound_constants_from_trace(const Trace& trace, const ProblemConstants& problem,
                                          double initial_offset) {
  if (trace.rows.empty()) throw std::invalid_argument("bound constants: empty trace");
  if (!(initial_offset >= 0.0)) throw std::invalid_argument("bound constants: initial offset must be nonnegative");
  double beta_max = 0.0;
  double e_max = initial_offset;
  for (const auto& row : trace.rows) {
    if (std::isnan(row.tracking_error)) throw std::invalid_argument("bound constants: e_n unavailable");
    beta_max = std::max(beta_max, row.beta);
    e_max = std::max(e_max, row.tracking_error);
  }
  return make_bound_constants(trace.alpha, trace.mu, beta_max, trace.rows.front().beta, e_max,
                              std::max(trace.rows.front().tracking_error, initial_offset), problem);
}

double distance_to_domain(const Vector& x, const DomainDescriptor& domain) {
  if (!domain.is_box()) return 0.0;
  return (x - project_box(x, domain.lower, domain.upper)).norm();
}

BoundSums bound_sums(const Trace& trace, std::size_t n_terms) {
  if (n_terms == 0 || n_terms > trace.rows.size()) throw std::invalid_argument("bound sums: N out of range");
  BoundSums s;
  for (std::size_t n = 0; n < n_terms; ++n) {
    const TraceRow& row = trace.rows[n];
    if (std::isnan(row.tracking_error)) throw std::invalid_argument("bound sums: e_n unavailable");
    const double lb = row.lambda * row.beta;
    s.weight += lb;
    s.weighted_error += row.lambda * row.tracking_error;
    s.weighted_beta_sq += lb * row.beta;
    s.weighted_beta_error += lb * row.tracking_error;
  }
  return s;
}

double bound_opt(const BoundSums& sums, const BoundConstants& k) {
  return k.c2 / sums.weight + k.c1 * sums.weighted_error / sums.weight;
}

double bound_opt(std::size_t n_terms, const Trace& trace, const BoundConstants& k) {
  return bound_opt(bound_sums(trace, n_terms), k);
}

double bound_feas(const BoundSums& sums, const BoundConstants& k) {
  return k.c3 / sums.weight + k.c4 * sums.weighted_beta_sq / sums.weight +
         k.c1 * sums.weighted_beta_error / sums.weight;
}

double bound_feas(std::size_t n_terms, const Trace& trace, const BoundConstants& k) {
  return bound_feas(bound_sums(trace, n_terms), k);
}

EnergyCheck energy_check(const Trace& trace, const SingleValuedOp& upper, const Vector& x, const Vector& v,
                         double c1) {
  EnergyCheck check;
  if (!trace.points_stored()) throw std::invalid_argument("energy_check: trace holds no points");
  if (x.size() != trace.initial_anchor.size() || v.size() != x.size()) {
    throw DimensionError("energy_check: point dimension mismatch");
  }
  for (const auto& row : trace.rows) {
    if (std::isnan(row.tracking_error)) {
      check.skipped = true;
      return check;
    }
  }
  const Vector gx = upper(x);
  const double alpha = trace.alpha;
  check.max_residual = -std::numeric_limits<double>::infinity();
  check.residuals.reserve(trace.rows.size());
  const Vector* w_prev = &trace.initial_anchor;
  for (const auto& row : trace.rows) {
    const Vector& w_next = row.anchor;
    const Vector diff = w_next - x;
    const double lhs = row.lambda * v.dot(diff) + row.lambda * row.beta * gx.dot(diff);
    const double rhs = -0.5 * alpha * row.lambda_next * diff.squaredNorm() +
                       0.5 * alpha * row.lambda * (*w_prev - x).squaredNorm() + c1 * row.lambda * row.tracking_error;
    check.residuals.push_back(lhs - rhs);
    check.max_residual = std::max(check.max_residual, lhs - rhs);
    w_prev = &w_next;
  }
  return check;
}

WeakSharpnessFit weak_sharpness_diag(const std::vector<Vector>& points, const OperatorBundle& bundle,
                                     const SolutionSetDescriptor& sol) {
  std::vector<double> log_dist;
  std::vector<double> log_gap;
  std::vector<double> dists;
  std::vector<double> gaps;
  for (const auto& p : points) {
    const double dist = distance_to_solution_set(p, sol);
    const double gap = gap_feas(p, bundle).value;
    if (!(dist > 0.0) || !(gap > 0.0)) continue;
    dists.push_back(dist);
    gaps.push_back(gap);
    log_dist.push_back(std::log(dist));
    log_gap.push_back(std::log(gap));
  }
  const std::size_t m = log_dist.size();
  if (m < 3) throw std::invalid_argument("weak_sharpness_diag: fewer than 3 points at positive distance");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += log_dist[i];
    my += log_gap[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (log_dist[i] - mx) * (log_dist[i] - mx);
    sxy += (log_dist[i] - mx) * (log_gap[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("weak_sharpness_diag: all points at the same distance");
  WeakSharpnessFit fit;
  fit.rho = sxy / sxx;
  fit.kappa = std::exp(my - fit.rho * mx);
  fit.kappa_certified = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    fit.kappa_certified = std::min(fit.kappa_certified, gaps[i] / std::pow(dists[i], fit.rho));
  }
  fit.points_used = m;
  return fit;
}

}  // namespace dante
