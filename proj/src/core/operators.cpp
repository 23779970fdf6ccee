#include "dante/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "dante/errors.hpp"

namespace dante {

namespace {

void require_dimension(const Vector& x, Index n, const char* what) {
  if (x.size() != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(x.size()));
  }
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double smallest_symmetric_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

// Exact max of ||s x + o|| over a box for a scaled identity.
double scaled_identity_box_max(double shift, const Vector& offset, const Vector& lower, const Vector& upper) {
  double acc = 0.0;
  for (Index i = 0; i < offset.size(); ++i) {
    const double a = std::abs(shift * lower[i] + offset[i]);
    const double b = std::abs(shift * upper[i] + offset[i]);
    const double m = std::max(a, b);
    acc += m * m;
  }
  return std::sqrt(acc);
}

constexpr Index kMaxCornerDimension = 16;

double box_max_norm(const SingleValuedOp& op, const DomainDescriptor& box, SeededRng& rng, std::size_t samples) {
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    best = std::max(best, norm(op(sample_box(rng, box.lower, box.upper))));
  }
  const auto& affine = op.affine_map();
  if (!affine) return best;
  if (!affine->linear) {
    return std::max(best, scaled_identity_box_max(affine->shift, affine->offset, box.lower, box.upper));
  }
  const Index n = box.lower.size();
  if (n <= kMaxCornerDimension) {
    Vector corner(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      for (Index i = 0; i < n; ++i) corner[i] = (mask >> i) & 1U ? box.upper[i] : box.lower[i];
      best = std::max(best, norm(op(corner)));
    }
  }
  return best;
}

}  // namespace

Vector AffineMap::apply(const Vector& x) const {
  require_dimension(x, dimension(), "AffineMap::apply");
  Vector out = shift * x + offset;
  if (linear) out.noalias() += *linear * x;
  return out;
}

Matrix AffineMap::dense_linear() const {
  const Index n = dimension();
  Matrix out = shift * Matrix::Identity(n, n);
  if (linear) out += *linear;
  return out;
}

SingleValuedOp::SingleValuedOp(Fn evaluate, double lipschitz, double strong_monotonicity)
    : evaluate_(std::move(evaluate)), lipschitz_(lipschitz), strong_monotonicity_(strong_monotonicity) {
  if (!(lipschitz >= 0.0) || !(strong_monotonicity >= 0.0)) {
    throw std::invalid_argument("SingleValuedOp: constants must be nonnegative");
  }
}

SingleValuedOp SingleValuedOp::affine(AffineMap map, double lipschitz, double strong_monotonicity) {
  if (map.linear && (map.linear->rows() != map.dimension() || map.linear->cols() != map.dimension())) {
    throw DimensionError("SingleValuedOp::affine: matrix and offset sizes disagree");
  }
  auto shared = std::make_shared<const AffineMap>(map);
  SingleValuedOp op([shared](const Vector& x) { return shared->apply(x); }, lipschitz, strong_monotonicity);
  op.affine_ = std::move(map);
  return op;
}

SingleValuedOp SingleValuedOp::affine(AffineMap map) {
  double lip = std::abs(map.shift);
  double mu = map.shift;
  if (map.linear) {
    const Matrix dense = map.dense_linear();
    lip = spectral_norm(dense);
    mu = smallest_symmetric_eigenvalue(dense);
  }
  return affine(std::move(map), lip, std::max(0.0, mu));
}

SingleValuedOp SingleValuedOp::affine(Matrix linear, Vector offset) {
  return affine(AffineMap{std::move(linear), 0.0, std::move(offset)});
}

SingleValuedOp SingleValuedOp::identity(Index n) { return scaled_identity(n, 1.0, Vector::Zero(n)); }

SingleValuedOp SingleValuedOp::scaled_identity(Index n, double scale, Vector offset) {
  require_dimension(offset, n, "SingleValuedOp::scaled_identity");
  return affine(AffineMap{std::nullopt, scale, std::move(offset)});
}

SingleValuedOp SingleValuedOp::zero(Index n) { return scaled_identity(n, 0.0, Vector::Zero(n)); }

Vector SingleValuedOp::operator()(const Vector& x) const { return evaluate_(x); }

double SingleValuedOp::cocoercivity() const {
  if (lipschitz_ == 0.0) return std::numeric_limits<double>::infinity();
  return strong_monotonicity_ / (lipschitz_ * lipschitz_);
}

DomainDescriptor DomainDescriptor::whole_space() { return {}; }

DomainDescriptor DomainDescriptor::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw DimensionError("DomainDescriptor::box: bound lengths differ");
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("DomainDescriptor::box: lower bound exceeds upper bound");
  }
  DomainDescriptor d;
  d.kind = Kind::Box;
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  return d;
}

DomainDescriptor DomainDescriptor::matrix_box(double lower, double upper, Shape shape) {
  DomainDescriptor d = box(Vector::Constant(shape.size(), lower), Vector::Constant(shape.size(), upper));
  d.kind = Kind::MatrixBox;
  d.shape = shape;
  return d;
}

double DomainDescriptor::diameter() const {
  if (!is_box()) return std::numeric_limits<double>::infinity();
  return (upper - lower).norm();
}

bool DomainDescriptor::contains(const Vector& x, double tolerance) const {
  if (!is_box()) return true;
  require_dimension(x, lower.size(), "DomainDescriptor::contains");
  return (x.array() >= lower.array() - tolerance).all() && (x.array() <= upper.array() + tolerance).all();
}

ResolventOp::ResolventOp(Fn resolve, DomainDescriptor domain, std::optional<double> lipschitz)
    : resolve_(std::move(resolve)), domain_(std::move(domain)), lipschitz_(lipschitz) {}

ResolventOp ResolventOp::box_normal_cone(Vector lower, Vector upper) {
  DomainDescriptor dom = DomainDescriptor::box(std::move(lower), std::move(upper));
  auto lo = std::make_shared<const Vector>(dom.lower);
  auto hi = std::make_shared<const Vector>(dom.upper);
  return ResolventOp([lo, hi](const Vector& y, double) { return project_box(y, *lo, *hi); }, std::move(dom));
}

ResolventOp ResolventOp::matrix_box_normal_cone(double lower, double upper, Shape shape) {
  DomainDescriptor dom = DomainDescriptor::matrix_box(lower, upper, shape);
  return ResolventOp(
      [lower, upper, n = shape.size()](const Vector& y, double) {
        require_dimension(y, n, "matrix box projection");
        return Vector(y.cwiseMax(lower).cwiseMin(upper));
      },
      std::move(dom));
}

ResolventOp ResolventOp::nuclear_norm(double sigma, Shape shape) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("nuclear_norm: sigma must be nonnegative");
  return ResolventOp([sigma, shape](const Vector& y, double gamma) { return svt(y, shape, gamma * sigma); },
                     DomainDescriptor::whole_space());
}

ResolventOp ResolventOp::linear(Matrix k) {
  if (k.rows() != k.cols()) throw DimensionError("ResolventOp::linear: matrix must be square");
  const double lip = spectral_norm(k);
  auto shared = std::make_shared<const Matrix>(std::move(k));
  return ResolventOp(
      [shared](const Vector& y, double gamma) {
        require_dimension(y, shared->rows(), "linear resolvent");
        const Matrix system = Matrix::Identity(shared->rows(), shared->cols()) + gamma * *shared;
        return Vector(system.partialPivLu().solve(y));
      },
      DomainDescriptor::whole_space(), lip);
}

ResolventOp ResolventOp::zero(Index n) {
  return ResolventOp(
      [n](const Vector& y, double) {
        require_dimension(y, n, "zero resolvent");
        return y;
      },
      DomainDescriptor::whole_space(), 0.0);
}

Vector ResolventOp::operator()(const Vector& y, double gamma) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("resolvent step must be positive");
  return resolve_(y, gamma);
}

Index OperatorBundle::dimension() const {
  const auto& dom = domain();
  if (dom.is_box()) return dom.lower.size();
  if (upper.affine_map()) return upper.affine_map()->dimension();
  if (lower_smooth.affine_map()) return lower_smooth.affine_map()->dimension();
  return 0;
}

const DomainDescriptor& OperatorBundle::domain() const {
  if (!lower_resolvent_a.domain().is_box() && lower_resolvent_b && lower_resolvent_b->domain().is_box()) {
    return lower_resolvent_b->domain();
  }
  return lower_resolvent_a.domain();
}

Vector project_box(const Vector& y, const Vector& lower, const Vector& upper) {
  require_dimension(lower, y.size(), "project_box");
  require_dimension(upper, y.size(), "project_box");
  return y.cwiseMax(lower).cwiseMin(upper);
}

Matrix svt(const Matrix& y, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("svt: threshold must be nonnegative");
  if (!y.allFinite()) throw NumericalError("svt: non-finite input");
  if (y.size() == 0) return y;
  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("svt: SVD failed");
  const Vector shrunk = (svd.singularValues().array() - threshold).max(0.0).matrix();
  Index keep = 0;
  while (keep < shrunk.size() && shrunk[keep] > 0.0) ++keep;
  if (keep == 0) return Matrix::Zero(y.rows(), y.cols());
  return svd.matrixU().leftCols(keep) * shrunk.head(keep).asDiagonal() *
         svd.matrixV().leftCols(keep).transpose();
}

Vector svt(const Vector& y, Shape shape, double threshold) {
  return from_matrix(svt(as_matrix(y, shape), threshold));
}

double nuclear_norm(const Matrix& y) {
  if (y.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(y);
  return svd.singularValues().sum();
}

SingleValuedOp build_phi(const Vector& anchor, double alpha, double beta, const SingleValuedOp& smooth,
                         const SingleValuedOp& upper) {
  const double lip = smooth.lipschitz() + beta * upper.lipschitz() + alpha;
  const auto& fa = smooth.affine_map();
  const auto& ga = upper.affine_map();
  if (fa && ga) {
    require_dimension(anchor, fa->dimension(), "build_phi");
    require_dimension(anchor, ga->dimension(), "build_phi");
    AffineMap map;
    if (fa->linear && ga->linear) {
      map.linear = *fa->linear + beta * *ga->linear;
    } else if (fa->linear) {
      map.linear = *fa->linear;
    } else if (ga->linear) {
      map.linear = beta * *ga->linear;
    }
    map.shift = fa->shift + beta * ga->shift + alpha;
    map.offset = fa->offset + beta * ga->offset - alpha * anchor;
    return SingleValuedOp::affine(std::move(map), lip, alpha);
  }
  auto w = std::make_shared<const Vector>(anchor);
  return SingleValuedOp(
      [w, alpha, beta, smooth, upper](const Vector& v) {
        Vector out = smooth(v);
        out += beta * upper(v);
        out += alpha * (v - *w);
        return out;
      },
      lip, alpha);
}

std::function<Vector(const Vector&)> make_phi_resolvent(const SingleValuedOp& phi, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("resolve_phi: gamma must be positive");
  if (const auto& affine = phi.affine_map()) {
    const double diag = 1.0 + gamma * affine->shift;
    auto offset = std::make_shared<const Vector>(gamma * affine->offset);
    if (!affine->linear) {
      return [diag, offset](const Vector& y) -> Vector { return (y - *offset) / diag; };
    }
    const Index n = affine->dimension();
    Matrix system = gamma * *affine->linear;
    system.diagonal().array() += diag;
    auto lu = std::make_shared<const Eigen::PartialPivLU<Matrix>>(system);
    return [lu, offset, n](const Vector& y) -> Vector {
      require_dimension(y, n, "resolve_phi");
      return lu->solve(y - *offset);
    };
  }
  // x -> x + gamma phi(x) is (1 + gamma mu)-strongly monotone and
  // (1 + gamma L)-Lipschitz; a gradient step of length m / M^2 on its
  // residual contracts with factor sqrt(1 - m^2 / M^2).
  const double m = 1.0 + gamma * phi.strong_monotonicity();
  const double big_m = 1.0 + gamma * phi.lipschitz();
  const double rho = m / (big_m * big_m);
  return [phi, gamma, rho](const Vector& y) -> Vector {
    const double tolerance = 1e-10 * (1.0 + y.norm());
    Vector x = y;
    for (std::size_t it = 0; it < kResolventSubIterationCap; ++it) {
      const Vector residual = x + gamma * phi(x) - y;
      if (!residual.allFinite()) throw NumericalError("resolve_phi: non-finite residual");
      if (residual.norm() <= tolerance) return x;
      x -= rho * residual;
    }
    throw NumericalError("resolve_phi: sub-iteration did not converge within " +
                         std::to_string(kResolventSubIterationCap) + " sweeps");
  };
}

Vector resolve_phi(const SingleValuedOp& phi, const Vector& y, double gamma) {
  return make_phi_resolvent(phi, gamma)(y);
}

ProblemConstants estimate_constants(const OperatorBundle& bundle, SeededRng& rng, std::size_t samples) {
  if (samples == 0) throw std::invalid_argument("estimate_constants: sample count must be positive");
  const DomainDescriptor& dom = bundle.domain();
  if (!dom.is_box()) throw std::invalid_argument("estimate_constants: requires a box domain");
  ProblemConstants out;
  out.domain_diameter = dom.diameter();
  out.upper_bound_norm = box_max_norm(bundle.upper, dom, rng, samples);
  out.lower_bound_norm = box_max_norm(bundle.lower_smooth, dom, rng, samples);
  return out;
}

}  // namespace dante
