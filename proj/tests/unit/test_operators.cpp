#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "dante/errors.hpp"
#include "dante/operators.hpp"

using namespace dante;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
Matrix mat1(double a) { return Matrix::Constant(1, 1, a); }
}  // namespace

TEST_CASE("box projection") {
  const Vector lo = vec({11, 10});
  const Vector hi = vec({60, 50});
  CHECK(project_box(vec({20, 20}), lo, hi) == vec({20, 20}));
  CHECK(project_box(vec({70, 5}), lo, hi) == vec({60, 10}));
  SeededRng rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vector y = sample_gaussian(rng, 2, 50.0);
    const Vector p = project_box(y, lo, hi);
    CHECK(project_box(p, lo, hi) == p);
    // Variational characterization: <y - p, z - p> <= 0 for z in the box.
    const Vector z = sample_box(rng, lo, hi);
    CHECK(dot(y - p, z - p) <= 1e-9);
  }
}

TEST_CASE("singular value thresholding") {
  SeededRng rng(8);
  const Matrix y = sample_gaussian_matrix(rng, 5, 4, 1.0);
  CHECK((svt(y, 0.0) - y).norm() < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1;
  CHECK((svt(d, 2.0) - expected).norm() < 1e-12);

  const double smax = Eigen::JacobiSVD<Matrix>(y).singularValues()(0);
  CHECK(svt(y, smax).norm() < 1e-12);
  CHECK(svt(y, smax + 1.0).norm() == 0.0);

  const Matrix shrunk = svt(y, 0.5);
  CHECK(nuclear_norm(shrunk) <= nuclear_norm(y));
}

TEST_CASE("auxiliary map") {
  const Vector w = Vector::Zero(2);
  const SingleValuedOp phi = build_phi(w, 1.0, 1.0, SingleValuedOp::zero(2), SingleValuedOp::identity(2));
  CHECK((phi(vec({1.5, -2})) - vec({3, -4})).norm() < 1e-15);

  const Vector anchor = vec({2, 3});
  const SingleValuedOp anchored = build_phi(anchor, 0.7, 0.0, SingleValuedOp::zero(2), SingleValuedOp::identity(2));
  CHECK(anchored(anchor).norm() < 1e-15);
  CHECK((anchored(vec({3, 3})) - vec({0.7, 0})).norm() < 1e-15);

  const SingleValuedOp f = SingleValuedOp::affine(2.0 * Matrix::Identity(2, 2), Vector::Zero(2));
  const SingleValuedOp phi2 = build_phi(w, 1.0, 0.5, f, SingleValuedOp::identity(2));
  CHECK(phi2.lipschitz() == doctest::Approx(3.5));
  CHECK(phi2.strong_monotonicity() >= 1.0 - 1e-12);
}

TEST_CASE("resolvent of the auxiliary map") {
  const SingleValuedOp phi = SingleValuedOp::affine(mat1(2.0), vec({1}));
  CHECK(resolve_phi(phi, vec({4}), 1.0)[0] == doctest::Approx(1.0));

  const SingleValuedOp zero = SingleValuedOp::zero(3);
  CHECK(resolve_phi(zero, vec({1, 2, 3}), 5.0) == vec({1, 2, 3}));

  // Non-affine path: same map behind a closure.
  const SingleValuedOp closure([](const Vector& x) -> Vector { return 2.0 * x + Vector::Ones(x.size()); }, 2.0, 2.0);
  CHECK(resolve_phi(closure, vec({4}), 1.0)[0] == doctest::Approx(1.0).epsilon(1e-9));

  SeededRng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Matrix r = sample_gaussian_matrix(rng, 4, 4, 1.0);
    const Matrix m = r * r.transpose() + (r - r.transpose()) + Matrix::Identity(4, 4);
    const SingleValuedOp op = SingleValuedOp::affine(m, sample_gaussian(rng, 4, 1.0));
    const Vector y = sample_gaussian(rng, 4, 3.0);
    const double gamma = rng.uniform(0.01, 2.0);
    const Vector x = resolve_phi(op, y, gamma);
    CHECK((x + gamma * op(x) - y).norm() <= 1e-10);
    const auto cached = make_phi_resolvent(op, gamma);
    CHECK((cached(y) - x).norm() <= 1e-12);
  }
}

TEST_CASE("affine operator constants") {
  Matrix skew(2, 2);
  skew << 0, -0.1, 0.1, 0;
  const SingleValuedOp s = SingleValuedOp::affine(skew, Vector::Zero(2));
  CHECK(s.lipschitz() == doctest::Approx(0.1));
  CHECK(s.strong_monotonicity() == doctest::Approx(0.0));
  const SingleValuedOp id = SingleValuedOp::identity(3);
  CHECK(id.lipschitz() == 1.0);
  CHECK(id.strong_monotonicity() == 1.0);
}

TEST_CASE("problem constants on the equilibrium box") {
  Matrix skew(2, 2);
  skew << 0, -0.1, 0.1, 0;
  OperatorBundle bundle{SingleValuedOp::identity(2), SingleValuedOp::affine(skew, vec({1, 0})),
                        ResolventOp::box_normal_cone(vec({11, 10}), vec({60, 50})), std::nullopt, {}};
  SeededRng rng(0);
  const ProblemConstants c = estimate_constants(bundle, rng, 64);
  CHECK(c.domain_diameter == doctest::Approx(std::hypot(49.0, 40.0)));
  CHECK(c.domain_diameter == doctest::Approx(63.25).epsilon(1e-3));
  CHECK(c.upper_bound_norm == doctest::Approx(std::hypot(60.0, 50.0)));
  CHECK(c.upper_bound_norm == doctest::Approx(78.10).epsilon(1e-3));
  SeededRng rng2(0);
  CHECK_THROWS(estimate_constants(bundle, rng2, 0));
}

TEST_CASE("nuclear norm resolvent thresholds at gamma sigma") {
  const Shape shape{3, 3};
  const ResolventOp a = ResolventOp::nuclear_norm(2.0, shape);
  SeededRng rng(2);
  const Matrix y = sample_gaussian_matrix(rng, 3, 3, 3.0);
  const Vector out = a(from_matrix(y), 0.5);
  CHECK((as_matrix(out, shape) - svt(y, 1.0)).norm() < 1e-12);
}

TEST_CASE("box domain membership") {
  const DomainDescriptor d = DomainDescriptor::box(vec({0, 0}), vec({1, 2}));
  CHECK(d.contains(vec({0.5, 2})));
  CHECK_FALSE(d.contains(vec({1.5, 0})));
  CHECK(d.diameter() == doctest::Approx(std::sqrt(5.0)));
  CHECK(DomainDescriptor::whole_space().contains(vec({1e9, -1e9})));
}
