#include <doctest.h>

#include <cmath>

#include "dante/errors.hpp"
#include "dante/vectorspace.hpp"

using namespace dante;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("inner product") {
  CHECK(dot(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(dot(vec({1, 2}), vec({3, 4})) == 11.0);
  SeededRng rng(3);
  for (int k = 0; k < 20; ++k) {
    const Vector x = sample_gaussian(rng, 5, 2.0);
    CHECK(dot(x, x) >= 0.0);
    CHECK(dot(x, x) == doctest::Approx(norm(x) * norm(x)));
  }
  CHECK_THROWS_AS(dot(vec({1, 2}), vec({1, 2, 3})), DimensionError);
}

TEST_CASE("axpy") {
  const Vector x = vec({1, 1});
  const Vector y = vec({1, 2});
  CHECK(axpy(0.0, x, y) == y);
  CHECK(axpy(1.0, x, Vector::Zero(2)) == x);
  CHECK(axpy(2.0, x, y) == vec({3, 4}));
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  SeededRng rng(9);
  for (int k = 0; k < 50; ++k) {
    const Vector a = sample_gaussian(rng, 3, 1.0);
    const Vector b = sample_gaussian(rng, 3, 1.0);
    const Vector c = sample_gaussian(rng, 3, 1.0);
    CHECK(distance(a, b) == doctest::Approx(distance(b, a)));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST_CASE("matrix reshape round trip is column-major") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Vector v = from_matrix(m);
  CHECK(v[1] == 4.0);
  CHECK(as_matrix(v, {2, 3}) == m);
  CHECK_THROWS_AS(as_matrix(v, {4, 2}), DimensionError);
}

TEST_CASE("gaussian sampling") {
  SeededRng a(42);
  SeededRng b(42);
  CHECK(sample_gaussian(a, 100, 1.0) == sample_gaussian(b, 100, 1.0));

  SeededRng z(1);
  CHECK(sample_gaussian(z, 10, 0.0).isZero());

  SeededRng big(7);
  const Vector x = sample_gaussian(big, 100000, 1.0);
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sd - 1.0) < 0.02);
}

TEST_CASE("different seeds give different streams") {
  SeededRng a(1);
  SeededRng b(2);
  CHECK(sample_gaussian(a, 8, 1.0) != sample_gaussian(b, 8, 1.0));
}

TEST_CASE("uniform draws stay in range") {
  SeededRng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7u);
  }
  const Vector lo = vec({-1, 10});
  const Vector hi = vec({1, 11});
  for (int k = 0; k < 100; ++k) {
    const Vector p = sample_box(rng, lo, hi);
    CHECK((p.array() >= lo.array()).all());
    CHECK((p.array() <= hi.array()).all());
  }
}

TEST_CASE("all_finite") {
  CHECK(all_finite(vec({1, 2})));
  CHECK_FALSE(all_finite(vec({1, std::nan("")})));
  CHECK_FALSE(all_finite(vec({INFINITY, 0})));
}
