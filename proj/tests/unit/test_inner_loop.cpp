#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "dante/inner_loop.hpp"
#include "dante/outer_loop.hpp"

using namespace dante;

namespace {
Encoding linear_encoding(const Matrix& a, const Vector& c, double q) {
  return Encoding(
      EncodingKind::ForwardBackward, [a, c](const Vector& z) -> Vector { return a * z + c; },
      [](const Vector& v) { return v; }, q, std::nullopt);
}
}  // namespace

TEST_CASE("geometric iteration on a scalar contraction") {
  const Encoding enc = linear_encoding(Matrix::Constant(1, 1, 0.5), Vector::Zero(1), 0.5);
  const double eps = 1e-6;
  const KmResult res = km_solve(Vector::Ones(1), enc, {0.0, 0.5, eps, 1000});
  CHECK(res.stopped_by_criterion);
  CHECK(res.residual <= eps);
  // v_{k+1} = 0.75 v_k and the residual of pair k is 0.25 * 0.75^(k-1).
  const auto k = static_cast<std::size_t>(std::ceil(std::log(eps / 0.25) / std::log(0.75))) + 1;
  CHECK(res.iterations == k);
  CHECK(res.v_final[0] == doctest::Approx(std::pow(0.75, static_cast<double>(k))));
}

TEST_CASE("starting at the fixed point stops after one pair") {
  Matrix a(2, 2);
  a << 0.3, 0.1, -0.2, 0.4;
  const Vector p(Vector::LinSpaced(2, 1.0, 2.0));
  const Encoding enc = linear_encoding(a, p - a * p, 0.6);
  const KmResult res = km_solve(p, enc, {0.0, 0.7, 1e-9, 100});
  CHECK(res.iterations == 1);
  CHECK((res.v_final - p).norm() < 1e-14);
}

TEST_CASE("hard cap is reported, not thrown") {
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  const Encoding enc = linear_encoding(rot, Vector::Zero(2), 1.0);
  KmResult res;
  CHECK_NOTHROW(res = km_solve(Vector::Ones(2), enc, {0.0, 0.5, 1e-12, 25}));
  CHECK_FALSE(res.stopped_by_criterion);
  CHECK(res.iterations == 25);
}

TEST_CASE("tracking error bound") {
  CHECK(tracking_error_bound(0.01, 0.7, 0.5) == doctest::Approx(0.0185714).epsilon(1e-6));
  CHECK(tracking_error_bound(0.0, 0.7, 0.5) == 0.0);
  for (double eps : {1e-6, 1e-3, 0.2}) {
    CHECK(tracking_error_bound(2 * eps, 0.6, 0.8) == doctest::Approx(2 * tracking_error_bound(eps, 0.6, 0.8)));
  }
}

TEST_CASE("parameter validation") {
  for (double q : {0.0, 0.3, 0.9}) {
    for (double theta : {0.1, 0.5, 0.9}) CHECK(validate_km_params(0.0, theta, q));
  }
  CHECK(validate_km_params(0.1, 0.7, 0.5));
  CHECK_FALSE(validate_km_params(0.3, 0.7, 0.5));
  CHECK_FALSE(validate_km_params(-0.1, 0.7, 0.5));
  CHECK_FALSE(validate_km_params(0.1, 1.0, 0.5));
  // q = 1: Q = 1, so the literal quadratic is evaluated but never validates.
  CHECK(std::isfinite(km_parameter_quadratic(0.05, 0.5, 1.0)));
  CHECK_FALSE(validate_km_params(0.05, 0.5, 1.0));
}

TEST_CASE("largest admissible momentum") {
  const TauBound tb = max_tau(0.7, 0.5);
  REQUIRE(tb.has_root);
  CHECK(tb.value == doctest::Approx(0.18248).epsilon(1e-4));
  CHECK(std::abs(km_parameter_quadratic(tb.value, 0.7, 0.5)) < 1e-10);
  // Closed form from 0.0325 t^2 + 0.775 t - 0.1425 = 0.
  const double root = (-0.775 + std::sqrt(0.775 * 0.775 + 4 * 0.0325 * 0.1425)) / (2 * 0.0325);
  CHECK(tb.value == doctest::Approx(root).epsilon(1e-12));
}

TEST_CASE("momentum bound is monotone in the contraction factor") {
  // The constant-parameter inequality in (tau, Q): tau^2 (Q theta - (1 - theta))
  // + tau (Q + 1 - theta) - Q (1 - theta). Its Q-derivative at the root,
  // theta tau^2 + tau - (1 - theta), is negative here, so tau_bar shrinks
  // with q.
  for (double theta : {0.3, 0.5, 0.7, 0.9}) {
    double previous = -1.0;
    for (int i = 0; i <= 20; ++i) {
      const double q = 0.05 * i * 0.99;
      const double big_q = relaxed_factor(theta, q);
      auto f = [&](double t) { return t * t * (big_q * theta - (1 - theta)) + t * (big_q + 1 - theta) - big_q * (1 - theta); };
      double lo = 0.0;
      double hi = 1.0;
      for (int k = 0; k < 100; ++k) (f(0.5 * (lo + hi)) < 0.0 ? lo : hi) = 0.5 * (lo + hi);
      const double current = max_tau(theta, q).value;
      CHECK(current == doctest::Approx(lo).epsilon(1e-9));
      CHECK(theta * current * current + current - (1 - theta) < 0.0);
      CHECK(current >= previous);
      previous = current;
    }
  }
}

TEST_CASE("iteration cap") {
  CHECK(iteration_cap(100.0, 1.0, 0.5) == 14u);
  CHECK(iteration_cap(5.0, 5.0, 0.5) == 1u);
  CHECK(iteration_cap(5.0, 10.0, 0.5) == 1u);
  const double q = 0.8;
  const double step = 2.0 * std::log(2.0) / std::log(1.0 / q);
  for (double eps : {1e-2, 1e-4, 1e-7}) {
    const double before = static_cast<double>(iteration_cap(50.0, eps, q));
    const double after = static_cast<double>(iteration_cap(50.0, eps / 2, q));
    CHECK(after - before >= std::floor(step));
    CHECK(after - before <= std::ceil(step));
  }
}

TEST_CASE("iterations never exceed the cap on random contractions") {
  SeededRng rng(77);
  const Vector lo = Vector::Constant(3, -1.0);
  const Vector hi = Vector::Constant(3, 1.0);
  const double diameter = 2.0 * std::sqrt(3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a = sample_gaussian_matrix(rng, 3, 3, 1.0);
    a *= rng.uniform(0.1, 0.95) / Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
    const double q = Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
    const Vector p = sample_box(rng, lo, hi);
    const Encoding enc = linear_encoding(a, p - a * p, q);
    const double theta = rng.uniform(0.2, 0.9);
    const double tau = rng.uniform(0.0, 0.99) * max_tau(theta, q).value;
    REQUIRE(validate_km_params(tau, theta, q));
    const double eps = std::pow(10.0, -rng.uniform(1.0, 9.0));
    const KmResult res = km_solve(sample_box(rng, lo, hi), enc, {tau, theta, eps, kDefaultHardCap});
    const double big_q = relaxed_factor(theta, q);
    CHECK(res.iterations <= iteration_cap(iteration_constant(tau, theta, big_q, diameter), eps, big_q));
    CHECK(distance(res.v_final, p) <= tracking_error_bound(eps, theta, q));
  }
}
