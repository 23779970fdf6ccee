#include <doctest.h>

#include <cmath>

#include "dante/errors.hpp"
#include "dante/problems.hpp"

using namespace dante;

TEST_CASE("monotone schedule") {
  CHECK(beta_monotone(0, 0.55) == 1.0);
  CHECK(beta_monotone(999, 0.55) == doctest::Approx(0.02239).epsilon(1e-3));
  CHECK(beta_monotone(999, 0.55) == doctest::Approx(std::pow(1000.0, -0.55)));
  for (std::size_t n = 0; n < 500; ++n) CHECK(beta_monotone(n + 1, 0.55) < beta_monotone(n, 0.55));
  CHECK_THROWS(beta_monotone(3, 0.0));
  CHECK_THROWS(beta_monotone(3, 1.0));
}

TEST_CASE("strongly monotone schedule") {
  CHECK(beta_strong(0, 0.3, 2.0, 1.5) == doctest::Approx(0.3 / 1.5));
  CHECK(beta_strong(10, 1.0, 0.5, 1.0) == doctest::Approx(1.0 / 11.0));
  CHECK_THROWS(beta_strong(1, 1.0, 0.0, 1.0));
  CHECK_THROWS(beta_strong(1, 1.0, 1.0, 0.0));
}

TEST_CASE("default tolerances vanish faster than the step weights") {
  Schedules s;
  CHECK(s.tolerance_vanishes_faster());
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < 2000; n += 50) {
    const double ratio = s.epsilon(n) / s.beta(n, 0.1, 0.0);
    CHECK(ratio <= previous);
    previous = ratio;
  }
  CHECK(previous < 1e-7);
  s.eps_exponent = 0.3;
  CHECK_FALSE(s.tolerance_vanishes_faster());
}

TEST_CASE("recursive averaging") {
  const Vector w1 = Vector::LinSpaced(3, 1.0, 3.0);
  CHECK(averaged_update(Vector::Zero(3), 0.0, 0.7, 1.0, 0.7, w1) == w1);

  // Equal weights give the arithmetic mean.
  Vector avg = Vector::Zero(2);
  Vector sum = Vector::Zero(2);
  SeededRng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vector w = sample_gaussian(rng, 2, 1.0);
    avg = averaged_update(avg, 0.5 * k, 0.5 * (k + 1), 1.0, 0.5, w);
    sum += w;
    CHECK((avg - sum / (k + 1)).norm() < 1e-14);
  }

  avg = Vector::Zero(2);
  Vector num = Vector::Zero(2);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double lambda = rng.uniform(0.5, 2.0);
    const double beta = rng.uniform(0.1, 1.0);
    const Vector w = sample_gaussian(rng, 2, 1.0);
    avg = averaged_update(avg, s, s + lambda * beta, lambda, beta, w);
    s += lambda * beta;
    num += lambda * beta * w;
  }
  CHECK((avg - num / s).norm() < 1e-14);
  CHECK_THROWS(averaged_update(avg, 0.0, 0.0, 1.0, 0.0, avg));
}

TEST_CASE("single outer step returns its anchor as the average") {
  ProblemInstance inst = build_equilibrium();
  DanteConfig cfg = inst.defaults;
  cfg.n_outer = 1;
  const DanteResult r = dante_run(inst.bundle, cfg);
  REQUIRE(r.trace.rows.size() == 1);
  CHECK((r.average - r.anchor).norm() == 0.0);
}

TEST_CASE("run bookkeeping") {
  ProblemInstance inst = build_equilibrium();
  DanteConfig cfg = inst.defaults;
  cfg.n_outer = 200;
  std::size_t calls = 0;
  const DanteResult r = dante_run(inst.bundle, cfg, [&](const IterationView& view) {
    CHECK(view.n == calls);
    ++calls;
  });
  CHECK(calls == 200);
  std::size_t total = 0;
  double s = 0.0;
  for (const TraceRow& row : r.trace.rows) {
    CHECK(row.lambda == 1.0);
    CHECK(row.inner_iterations <= row.inner_cap);
    CHECK(row.q <= r.trace.q_bar);
    CHECK(row.tracking_error == doctest::Approx(tracking_error_bound(row.epsilon, cfg.km.theta, row.q)));
    s += row.lambda * row.beta;
    CHECK(row.weight_sum == doctest::Approx(s));
    total += row.inner_iterations;
  }
  CHECK(total == r.trace.total_inner_iterations);
  CHECK(validate_km_params(r.trace.tau, r.trace.theta, r.trace.q_bar));
}

TEST_CASE("strongly monotone schedule closed forms in a run") {
  ProblemInstance inst = build_equilibrium();
  DanteConfig cfg = inst.defaults;
  cfg.n_outer = 50;
  cfg.mu = 1.0;
  cfg.schedules.kind = ScheduleKind::StronglyMonotone;
  cfg.schedules.xi = 2.0;
  const DanteResult r = dante_run(inst.bundle, cfg);
  for (const TraceRow& row : r.trace.rows) {
    const double n = static_cast<double>(row.n);
    CHECK(row.lambda == doctest::Approx((2.0 * n + 2.0) / 2.0).epsilon(1e-12));
    CHECK(row.weight_sum == doctest::Approx((n + 1.0) * cfg.alpha / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("equilibrium run approaches the least-norm solution") {
  ProblemInstance inst = build_equilibrium();
  const DanteResult r = dante_run(inst.bundle, inst.defaults);
  CHECK(distance(r.average, *inst.reference) <= 0.5);
  CHECK(r.trace.cap_breaches == 0);
}

TEST_CASE("runs are deterministic") {
  ProblemInstance inst = build_equilibrium();
  DanteConfig cfg = inst.defaults;
  cfg.n_outer = 100;
  const DanteResult a = dante_run(inst.bundle, cfg);
  const DanteResult b = dante_run(inst.bundle, cfg);
  CHECK(a.average == b.average);
  CHECK(a.trace.total_inner_iterations == b.trace.total_inner_iterations);
}

TEST_CASE("configuration validation") {
  ProblemInstance inst = build_equilibrium();
  auto rejects = [&](auto&& tweak) {
    DanteConfig cfg = inst.defaults;
    cfg.n_outer = 5;
    tweak(cfg);
    CHECK_THROWS_AS(dante_run(inst.bundle, cfg), ConfigError);
  };
  rejects([](DanteConfig& c) { c.n_outer = 0; });
  rejects([](DanteConfig& c) { c.alpha = 0.0; });
  rejects([](DanteConfig& c) { c.mu = -1.0; });
  rejects([](DanteConfig& c) { c.mu = 2.0; });
  rejects([](DanteConfig& c) { c.km.theta = 1.0; });
  rejects([](DanteConfig& c) { c.km.tau = 1.0; });
  rejects([](DanteConfig& c) { c.gamma = -0.1; });
  rejects([](DanteConfig& c) { c.encoding = EncodingKind::ThreeOperator; });
  rejects([](DanteConfig& c) { c.schedules.kind = ScheduleKind::StronglyMonotone; });
  rejects([](DanteConfig& c) { c.schedules.b = 1.5; });
  rejects([](DanteConfig& c) { c.w0 = Vector::Zero(3); });
  rejects([](DanteConfig& c) { c.w0[0] = std::nan(""); });
}

TEST_CASE("cap breach aborts a contraction-mode run") {
  ProblemInstance inst = build_equilibrium();
  DanteConfig cfg = inst.defaults;
  cfg.n_outer = 5;
  cfg.km.hard_cap = 1;
  cfg.schedules.eps_bar = 1e-12;
  CHECK_THROWS_AS(dante_run(inst.bundle, cfg), InnerLoopCapExceeded);
}

TEST_CASE("combined inner-iteration bounds") {
  Schedules s;
  const double c = 300.0;
  const double q = 0.99;
  const double lq = std::log(1.0 / q);
  for (std::size_t n_outer : {1u, 10u, 100u, 1000u}) {
    double literal = 0.0;
    double caps = 0.0;
    for (std::size_t n = 1; n <= n_outer; ++n) {
      const double eps = s.eps_bar * std::pow(static_cast<double>(n + 1), -s.eps_exponent);
      literal += 2.0 * std::log(c / eps) / lq - 1.0;
    }
    for (std::size_t n = 0; n < n_outer; ++n) {
      const double eps = s.eps_bar * std::pow(static_cast<double>(n + 1), -s.eps_exponent);
      caps += std::max(1.0, std::ceil(2.0 * std::log(c / eps) / lq));
    }
    CHECK(combined_inner_bound(n_outer, c, q, s) == doctest::Approx(literal).epsilon(1e-12));
    CHECK(summed_inner_caps(n_outer, c, q, s) == caps);
  }
}
