#include "dante/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include <Eigen/SVD>

#include "dante/experiment.hpp"
#include "dante/gaps.hpp"
#include "dante/inner_loop.hpp"

namespace dante {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Lazily shared runs, so several checks can inspect the same run.
struct Runs {
  std::unique_ptr<ExperimentResult> equilibrium;

  const ExperimentResult& equilibrium_run() {
    if (!equilibrium) {
      RunConfig cfg;
      cfg.set("experiment", "equilibrium");
      equilibrium = std::make_unique<ExperimentResult>(run_experiment(cfg));
    }
    return *equilibrium;
  }
};

CriterionResult equilibrium_reproduction(Runs& runs) {
  const ExperimentResult& r = runs.equilibrium_run();
  const Vector target = Vector::Map(std::vector<double>{11.0, 10.0}.data(), 2);
  const double dist = distance(r.run.average, target);
  // Row n holds w_bar_{n+1}; "the value at n = 10" is w_bar_10, row 9.
  const TraceCsvRow& early = r.rows.at(9);
  const TraceCsvRow& last = r.rows.back();
  const double opt_ratio = last.gap_opt / early.gap_opt;
  const double feas_ratio = last.gap_feas / early.gap_feas;
  const bool ok = dist <= 0.5 && early.gap_opt > 0.0 && early.gap_feas > 0.0 && opt_ratio <= 0.1 &&
                  feas_ratio <= 0.1 && r.wall_seconds <= 60.0;
  return {"equilibrium_reproduction", ok,
          "dist=" + fmt(dist) + " gap_opt " + fmt(early.gap_opt) + "->" + fmt(last.gap_opt) + " (ratio " +
              fmt(opt_ratio) + ") gap_feas " + fmt(early.gap_feas) + "->" + fmt(last.gap_feas) + " (ratio " +
              fmt(feas_ratio) + ") time=" + fmt(r.wall_seconds) + "s",
          0.0};
}

CriterionResult inner_loop_guarantee() {
  SeededRng rng(2024);
  const double half = 5.0;
  const double diameter = 2.0 * half * std::sqrt(2.0);
  const Vector lo = Vector::Constant(2, -half);
  const Vector hi = Vector::Constant(2, half);
  int within_bound = 0;
  int within_cap = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Matrix a = sample_gaussian_matrix(rng, 2, 2, 1.0);
    a *= rng.uniform(0.05, 0.9) / spectral_norm(a);
    const double q = spectral_norm(a);
    const Vector p = sample_box(rng, lo, hi);
    const Vector c = p - a * p;
    const Vector v0 = sample_box(rng, lo, hi);
    const Encoding enc(
        EncodingKind::ForwardBackward, [a, c](const Vector& z) -> Vector { return a * z + c; },
        [](const Vector& v) { return v; }, q, std::nullopt);
    const double theta = rng.uniform(0.3, 0.95);
    const double tau = 0.99 * max_tau(theta, q).value;
    const double eps = std::pow(10.0, -rng.uniform(2.0, 8.0));
    const KmResult res = km_solve(v0, enc, {tau, theta, eps, kDefaultHardCap});
    const double err = distance(res.v_final, p);
    const double bound = tracking_error_bound(eps, theta, q);
    const double big_q = relaxed_factor(theta, q);
    const std::size_t cap = iteration_cap(iteration_constant(tau, theta, big_q, diameter), eps, big_q);
    if (err <= bound) ++within_bound;
    if (res.iterations <= cap) ++within_cap;
    worst_ratio = std::max(worst_ratio, err / bound);
  }
  return {"inner_loop_guarantee", within_bound == 100 && within_cap == 100,
          "error<=bound " + std::to_string(within_bound) + "/100, K<=cap " + std::to_string(within_cap) +
              "/100, worst error/bound=" + fmt(worst_ratio),
          0.0};
}

CriterionResult contraction_factors() {
  SeededRng rng(7);
  double worst_excess = -1.0;
  std::size_t pairs = 0;
  std::string worst;
  for (int inst = 0; inst < 50; ++inst) {
    const Index n = 2 + static_cast<Index>(rng.below(5));
    const Matrix r1 = sample_gaussian_matrix(rng, n, n, 1.0);
    const Matrix r2 = sample_gaussian_matrix(rng, n, n, 1.0);
    const Matrix r3 = sample_gaussian_matrix(rng, n, n, 1.0);
    // F monotone (PSD plus skew), G strongly monotone.
    const Matrix mf = r1 * r1.transpose() / static_cast<double>(n) + (r2 - r2.transpose());
    const Matrix mg = Matrix::Identity(n, n) * rng.uniform(0.1, 1.0) + r3 * r3.transpose() / static_cast<double>(n);
    const Vector lo = sample_gaussian(rng, n, 1.0);
    const Vector hi = lo + Vector::Constant(n, 1.0) + sample_gaussian(rng, n, 1.0).cwiseAbs();
    OperatorBundle bundle{SingleValuedOp::affine(mg, sample_gaussian(rng, n, 1.0)),
                          SingleValuedOp::affine(mf, sample_gaussian(rng, n, 1.0)),
                          ResolventOp::box_normal_cone(lo, hi), std::nullopt, {}};
    const double alpha = rng.uniform(0.1, 2.0);
    const double beta = rng.uniform(0.01, 1.0);
    const Vector anchor = sample_gaussian(rng, n, 3.0);
    // Independent Lipschitz constant of Phi = F + beta G + alpha (Id - w).
    const double lip = spectral_norm(mf) + beta * spectral_norm(mg) + alpha;
    const double gamma = rng.uniform(0.05, 1.95) * alpha / (lip * lip);
    const double q_fbbf = std::sqrt(1.0 - gamma * (2.0 * alpha - gamma * lip * lip));
    const double l2 = lip * lip;
    const double q_dr = 0.5 + 0.5 * std::sqrt((1.0 - 2.0 * alpha + l2) / (1.0 + 2.0 * alpha + l2));
    const std::vector<std::pair<Encoding, double>> encodings = {
        {fb_encoding(bundle, anchor, alpha, beta, gamma), q_fbbf},
        {bf_encoding(bundle, anchor, alpha, beta, gamma), q_fbbf},
        {dr_encoding(bundle, anchor, alpha, beta), q_dr},
    };
    for (const auto& [enc, q_formula] : encodings) {
      if (std::abs(enc.contraction_factor() - q_formula) > 1e-12) {
        return {"contraction_factors", false,
                "instance " + std::to_string(inst) + " " + std::string(to_string(enc.kind())) + ": reported q " +
                    fmt(enc.contraction_factor()) + " differs from formula " + fmt(q_formula),
                0.0};
      }
      for (int k = 0; k < 1000; ++k) {
        const Vector z1 = sample_gaussian(rng, n, 4.0) + anchor;
        const Vector z2 = k % 2 == 0 ? Vector(z1 + sample_gaussian(rng, n, 1e-2)) : Vector(sample_gaussian(rng, n, 4.0));
        const double d = distance(z1, z2);
        if (d == 0.0) continue;
        const double ratio = distance(enc.apply(z1), enc.apply(z2)) / d;
        ++pairs;
        if (ratio - q_formula > worst_excess) {
          worst_excess = ratio - q_formula;
          worst = std::string(to_string(enc.kind())) + " instance " + std::to_string(inst);
        }
      }
    }
  }
  return {"contraction_factors", worst_excess <= 1e-12,
          std::to_string(pairs) + " pairs, max(ratio - q)=" + fmt(worst_excess) + " (" + worst + ")", 0.0};
}

CriterionResult energy_inequality(Runs& runs, const AcceptanceOptions& options) {
  const ExperimentResult& r = runs.equilibrium_run();
  const OperatorBundle& bundle = r.instance.bundle;
  const Trace& trace = r.run.trace;
  BoundConstants constants =
      bound_constants_from_trace(trace, bundle.constants, distance_to_domain(r.config.w0, bundle.domain()));
  if (options.c1_override) constants.c1 = *options.c1_override;

  const DomainDescriptor& dom = bundle.domain();
  const Vector margin = 1e-3 * (dom.upper - dom.lower);
  SeededRng rng(11);
  double worst_energy = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    const Vector x = sample_box(rng, dom.lower + margin, dom.upper - margin);
    // Interior point: the normal cone is {0}, so M x = {F x}.
    const Vector v = bundle.lower_smooth(x);
    const EnergyCheck check = energy_check(trace, bundle.upper, x, v, constants.c1);
    if (check.skipped) return {"energy_inequality", false, "energy check skipped (points not stored)", 0.0};
    worst_energy = std::max(worst_energy, check.max_residual);
  }

  double worst_opt = -std::numeric_limits<double>::infinity();
  double worst_feas = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  for (const TraceCsvRow& row : r.rows) {
    const BoundSums sums = bound_sums(trace, row.n + 1);
    worst_opt = std::max(worst_opt, row.gap_opt - bound_opt(sums, constants));
    worst_feas = std::max(worst_feas, row.gap_feas - bound_feas(sums, constants));
    ++checked;
  }
  const bool ok = worst_energy <= 1e-8 && worst_opt <= 0.0 && worst_feas <= 0.0 && checked == r.rows.size();
  return {"energy_inequality", ok,
          "max LHS-RHS=" + fmt(worst_energy) + " over 10 points, max gap_opt-bound=" + fmt(worst_opt) +
              ", max gap_feas-bound=" + fmt(worst_feas) + " over " + std::to_string(checked) + " N, C1=" +
              fmt(constants.c1),
          0.0};
}

CriterionResult closed_forms() {
  ProblemInstance inst = build_equilibrium();
  DanteConfig cfg = inst.defaults;
  cfg.n_outer = 100;
  cfg.mu = 1.0;
  cfg.schedules.kind = ScheduleKind::StronglyMonotone;
  cfg.schedules.xi = 3.0;
  const double alpha = cfg.alpha;
  const double mu = cfg.mu;
  const double xi = cfg.schedules.xi;
  const DanteResult run = dante_run(inst.bundle, cfg);

  double worst_lambda = 0.0;
  double worst_sum = 0.0;
  Vector direct = Vector::Zero(2);
  double direct_weight = 0.0;
  for (const TraceRow& row : run.trace.rows) {
    const double n = static_cast<double>(row.n);
    const double lambda_exact = (2.0 * mu * n + xi) / xi;
    const double sum_exact = (n + 1.0) * alpha / xi;
    worst_lambda = std::max(worst_lambda, std::abs(row.lambda - lambda_exact) / lambda_exact);
    worst_sum = std::max(worst_sum, std::abs(row.weight_sum - sum_exact) / sum_exact);
    direct += row.lambda * row.beta * row.anchor;
    direct_weight += row.lambda * row.beta;
  }
  direct /= direct_weight;
  const double run_avg_err = distance(direct, run.average) / std::max(1.0, norm(direct));

  // Recursive averaging against the direct weighted sum on random data.
  SeededRng rng(5);
  Vector avg = Vector::Zero(4);
  Vector num = Vector::Zero(4);
  double s = 0.0;
  double worst_avg = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double lambda = rng.uniform(0.5, 3.0);
    const double beta = rng.uniform(0.01, 1.0);
    const Vector w = sample_gaussian(rng, 4, 10.0);
    const double s_next = s + lambda * beta;
    avg = averaged_update(avg, s, s_next, lambda, beta, w);
    num += lambda * beta * w;
    s = s_next;
    const Vector ref = num / s;
    worst_avg = std::max(worst_avg, distance(avg, ref) / std::max(1.0, norm(ref)));
  }
  const bool ok = worst_lambda <= 1e-12 && worst_sum <= 1e-12 && worst_avg <= 1e-12 && run_avg_err <= 1e-12;
  return {"closed_forms", ok,
          "lambda rel err=" + fmt(worst_lambda) + ", weight sum rel err=" + fmt(worst_sum) +
              ", averaging err=" + fmt(worst_avg) + ", run average err=" + fmt(run_avg_err),
          0.0};
}

CriterionResult parameter_quadratic() {
  const double theta = 0.7;
  const double q = 0.5;
  // Independent restatement of the admissibility quadratic in tau.
  auto quad = [&](double t) {
    const double q2 = q * q;
    return -t * t * (1.0 - 2.0 * theta + theta * theta * (1.0 - q2)) + t * (2.0 - (2.0 - q2) * theta) -
           (1.0 - (1.0 - q2) * theta) * (1.0 - theta);
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (quad(mid) < 0.0 ? lo : hi) = mid;
  }
  const double oracle = 0.5 * (lo + hi);
  const TauBound tb = max_tau(theta, q);
  const bool below = validate_km_params(tb.value - 1e-3, theta, q);
  const bool above = validate_km_params(tb.value + 1e-3, theta, q);
  const bool ok = tb.has_root && std::abs(tb.value - 0.18248) <= 1e-4 && std::abs(tb.value - oracle) <= 1e-4 &&
                  below && !above;
  return {"parameter_quadratic", ok,
          "max_tau=" + fmt(tb.value) + " bisection=" + fmt(oracle) + " valid(-1e-3)=" + (below ? "true" : "false") +
              " valid(+1e-3)=" + (above ? "true" : "false"),
          0.0};
}

CriterionResult rate_envelope() {
  const double b = 0.55;
  const std::size_t n_max = 1000;
  Trace trace;
  trace.alpha = 0.1;
  trace.q_bar = 0.5;
  trace.relaxed_bar = relaxed_factor(0.7, 0.5);
  for (std::size_t n = 0; n < n_max; ++n) {
    TraceRow row;
    row.n = n;
    row.beta = beta_monotone(n, b);
    row.tracking_error = 0.0;
    row.lambda = row.lambda_next = 1.0;
    trace.rows.push_back(row);
  }
  const ProblemInstance inst = build_equilibrium();
  const BoundConstants constants = bound_constants_from_trace(trace, inst.bundle.constants);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t n = 100; n <= n_max; n += 10) {
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(bound_opt(n, trace, constants));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return {"rate_envelope", std::abs(slope + (1.0 - b)) <= 0.05,
          "fitted slope=" + fmt(slope) + " expected " + fmt(-(1.0 - b)), 0.0};
}

CriterionResult lnls() {
  RunConfig cfg;
  cfg.set("experiment", "lnls");
  cfg.set("seed", "1");
  const ExperimentResult r = run_experiment(cfg);
  const double err0 = *r.metric("initial_err_to_ref");
  const double err1 = *r.metric("final_err_to_ref");
  const double obj0 = *r.metric("initial_lower_obj");
  const double obj1 = *r.metric("final_lower_obj");
  const bool ok = err1 <= 0.1 * err0 && obj1 <= 0.01 * obj0 && r.wall_seconds <= 300.0;
  return {"lnls", ok,
          "err " + fmt(err0) + "->" + fmt(err1) + ", function gap " + fmt(obj0) + "->" + fmt(obj1) +
              ", time=" + fmt(r.wall_seconds) + "s",
          0.0};
}

CriterionResult inpainting() {
  RunConfig cfg;
  cfg.set("experiment", "inpainting");
  const ExperimentResult r = run_experiment(cfg);
  const double obj0 = *r.metric("initial_lower_obj");
  const double obj1 = *r.metric("final_lower_obj");
  const std::size_t window = 50;
  std::size_t violations = 0;
  for (std::size_t i = window; i < r.rows.size(); ++i) {
    const double before = r.rows[i - window].lower_obj;
    if (r.rows[i].lower_obj > before + 1e-12 * std::max(1.0, std::abs(before))) ++violations;
  }
  const bool ok = obj1 <= 0.5 * obj0 && violations == 0 && r.wall_seconds <= 300.0 &&
                  !r.run.trace.contraction_mode();
  return {"inpainting", ok,
          "objective " + fmt(obj0) + "->" + fmt(obj1) + " (ratio " + fmt(obj1 / obj0) + "), window increases=" +
              std::to_string(violations) + ", time=" + fmt(r.wall_seconds) + "s",
          0.0};
}

CriterionResult combined_complexity(Runs& runs) {
  const ExperimentResult& r = runs.equilibrium_run();
  const Trace& trace = r.run.trace;
  if (!trace.iteration_constant) return {"combined_complexity", false, "run has no iteration constant", 0.0};
  const std::size_t n_outer = trace.rows.size();
  const double bound = combined_inner_bound(n_outer, *trace.iteration_constant, trace.relaxed_bar,
                                            r.config.schedules);
  std::vector<double> cumulative(n_outer + 1, 0.0);
  for (std::size_t n = 0; n < n_outer; ++n) {
    cumulative[n + 1] = cumulative[n] + static_cast<double>(trace.rows[n].inner_iterations);
  }
  // Fit c on the first half, check the envelope on the second.
  double c = 0.0;
  for (std::size_t n = 10; n <= n_outer / 2; ++n) {
    c = std::max(c, cumulative[n] / (static_cast<double>(n) * std::log(static_cast<double>(n))));
  }
  std::size_t above = 0;
  for (std::size_t n = n_outer / 2; n <= n_outer; ++n) {
    if (cumulative[n] > c * static_cast<double>(n) * std::log(static_cast<double>(n))) ++above;
  }
  const double total = static_cast<double>(trace.total_inner_iterations);
  const bool ok = total <= bound && above == 0;
  return {"combined_complexity", ok,
          "total inner=" + fmt(total) + " bound=" + fmt(bound) + ", fitted c=" + fmt(c) +
              ", N log N violations=" + std::to_string(above),
          0.0};
}

}  // namespace

const std::vector<std::string>& acceptance_names() {
  static const std::vector<std::string> names = {
      "equilibrium_reproduction", "inner_loop_guarantee", "contraction_factors", "energy_inequality",
      "closed_forms",             "parameter_quadratic",  "rate_envelope",       "lnls",
      "inpainting",               "combined_complexity",
  };
  return names;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  for (const auto& name : options.only) {
    const auto& all = acceptance_names();
    if (std::find(all.begin(), all.end(), name) == all.end()) {
      throw std::invalid_argument("unknown acceptance check '" + name + "'");
    }
  }
  Runs runs;
  std::vector<CriterionResult> results;
  for (const std::string& name : acceptance_names()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), name) == options.only.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      if (name == "equilibrium_reproduction") result = equilibrium_reproduction(runs);
      else if (name == "inner_loop_guarantee") result = inner_loop_guarantee();
      else if (name == "contraction_factors") result = contraction_factors();
      else if (name == "energy_inequality") result = energy_inequality(runs, options);
      else if (name == "closed_forms") result = closed_forms();
      else if (name == "parameter_quadratic") result = parameter_quadratic();
      else if (name == "rate_envelope") result = rate_envelope();
      else if (name == "lnls") result = lnls();
      else if (name == "inpainting") result = inpainting();
      else result = combined_complexity(runs);
    } catch (const std::exception& e) {
      result = {name, false, std::string("error: ") + e.what(), 0.0};
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(result);
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace dante
