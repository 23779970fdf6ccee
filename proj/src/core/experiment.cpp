#include "dante/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dante/errors.hpp"

namespace dante {

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"experiment", KeyType::Choice, "equilibrium|lnls|inpainting|custom", "problem to run"},
      {"seed", KeyType::Count, nullptr, "seed for instance generation and sampling"},
      {"output_dir", KeyType::Text, nullptr, "directory for trace.csv, summary.txt and images"},
      {"log_every", KeyType::Count, nullptr, "evaluate and write every k-th outer step (the last is always kept)"},
      {"gaps", KeyType::Choice, "auto|on|off", "gap evaluation along the run"},
      {"bounds", KeyType::Choice, "auto|off", "theoretical bound evaluation (contraction mode only)"},
      {"alpha", KeyType::Real, nullptr, "proximal parameter"},
      {"mu", KeyType::Real, nullptr, "strong monotonicity of G used by the schedules"},
      {"n_outer", KeyType::Count, nullptr, "number of outer iterations N"},
      {"schedule", KeyType::Choice, "monotone|strong", "beta schedule kind"},
      {"b", KeyType::Real, nullptr, "exponent of beta_n = (n+1)^-b"},
      {"xi", KeyType::Real, nullptr, "offset of beta_n = alpha / (2 mu n + xi)"},
      {"eps_bar", KeyType::Real, nullptr, "tolerance scale"},
      {"eps_exponent", KeyType::Real, nullptr, "tolerance decay exponent"},
      {"encoding", KeyType::Choice, "FB|BF|DR|TOS", "fixed-point encoding"},
      {"theta", KeyType::Real, nullptr, "KM relaxation"},
      {"tau", KeyType::Real, nullptr, "fixed KM momentum (default derived from theta and q)"},
      {"tau_safety", KeyType::Real, nullptr, "fraction of the admissible momentum bound"},
      {"hard_cap", KeyType::Count, nullptr, "inner-iteration cap per outer step"},
      {"gamma", KeyType::Real, nullptr, "forward step (default alpha / L^2)"},
      {"tos_eta", KeyType::Real, nullptr, "eta of the three-operator contraction condition"},
      {"w0", KeyType::RealList, nullptr, "initial anchor, comma separated"},
      {"point_storage_limit", KeyType::Count, nullptr, "largest dimension for which full points are kept"},
      {"lnls_p", KeyType::Count, nullptr, "rows P of A"},
      {"lnls_q", KeyType::Count, nullptr, "columns Q of A"},
      {"lnls_rank", KeyType::Count, nullptr, "inner dimension R of A = U1 U2"},
      {"lnls_noise", KeyType::Real, nullptr, "noise scale of b"},
      {"image", KeyType::Text, nullptr, "input image (.pgm or .csv); default synthetic"},
      {"image_rows", KeyType::Count, nullptr, "synthetic image rows"},
      {"image_cols", KeyType::Count, nullptr, "synthetic image columns"},
      {"image_rank", KeyType::Count, nullptr, "synthetic image rank"},
      {"corruption", KeyType::Real, nullptr, "fraction of damaged pixels"},
      {"sigma", KeyType::Real, nullptr, "nuclear-norm weight"},
      {"custom_f", KeyType::MatrixText, nullptr, "custom F linear part, rows ';'-separated"},
      {"custom_f_offset", KeyType::RealList, nullptr, "custom F offset"},
      {"custom_g", KeyType::MatrixText, nullptr, "custom G linear part (default identity)"},
      {"custom_g_offset", KeyType::RealList, nullptr, "custom G offset (default zero)"},
      {"custom_lower", KeyType::RealList, nullptr, "custom box lower corner"},
      {"custom_upper", KeyType::RealList, nullptr, "custom box upper corner"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& spec : config_keys()) {
    if (key == spec.name) return &spec;
  }
  return nullptr;
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(value)) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError("key '" + key + "': expected a nonnegative integer, got '" + text + "'");
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': integer out of range '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

Vector parse_list(const std::string& key, const std::string& text) {
  const auto parts = split(trim(text), ',');
  if (parts.empty()) throw ConfigError("key '" + key + "': empty list");
  Vector v(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Index>(i)] = parse_real(key, parts[i]);
  return v;
}

Matrix parse_matrix(const std::string& key, const std::string& text) {
  const auto rows = split(trim(text), ';');
  if (rows.empty()) throw ConfigError("key '" + key + "': empty matrix");
  std::vector<Vector> parsed;
  for (const auto& r : rows) parsed.push_back(parse_list(key, r));
  Matrix m(static_cast<Index>(parsed.size()), parsed.front().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != m.cols()) throw ConfigError("key '" + key + "': ragged matrix rows");
    m.row(static_cast<Index>(i)) = parsed[i].transpose();
  }
  return m;
}

std::string match_choice(const KeySpec& spec, const std::string& value) {
  const std::string v = trim(value);
  for (const auto& choice : split(spec.choices, '|')) {
    if (choice.size() != v.size()) continue;
    if (std::equal(choice.begin(), choice.end(), v.begin(),
                   [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return choice;
    }
  }
  throw ConfigError(std::string("key '") + spec.name + "': expected one of " + spec.choices + ", got '" + value + "'");
}

// Typed accessors over a validated RunConfig.
struct Reader {
  const RunConfig& cfg;

  std::optional<double> real(const char* key) const {
    auto v = cfg.get(key);
    return v ? std::optional<double>(parse_real(key, *v)) : std::nullopt;
  }
  std::optional<std::uint64_t> count(const char* key) const {
    auto v = cfg.get(key);
    return v ? std::optional<std::uint64_t>(parse_count(key, *v)) : std::nullopt;
  }
  std::optional<Vector> list(const char* key) const {
    auto v = cfg.get(key);
    return v ? std::optional<Vector>(parse_list(key, *v)) : std::nullopt;
  }
  std::optional<Matrix> matrix(const char* key) const {
    auto v = cfg.get(key);
    return v ? std::optional<Matrix>(parse_matrix(key, *v)) : std::nullopt;
  }
  std::string text(const char* key, const std::string& fallback) const { return cfg.get(key).value_or(fallback); }
};

Index positive_index(const Reader& r, const char* key, std::uint64_t fallback) {
  const std::uint64_t v = r.count(key).value_or(fallback);
  if (v == 0) throw ConfigError(std::string("key '") + key + "' must be at least 1");
  return static_cast<Index>(v);
}

ProblemInstance build_custom(const Reader& r, std::uint64_t seed) {
  const auto f = r.matrix("custom_f");
  const auto lower = r.list("custom_lower");
  const auto upper = r.list("custom_upper");
  if (!f || !lower || !upper) throw ConfigError("custom experiment needs custom_f, custom_lower and custom_upper");
  const Index n = f->rows();
  if (f->cols() != n) throw ConfigError("custom_f must be square");
  if (lower->size() != n || upper->size() != n) throw ConfigError("custom box corners must match custom_f");
  if ((upper->array() < lower->array()).any()) throw ConfigError("custom_lower must not exceed custom_upper");
  const Vector f_offset = r.list("custom_f_offset").value_or(Vector::Zero(n));
  if (f_offset.size() != n) throw ConfigError("custom_f_offset has the wrong length");
  const Vector g_offset = r.list("custom_g_offset").value_or(Vector::Zero(n));
  if (g_offset.size() != n) throw ConfigError("custom_g_offset has the wrong length");

  SingleValuedOp smooth = SingleValuedOp::affine(*f, f_offset);
  const Matrix fsym = 0.5 * (*f + f->transpose());
  if (Eigen::SelfAdjointEigenSolver<Matrix>(fsym).eigenvalues().minCoeff() < -1e-12) {
    throw ConfigError("custom_f is not monotone (its symmetric part has a negative eigenvalue)");
  }
  SingleValuedOp upper_op = SingleValuedOp::scaled_identity(n, 1.0, g_offset);
  if (auto g = r.matrix("custom_g")) {
    if (g->rows() != n || g->cols() != n) throw ConfigError("custom_g must match custom_f");
    upper_op = SingleValuedOp::affine(*g, g_offset);
  }
  OperatorBundle bundle{std::move(upper_op), std::move(smooth), ResolventOp::box_normal_cone(*lower, *upper),
                        std::nullopt, {}};
  SeededRng rng(seed);
  bundle.constants = estimate_constants(bundle, rng, 256);
  ProblemInstance inst{"custom", std::move(bundle), std::nullopt, std::nullopt, {}, {}, std::nullopt, std::nullopt,
                       std::nullopt};
  inst.evaluate_gaps = true;
  inst.defaults.w0 = 0.5 * (*lower + *upper);
  return inst;
}

}  // namespace

std::string normalize_key(const std::string& key) {
  std::string k = trim(key);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string k = normalize_key(key);
  const KeySpec* spec = find_key(k);
  if (!spec) throw ConfigError("unknown configuration key '" + key + "'");
  std::string v = trim(value);
  switch (spec->type) {
    case KeyType::Real: parse_real(k, v); break;
    case KeyType::Count: parse_count(k, v); break;
    case KeyType::Choice: v = match_choice(*spec, v); break;
    case KeyType::RealList: parse_list(k, v); break;
    case KeyType::MatrixText: parse_matrix(k, v); break;
    case KeyType::Text:
      if (v.empty()) throw ConfigError("key '" + k + "' must not be empty");
      break;
  }
  values_[k] = v;
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  load_text(buffer.str(), path);
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values_.find(normalize_key(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ExperimentResult::metric(const std::string& name) const {
  for (const auto& [key, value] : metrics) {
    if (key == name) return value;
  }
  return std::nullopt;
}

ProblemInstance build_instance(const RunConfig& config) {
  const Reader r{config};
  const std::string experiment = r.text("experiment", "equilibrium");
  const std::uint64_t seed = r.count("seed").value_or(1);
  if (experiment == "equilibrium") return build_equilibrium();
  if (experiment == "lnls") {
    const Index p = positive_index(r, "lnls_p", 70);
    const Index q = positive_index(r, "lnls_q", 100);
    const Index rank = positive_index(r, "lnls_rank", 50);
    const double noise = r.real("lnls_noise").value_or(0.1);
    return build_lnls(generate_lnls_data(p, q, rank, seed, noise), seed);
  }
  if (experiment == "inpainting") {
    Matrix image;
    if (auto path = config.get("image")) {
      try {
        image = read_image(*path);
      } catch (const IoError& e) {
        throw ConfigError(e.what());
      }
    } else {
      image = synthetic_image(positive_index(r, "image_rows", 64), positive_index(r, "image_cols", 64),
                              positive_index(r, "image_rank", 5), seed);
    }
    return build_inpainting(image, r.real("corruption").value_or(0.2), r.real("sigma").value_or(50.0), seed);
  }
  if (experiment == "custom") return build_custom(r, seed);
  throw ConfigError("unknown experiment '" + experiment + "'");
}

DanteConfig build_dante_config(const RunConfig& config, const ProblemInstance& instance) {
  const Reader r{config};
  DanteConfig d = instance.defaults;
  if (auto v = r.real("alpha")) d.alpha = *v;
  if (auto v = r.real("mu")) d.mu = *v;
  if (auto v = r.count("n_outer")) d.n_outer = static_cast<std::size_t>(*v);
  if (auto v = config.get("schedule")) {
    d.schedules.kind = *v == "strong" ? ScheduleKind::StronglyMonotone : ScheduleKind::Monotone;
  }
  if (auto v = r.real("b")) d.schedules.b = *v;
  if (auto v = r.real("xi")) d.schedules.xi = *v;
  if (auto v = r.real("eps_bar")) {
    d.schedules.eps_bar = *v;
  } else if (instance.eps_bar_per_alpha > 0.0) {
    d.schedules.eps_bar = instance.eps_bar_per_alpha * d.alpha;
  }
  if (auto v = r.real("eps_exponent")) d.schedules.eps_exponent = *v;
  if (auto v = config.get("encoding")) d.encoding = *parse_encoding_kind(*v);
  if (auto v = r.real("theta")) d.km.theta = *v;
  if (auto v = r.real("tau")) d.km.tau = *v;
  if (auto v = r.real("tau_safety")) d.km.tau_safety = *v;
  if (auto v = r.count("hard_cap")) {
    if (*v == 0) throw ConfigError("hard_cap must be at least 1");
    d.km.hard_cap = static_cast<std::size_t>(*v);
  }
  if (auto v = r.real("gamma")) d.gamma = *v;
  if (auto v = r.real("tos_eta")) d.tos_eta = *v;
  if (auto v = r.list("w0")) d.w0 = *v;
  if (auto v = r.count("point_storage_limit")) d.point_storage_limit = static_cast<Index>(*v);
  if (d.n_outer == 0) throw ConfigError("n_outer must be at least 1");
  return d;
}

ExperimentResult run_experiment(const RunConfig& config) {
  const Reader r{config};
  ProblemInstance instance = build_instance(config);
  DanteConfig dc = build_dante_config(config, instance);
  const std::size_t log_every = static_cast<std::size_t>(r.count("log_every").value_or(1));
  if (log_every == 0) throw ConfigError("log_every must be at least 1");
  const std::string gaps_mode = r.text("gaps", "auto");
  const bool gaps = gaps_mode == "on" || (gaps_mode == "auto" && instance.evaluate_gaps);
  const bool bounds_enabled = r.text("bounds", "auto") == "auto";

  const OperatorBundle& bundle = instance.bundle;
  const bool with_gap_opt = gaps && instance.solution_set.has_value();
  const bool with_gap_feas = gaps && bundle.domain().is_box();
  const Monitor* err_monitor = instance.find_monitor("err_to_ref");
  const Monitor* obj_monitor = instance.find_monitor("lower_obj");

  std::vector<TraceCsvRow> rows;
  bool last_in_domain = true;
  auto observer = [&](const IterationView& view) {
    if (view.n % log_every != 0 && view.n + 1 != dc.n_outer) return;
    TraceCsvRow row;
    row.n = view.n;
    row.beta = view.row.beta;
    row.epsilon = view.row.epsilon;
    row.tracking_error = view.row.tracking_error;
    row.lambda = view.row.lambda;
    row.weight_sum = view.row.weight_sum;
    row.inner_iterations = view.row.inner_iterations;
    if (with_gap_opt) row.gap_opt = gap_opt(view.average, *instance.solution_set, bundle.upper);
    if (with_gap_feas) {
      const FeasibilityGap fg = gap_feas(view.average, bundle);
      row.gap_feas = fg.value;
      last_in_domain = fg.in_domain;
      view.row.diagnostics["gap_feas_in_domain"] = fg.in_domain ? 1.0 : 0.0;
    }
    auto eval = [&](const Monitor* m) {
      if (!m) return kUnavailable;
      return m->evaluate(m->target == MonitorTarget::Anchor ? view.anchor : view.average);
    };
    row.err_to_ref = eval(err_monitor);
    row.lower_obj = eval(obj_monitor);
    rows.push_back(row);
  };

  const auto t0 = std::chrono::steady_clock::now();
  DanteResult run = dante_run(bundle, dc, observer);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Trace& trace = run.trace;

  std::optional<BoundConstants> constants;
  if (bounds_enabled && trace.contraction_mode() && std::isfinite(bundle.constants.domain_diameter)) {
    constants = bound_constants_from_trace(trace, bundle.constants, distance_to_domain(dc.w0, bundle.domain()));
    BoundSums sums;
    std::size_t next = 0;
    for (std::size_t n = 0; n < trace.rows.size() && next < rows.size(); ++n) {
      const TraceRow& tr = trace.rows[n];
      const double lb = tr.lambda * tr.beta;
      sums.weight += lb;
      sums.weighted_error += tr.lambda * tr.tracking_error;
      sums.weighted_beta_sq += lb * tr.beta;
      sums.weighted_beta_error += lb * tr.tracking_error;
      if (rows[next].n == n) {
        rows[next].bound_opt = bound_opt(sums, *constants);
        rows[next].bound_feas = bound_feas(sums, *constants);
        ++next;
      }
    }
  }

  ExperimentResult out{std::move(instance), dc, std::move(run), std::move(rows), {}, {}, {}, wall};
  const ProblemInstance& inst = out.instance;
  const Trace& tr = out.run.trace;
  out.output_dir = r.text("output_dir", "dante_out");

  out.info.emplace_back("experiment", inst.name);
  out.info.emplace_back("encoding", std::string(to_string(dc.encoding)));
  out.info.emplace_back("schedule", dc.schedules.kind == ScheduleKind::Monotone ? "monotone" : "strong");
  out.info.emplace_back("mode", tr.contraction_mode() ? "contraction" : "nonexpansive");

  auto& m = out.metrics;
  m.emplace_back("seed", static_cast<double>(r.count("seed").value_or(1)));
  m.emplace_back("alpha", dc.alpha);
  m.emplace_back("mu", dc.mu);
  m.emplace_back("n_outer", static_cast<double>(dc.n_outer));
  m.emplace_back("b", dc.schedules.b);
  m.emplace_back("eps_bar", dc.schedules.eps_bar);
  m.emplace_back("eps_exponent", dc.schedules.eps_exponent);
  m.emplace_back("theta", tr.theta);
  m.emplace_back("tau", tr.tau);
  m.emplace_back("q_bar", tr.q_bar);
  m.emplace_back("Q_bar", tr.relaxed_bar);
  if (tr.iteration_constant) m.emplace_back("C", *tr.iteration_constant);
  m.emplace_back("total_inner_iterations", static_cast<double>(tr.total_inner_iterations));
  m.emplace_back("cap_breaches", static_cast<double>(tr.cap_breaches));
  if (tr.iteration_constant && tr.relaxed_bar < 1.0) {
    m.emplace_back("combined_inner_bound",
                   combined_inner_bound(dc.n_outer, *tr.iteration_constant, tr.relaxed_bar, dc.schedules));
    m.emplace_back("summed_inner_caps",
                   summed_inner_caps(dc.n_outer, *tr.iteration_constant, tr.relaxed_bar, dc.schedules));
  }
  if (constants) {
    m.emplace_back("C1", constants->c1);
    m.emplace_back("C2", constants->c2);
    m.emplace_back("C3", constants->c3);
    m.emplace_back("C4", constants->c4);
  }
  if (err_monitor) m.emplace_back("initial_err_to_ref", err_monitor->evaluate(dc.w0));
  if (obj_monitor) m.emplace_back("initial_lower_obj", obj_monitor->evaluate(dc.w0));
  if (!out.rows.empty()) {
    const TraceCsvRow& last = out.rows.back();
    auto put = [&](const char* name, double value) {
      if (!std::isnan(value)) m.emplace_back(name, value);
    };
    put("final_gap_opt", last.gap_opt);
    if (!std::isnan(last.gap_feas)) {
      m.emplace_back("final_gap_feas", last.gap_feas);
      m.emplace_back("final_gap_feas_in_domain", last_in_domain ? 1.0 : 0.0);
    }
    put("final_bound_opt", last.bound_opt);
    put("final_bound_feas", last.bound_feas);
    put("final_err_to_ref", last.err_to_ref);
    put("final_lower_obj", last.lower_obj);
  }
  m.emplace_back("wall_time_seconds", wall);

  if (out.run.average.size() <= 64) {
    auto join = [](const Vector& v) {
      std::string s;
      for (Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
      return s;
    };
    out.info.emplace_back("final_average", join(out.run.average));
    out.info.emplace_back("final_anchor", join(out.run.anchor));
  }
  return out;
}

std::string format_real(double value) {
  if (std::isnan(value)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(const std::string& path, const std::vector<TraceCsvRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << kTraceCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << format_real(r.beta) << ',' << format_real(r.epsilon) << ',' << format_real(r.tracking_error)
        << ',' << format_real(r.lambda) << ',' << format_real(r.weight_sum) << ',' << r.inner_iterations << ','
        << format_real(r.gap_opt) << ',' << format_real(r.gap_feas) << ',' << format_real(r.bound_opt) << ','
        << format_real(r.bound_feas) << ',' << format_real(r.err_to_ref) << ',' << format_real(r.lower_obj) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  write_trace_csv((base / "trace.csv").string(), result.rows);

  std::ofstream summary(base / "summary.txt");
  if (!summary) throw IoError("cannot write " + (base / "summary.txt").string());
  for (const auto& [key, value] : result.info) summary << key << " = " << value << '\n';
  for (const auto& [key, value] : result.metrics) summary << key << " = " << format_real(value) << '\n';
  if (!summary) throw IoError("failed writing summary.txt");

  const ProblemInstance& inst = result.instance;
  if (inst.image_shape) {
    write_pgm((base / "restored.pgm").string(), as_matrix(result.run.average, *inst.image_shape));
    if (inst.original_image) write_pgm((base / "original.pgm").string(), *inst.original_image);
    if (inst.corrupted_image) write_pgm((base / "corrupted.pgm").string(), *inst.corrupted_image);
  }
}

}  // namespace dante
