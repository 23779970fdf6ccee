#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dante/errors.hpp"
#include "dante/experiment.hpp"

using namespace dante;

namespace {
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}
}  // namespace

TEST_CASE("config keys are normalized and validated") {
  RunConfig cfg;
  cfg.set("n-outer", "12");
  CHECK(cfg.get("n_outer") == "12");
  cfg.set("--alpha", " 0.5 ");
  CHECK(cfg.get("alpha") == "0.5");
  cfg.set("encoding", "dr");
  CHECK(cfg.get("encoding") == "DR");
  CHECK_THROWS_AS(cfg.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.set("alpha", "fast"), ConfigError);
  CHECK_THROWS_AS(cfg.set("n_outer", "-3"), ConfigError);
  CHECK_THROWS_AS(cfg.set("n_outer", "2.5"), ConfigError);
  CHECK_THROWS_AS(cfg.set("encoding", "XY"), ConfigError);
  CHECK_THROWS_AS(cfg.set("w0", "1,,2"), ConfigError);
  CHECK_THROWS_AS(cfg.set("custom_f", "1,2;3"), ConfigError);
}

TEST_CASE("config file grammar") {
  RunConfig cfg;
  cfg.load_text("# comment\nexperiment = lnls\n\nalpha=2   # trailing\nalpha = 3\n", "t.cfg");
  CHECK(cfg.get("experiment") == "lnls");
  CHECK(cfg.get("alpha") == "3");
  try {
    cfg.load_text("alpha = 1\nbroken line\n", "t.cfg");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("t.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(cfg.load_file("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST_CASE("overrides reach the solver configuration") {
  RunConfig cfg;
  cfg.load_text("experiment = equilibrium\nalpha = 1\nb = 0.6\nencoding = BF\ntheta = 0.5\nw0 = 20, 20\n");
  const ProblemInstance inst = build_instance(cfg);
  const DanteConfig d = build_dante_config(cfg, inst);
  CHECK(d.alpha == 1.0);
  CHECK(d.schedules.b == 0.6);
  CHECK(d.encoding == EncodingKind::BackwardForward);
  CHECK(d.km.theta == 0.5);
  CHECK(d.w0[0] == 20.0);
  CHECK(d.n_outer == 1000);
}

TEST_CASE("least-squares tolerance follows alpha unless set") {
  RunConfig cfg;
  cfg.load_text("experiment = lnls\nlnls_p = 10\nlnls_q = 25\nlnls_rank = 5\nalpha = 4\n");
  const ProblemInstance inst = build_instance(cfg);
  CHECK(build_dante_config(cfg, inst).schedules.eps_bar == doctest::Approx(4e-3));
  cfg.set("eps_bar", "0.5");
  CHECK(build_dante_config(cfg, inst).schedules.eps_bar == 0.5);
}

TEST_CASE("zero outer iterations is a configuration error") {
  RunConfig cfg;
  cfg.set("n_outer", "0");
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("equilibrium experiment rows") {
  RunConfig cfg;
  cfg.set("n_outer", "40");
  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.rows.size() == 40);
  for (const TraceCsvRow& row : r.rows) {
    CHECK(std::isfinite(row.gap_opt));
    CHECK(std::isfinite(row.gap_feas));
    CHECK(row.gap_opt <= row.bound_opt);
    CHECK(row.gap_feas <= row.bound_feas);
    CHECK(std::isnan(row.lower_obj));
  }
  CHECK(r.metric("total_inner_iterations").has_value());
  CHECK_FALSE(r.metric("no_such_metric").has_value());

  cfg.set("log_every", "7");
  const ExperimentResult sparse = run_experiment(cfg);
  // 0, 7, ..., 35 and the last step.
  CHECK(sparse.rows.size() == 7);
  CHECK(sparse.rows.back().n == 39);

  cfg.set("gaps", "off");
  cfg.set("bounds", "off");
  const ExperimentResult bare = run_experiment(cfg);
  CHECK(std::isnan(bare.rows.front().gap_opt));
  CHECK(std::isnan(bare.rows.front().bound_opt));
}

TEST_CASE("custom affine experiment") {
  RunConfig cfg;
  cfg.load_text(
      "experiment = custom\n"
      "custom_f = 0,-0.1; 0.1,0\n"
      "custom_f_offset = 1, 0\n"
      "custom_lower = 11, 10\n"
      "custom_upper = 60, 50\n"
      "alpha = 0.1\n"
      "n_outer = 300\n"
      "w0 = 200, 200\n");
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.rows.size() == 300);
  CHECK(std::isfinite(r.rows.back().gap_feas));
  CHECK(std::isnan(r.rows.back().gap_opt));
  Vector ref(2);
  ref << 11, 10;
  CHECK(distance(r.run.average, ref) < 1.0);

  RunConfig bad = cfg;
  bad.set("custom_f", "-1,0;0,1");
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
  RunConfig missing;
  missing.set("experiment", "custom");
  CHECK_THROWS_AS(run_experiment(missing), ConfigError);
}

TEST_CASE("real formatting is lossless") {
  CHECK(format_real(std::nan("")).empty());
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.123456789}) {
    CHECK(std::stod(format_real(x)) == x);
  }
}

TEST_CASE("outputs on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "dante_unit" / "outputs";
  std::filesystem::remove_all(dir);
  RunConfig cfg;
  cfg.load_text("experiment = inpainting\nimage_rows = 12\nimage_cols = 10\nimage_rank = 2\nn_outer = 6\n");
  const ExperimentResult r = run_experiment(cfg);
  write_outputs(r, dir.string());
  const std::string trace = slurp(dir / "trace.csv");
  CHECK(trace.rfind(std::string(kTraceCsvHeader) + "\n", 0) == 0);
  CHECK(count_lines(trace) == 7);
  // Absent metrics are empty fields: 13 columns, 12 commas per line.
  std::istringstream lines(trace);
  std::string line;
  while (std::getline(lines, line)) CHECK(std::count(line.begin(), line.end(), ',') == 12);
  CHECK(slurp(dir / "summary.txt").find("total_inner_iterations = ") != std::string::npos);
  for (const char* name : {"restored.pgm", "original.pgm", "corrupted.pgm"}) {
    CHECK(std::filesystem::file_size(dir / name) > 0);
  }
}
