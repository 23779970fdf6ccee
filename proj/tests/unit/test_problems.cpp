#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <Eigen/SVD>

#include "dante/errors.hpp"
#include "dante/problems.hpp"

using namespace dante;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "dante_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("equilibrium solution set") {
  const ProblemInstance inst = build_equilibrium();
  CHECK(inst.bundle.lower_smooth(vec({11, 10})).isApprox(vec({0, 1.1})));
  CHECK(natural_residual(vec({11, 10}), inst.bundle) <= 1e-12);
  for (double t = 11.0; t <= 60.0; t += 0.7) CHECK(natural_residual(vec({t, 10}), inst.bundle) <= 1e-12);
  CHECK(natural_residual(vec({11, 11}), inst.bundle) > 1e-3);
  CHECK(gap_opt(*inst.reference, *inst.solution_set, inst.bundle.upper) == doctest::Approx(0.0));
  CHECK(gap_feas(*inst.reference, inst.bundle).value == doctest::Approx(0.0));
  CHECK(inst.bundle.constants.domain_diameter == doctest::Approx(std::sqrt(4001.0)).epsilon(1e-12));
}

TEST_CASE("least-squares data") {
  const LnlsData d = generate_lnls_data(70, 100, 50, 1);
  CHECK(d.a.rows() == 70);
  CHECK(d.a.cols() == 100);
  const double smax = Eigen::JacobiSVD<Matrix>(d.a).singularValues()(0);
  CHECK(smax <= kLnlsSingularValueClip + 1e-9);
  CHECK((d.sparse_signal.array() != 0.0).count() <= static_cast<Index>(kLnlsNonzeros));
  CHECK(d.solution.cwiseAbs().maxCoeff() <= kLnlsBoxRadius);
  // Normal equations at the pseudo-inverse solution.
  CHECK((d.a.transpose() * (d.a * d.solution - d.b)).norm() <= 1e-6);

  const ProblemInstance inst = build_lnls(d, 1);
  CHECK(inst.bundle.lower_smooth.lipschitz() <= 2.0 * 100.0 + 1e-6);
  CHECK(inst.bundle.lower_smooth.lipschitz() == doctest::Approx(2.0 * smax * smax).epsilon(1e-9));
  CHECK(natural_residual(d.solution, inst.bundle) <= 1e-6);
}

TEST_CASE("noise-free least-squares data is consistent") {
  const LnlsData d = generate_lnls_data(30, 40, 10, 4, 0.0);
  CHECK((d.a * d.sparse_signal - d.b).norm() <= 1e-12);
  CHECK(0.5 * (d.a * d.solution - d.b).squaredNorm() <= 1e-16 * std::max(1.0, d.b.squaredNorm()));
}

TEST_CASE("least-squares generation is seeded") {
  const LnlsData a = generate_lnls_data(20, 30, 5, 9);
  const LnlsData b = generate_lnls_data(20, 30, 5, 9);
  const LnlsData c = generate_lnls_data(20, 30, 5, 10);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(a.a != c.a);
}

TEST_CASE("inpainting mask") {
  SeededRng rng(3);
  const Matrix mask = make_mask({16, 16}, 0.2, rng);
  CHECK(mask.cwiseProduct(mask) == mask);
  CHECK((mask.array() == 0.0).count() == std::lround(0.2 * 256));
  SeededRng rng2(3);
  CHECK(make_mask({16, 16}, 0.0, rng2).isOnes());
}

TEST_CASE("inpainting instance") {
  const Matrix image = synthetic_image(12, 10, 3, 2);
  CHECK(image.minCoeff() >= 0.0);
  CHECK(image.maxCoeff() <= 1.0);

  const ProblemInstance clean = build_inpainting(image, 0.0, 2.0, 1);
  REQUIRE(clean.corrupted_image);
  CHECK(*clean.corrupted_image == image);
  const Monitor* obj = clean.find_monitor("lower_obj");
  REQUIRE(obj);
  CHECK(obj->evaluate(from_matrix(image)) == doctest::Approx(2.0 * nuclear_norm(image)));

  const ProblemInstance inst = build_inpainting(image, 0.3, 2.0, 1);
  const SingleValuedOp& f = inst.bundle.lower_smooth;
  CHECK(f.lipschitz() == 1.0);
  SeededRng rng(6);
  for (int k = 0; k < 20; ++k) {
    const Vector y1 = sample_gaussian(rng, image.size(), 1.0);
    const Vector y2 = sample_gaussian(rng, image.size(), 1.0);
    CHECK((f(y1) - f(y2)).norm() <= (y1 - y2).norm() + 1e-12);
  }
  CHECK(inst.defaults.encoding == EncodingKind::ThreeOperator);
}

TEST_CASE("PGM round trip") {
  Matrix m(3, 4);
  m << 0, 0.5, 1, 0.25, 1, 1, 0, 0, 0.2, 0.4, 0.6, 0.8;
  const auto path = temp_path("round.pgm");
  write_pgm(path.string(), m);
  const Matrix back = read_pgm(path.string());
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  CHECK((back - m).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12);
  write_pgm(path.string(), back);
  CHECK(read_pgm(path.string()) == back);
}

TEST_CASE("PGM reader accepts comments and 16-bit data") {
  const auto path = temp_path("wide.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# comment\n2 1\n65535\n";
    const unsigned char data[] = {0xff, 0xff, 0x00, 0x00};
    out.write(reinterpret_cast<const char*>(data), 4);
  }
  const Matrix m = read_pgm(path.string());
  CHECK(m(0, 0) == 1.0);
  CHECK(m(0, 1) == 0.0);
}

TEST_CASE("malformed images are rejected") {
  const auto path = temp_path("bad.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P2\n2 2\n255\n1 2 3 4\n";
  }
  CHECK_THROWS_AS(read_pgm(path.string()), IoError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n4 4\n255\nab";
  }
  CHECK_THROWS_AS(read_pgm(path.string()), IoError);
  CHECK_THROWS_AS(read_pgm(temp_path("missing.pgm").string()), IoError);
  CHECK_THROWS_AS(read_image(temp_path("image.png").string()), IoError);
}

TEST_CASE("CSV matrix round trip") {
  SeededRng rng(1);
  const Matrix m = sample_gaussian_matrix(rng, 4, 3, 10.0);
  const auto path = temp_path("m.csv");
  write_matrix_csv(path.string(), m);
  CHECK(read_matrix_csv(path.string()) == m);
  CHECK(read_image(path.string()) == m);
  {
    std::ofstream out(path);
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(path.string()), IoError);
}
