#include "dante/problems.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dante/errors.hpp"

namespace dante {

const Monitor* ProblemInstance::find_monitor(const std::string& monitor_name) const {
  for (const auto& m : monitors) {
    if (m.name == monitor_name) return &m;
  }
  return nullptr;
}

double natural_residual(const Vector& x, const OperatorBundle& bundle) {
  if (bundle.lower_resolvent_b) throw std::invalid_argument("natural_residual: bundles with a B part unsupported");
  return (x - bundle.lower_resolvent_a(x - bundle.lower_smooth(x), 1.0)).norm();
}

ProblemInstance build_equilibrium() {
  Matrix s(2, 2);
  s << 0.0, -0.1, 0.1, 0.0;
  const Vector c = Vector::Map(std::array<double, 2>{1.0, 0.0}.data(), 2);
  const Vector lower = Vector::Map(std::array<double, 2>{11.0, 10.0}.data(), 2);
  const Vector upper = Vector::Map(std::array<double, 2>{60.0, 50.0}.data(), 2);

  OperatorBundle bundle{SingleValuedOp::identity(2), SingleValuedOp::affine(s, c),
                        ResolventOp::box_normal_cone(lower, upper), std::nullopt, {}};
  SeededRng rng(0);
  bundle.constants = estimate_constants(bundle, rng, 256);

  Vector reference(2);
  reference << 11.0, 10.0;
  Vector far_end(2);
  far_end << 60.0, 10.0;

  ProblemInstance inst{"equilibrium",
                       std::move(bundle),
                       SolutionSetDescriptor::segment(reference, far_end, "[11, 60] x {10}"),
                       reference,
                       {},
                       {},
                       std::nullopt,
                       std::nullopt,
                       std::nullopt};
  inst.evaluate_gaps = true;
  inst.monitors.push_back(
      {"err_to_ref", MonitorTarget::Average, [reference](const Vector& w) { return (w - reference).norm(); }});

  DanteConfig& d = inst.defaults;
  d.alpha = 0.1;
  d.mu = 0.0;
  d.n_outer = 1000;
  d.schedules.kind = ScheduleKind::Monotone;
  d.schedules.b = 0.55;
  d.schedules.eps_bar = 1e-3;
  d.schedules.eps_exponent = 2.0;
  d.encoding = EncodingKind::ForwardBackward;
  d.km.theta = 0.7;
  d.w0 = Vector(2);
  d.w0 << 200.0, 200.0;
  return inst;
}

namespace {

Matrix clip_singular_values(const Matrix& a, double hi) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues().cwiseMax(0.0).cwiseMin(hi);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace

LnlsData generate_lnls_data(Index p, Index q, Index rank, std::uint64_t seed, double noise) {
  if (p < 1 || q < 1 || rank < 1) throw ConfigError("lnls: dimensions and rank must be positive");
  if (static_cast<std::size_t>(q) < kLnlsNonzeros) throw ConfigError("lnls: Q must be at least 20");
  if (!(noise >= 0.0)) throw ConfigError("lnls: noise scale must be nonnegative");
  SeededRng rng(seed);
  LnlsData data;
  for (std::size_t attempt = 1; attempt <= kLnlsMaxAttempts; ++attempt) {
    const Matrix u1 = sample_gaussian_matrix(rng, p, rank, 1.0);
    const Matrix u2 = sample_gaussian_matrix(rng, rank, q, 1.0);
    data.a = clip_singular_values(u1 * u2, kLnlsSingularValueClip);

    std::vector<Index> idx(static_cast<std::size_t>(q));
    std::iota(idx.begin(), idx.end(), Index{0});
    data.sparse_signal = Vector::Zero(q);
    for (std::size_t k = 0; k < kLnlsNonzeros; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
      std::swap(idx[k], idx[j]);
      data.sparse_signal[idx[k]] = rng.uniform(0.0, 10.0);
    }
    data.b = data.a * data.sparse_signal;
    if (noise > 0.0) data.b += sample_gaussian(rng, p, noise);

    Eigen::JacobiSVD<Matrix> svd(data.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Singular values below this relative level are rounding noise of the
    // rank-deficient product and must not be inverted.
    svd.setThreshold(kLnlsRankTolerance);
    data.solution = svd.solve(data.b);
    data.attempts = attempt;
    if (data.solution.allFinite() && data.solution.cwiseAbs().maxCoeff() <= kLnlsBoxRadius) return data;
  }
  throw NumericalError("lnls: no instance with pinv(A) b inside the box after 100 attempts");
}

ProblemInstance build_lnls(Index p, Index q, Index rank, std::uint64_t seed) {
  return build_lnls(generate_lnls_data(p, q, rank, seed), seed);
}

ProblemInstance build_lnls(const LnlsData& data, std::uint64_t seed) {
  const Index q = data.a.cols();
  const Matrix ata = data.a.transpose() * data.a;
  const Vector atb = data.a.transpose() * data.b;
  const Vector lower = Vector::Constant(q, -kLnlsBoxRadius);
  const Vector upper = Vector::Constant(q, kLnlsBoxRadius);

  OperatorBundle bundle{SingleValuedOp::identity(q), SingleValuedOp::affine(Matrix(2.0 * ata), Vector(-2.0 * atb)),
                        ResolventOp::box_normal_cone(lower, upper), std::nullopt, {}};
  SeededRng constants_rng(seed);
  bundle.constants = estimate_constants(bundle, constants_rng, 64);

  const Vector z = data.solution;
  const Matrix a = data.a;
  const Vector b = data.b;
  const double base = 0.5 * (a * z - b).squaredNorm();

  ProblemInstance inst{"lnls", std::move(bundle), SolutionSetDescriptor::singleton(z, "pinv(A) b"), z, {}, {},
                       std::nullopt, std::nullopt, std::nullopt};
  inst.monitors.push_back({"err_to_ref", MonitorTarget::Anchor, [z](const Vector& w) { return (w - z).norm(); }});
  inst.monitors.push_back({"lower_obj", MonitorTarget::Anchor,
                           [a, b, base](const Vector& w) { return 0.5 * (a * w - b).squaredNorm() - base; }});

  DanteConfig& d = inst.defaults;
  d.alpha = 1.0;
  d.n_outer = 2000;
  d.schedules.b = 0.55;
  inst.eps_bar_per_alpha = 1e-3;
  d.schedules.eps_bar = inst.eps_bar_per_alpha * d.alpha;
  d.schedules.eps_exponent = 1.0;
  d.encoding = EncodingKind::ForwardBackward;
  d.km.theta = 0.75;
  SeededRng start_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  d.w0 = sample_gaussian(start_rng, q, 0.1);
  return inst;
}

Matrix make_mask(Shape shape, double corruption_fraction, SeededRng& rng) {
  if (shape.rows < 1 || shape.cols < 1) throw ConfigError("mask: shape must be positive");
  if (!(corruption_fraction >= 0.0 && corruption_fraction < 1.0)) {
    throw ConfigError("mask: corruption fraction must lie in [0, 1)");
  }
  const auto total = static_cast<std::size_t>(shape.size());
  const auto zeros = static_cast<std::size_t>(std::llround(corruption_fraction * static_cast<double>(total)));
  std::vector<Index> idx(total);
  std::iota(idx.begin(), idx.end(), Index{0});
  Matrix mask = Matrix::Ones(shape.rows, shape.cols);
  for (std::size_t k = 0; k < zeros; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(total - k));
    std::swap(idx[k], idx[j]);
    mask.data()[idx[k]] = 0.0;
  }
  return mask;
}

Matrix synthetic_image(Index rows, Index cols, Index rank, std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rank < 1) throw ConfigError("synthetic image: sizes must be positive");
  SeededRng rng(seed);
  const Matrix left = sample_gaussian_matrix(rng, rows, rank, 1.0);
  const Matrix right = sample_gaussian_matrix(rng, rank, cols, 1.0);
  Matrix img = left * right;
  const double lo = img.minCoeff();
  const double hi = img.maxCoeff();
  if (hi > lo) {
    img = (img.array() - lo) / (hi - lo);
  } else {
    img.setZero();
  }
  return img;
}

double inpainting_objective(const Matrix& y, const Matrix& mask, const Matrix& corrupted, double sigma) {
  return 0.5 * (mask.cwiseProduct(y) - corrupted).squaredNorm() + sigma * nuclear_norm(y);
}

ProblemInstance build_inpainting(const Matrix& image, double corruption_fraction, double sigma, std::uint64_t seed) {
  if (image.size() == 0) throw ConfigError("inpainting: empty image");
  if (!image.allFinite() || image.minCoeff() < 0.0 || image.maxCoeff() > 1.0) {
    throw ConfigError("inpainting: image entries must lie in [0, 1]");
  }
  if (!(corruption_fraction >= 0.0 && corruption_fraction < 1.0)) {
    throw ConfigError("inpainting: corruption fraction must lie in [0, 1)");
  }
  if (!(sigma >= 0.0)) throw ConfigError("inpainting: sigma must be nonnegative");
  const Shape shape{image.rows(), image.cols()};
  SeededRng rng(seed);
  const Matrix mask = make_mask(shape, corruption_fraction, rng);
  const Matrix corrupted = mask.cwiseProduct(image);
  const Vector mask_vec = from_matrix(mask);
  const Vector corrupted_vec = from_matrix(corrupted);

  // F(Y) = R(R(Y) - Y_corrupt) = mask .* Y - Y_corrupt, since R(Y_corrupt) = Y_corrupt.
  SingleValuedOp smooth(
      [mask_vec, corrupted_vec](const Vector& y) {
        if (y.size() != mask_vec.size()) throw DimensionError("inpainting F: point has the wrong size");
        return Vector(mask_vec.cwiseProduct(y) - corrupted_vec);
      },
      1.0, 0.0);

  OperatorBundle bundle{SingleValuedOp::identity(shape.size()), std::move(smooth),
                        ResolventOp::nuclear_norm(sigma, shape), ResolventOp::matrix_box_normal_cone(0.0, 1.0, shape),
                        {}};
  // On [0, 1]^{PxQ}: ||Id|| peaks at the all-ones corner; ||F|| is at most ||mask||.
  bundle.constants.domain_diameter = bundle.domain().diameter();
  bundle.constants.upper_bound_norm = std::sqrt(static_cast<double>(shape.size()));
  bundle.constants.lower_bound_norm = std::max(mask.norm(), corrupted.norm());

  ProblemInstance inst{"inpainting", std::move(bundle), std::nullopt, std::nullopt, {}, {}, shape, image, corrupted};
  inst.monitors.push_back({"lower_obj", MonitorTarget::Anchor, [mask, corrupted, sigma, shape](const Vector& w) {
                             return inpainting_objective(as_matrix(w, shape), mask, corrupted, sigma);
                           }});

  DanteConfig& d = inst.defaults;
  d.alpha = 10.0;
  d.n_outer = 200;
  d.schedules.b = 0.55;
  d.schedules.eps_bar = 2.0;
  d.schedules.eps_exponent = 2.0;
  d.encoding = EncodingKind::ThreeOperator;
  d.km.theta = 0.75;
  d.w0 = corrupted_vec;
  return inst;
}

// ---------------------------------------------------------------------------
// Image and matrix files

namespace {

void skip_pgm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_pgm_number(std::istream& in, const std::string& path) {
  skip_pgm_space(in);
  long value = -1;
  if (!(in >> value) || value < 0) throw IoError("PGM header is malformed: " + path);
  return value;
}

}  // namespace

Matrix read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") throw IoError("not a binary PGM (P5) file: " + path);
  const long width = read_pgm_number(in, path);
  const long height = read_pgm_number(in, path);
  const long maxval = read_pgm_number(in, path);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) throw IoError("PGM header out of range: " + path);
  in.get();  // single whitespace before the raster
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raster(static_cast<std::size_t>(width * height * bytes));
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) throw IoError("PGM raster truncated: " + path);
  Matrix img(height, width);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      const std::size_t k = static_cast<std::size_t>((r * width + c) * bytes);
      const unsigned value = bytes == 2 ? (static_cast<unsigned>(raster[k]) << 8) | raster[k + 1] : raster[k];
      img(r, c) = static_cast<double>(value) / static_cast<double>(maxval);
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Matrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::vector<unsigned char> raster(static_cast<std::size_t>(image.size()));
  std::size_t k = 0;
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::isfinite(image(r, c)) ? std::clamp(image(r, c), 0.0, 1.0) : 0.0;
      raster[k++] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("failed writing " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError("non-numeric CSV cell '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix CSV: " + path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m(r, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

Matrix read_image(const std::string& path) {
  auto ends_with = [&](const std::string& suffix) {
    if (path.size() < suffix.size()) return false;
    return std::equal(suffix.rbegin(), suffix.rend(), path.rbegin(),
                      [](char a, char b) { return a == std::tolower(static_cast<unsigned char>(b)); });
  };
  if (ends_with(".pgm")) return read_pgm(path);
  if (ends_with(".csv")) return read_matrix_csv(path);
  throw IoError("unsupported image extension (expected .pgm or .csv): " + path);
}

}  // namespace dante
