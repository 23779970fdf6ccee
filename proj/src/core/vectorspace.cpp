#include "dante/vectorspace.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dante/errors.hpp"

namespace dante {

namespace {

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": length " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

}  // namespace

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  return a.dot(b);
}

double norm(const Vector& x) { return std::sqrt(x.dot(x)); }

double distance(const Vector& a, const Vector& b) {
  require_same_size(a, b, "distance");
  return (a - b).norm();
}

Vector axpy(double alpha, const Vector& x, const Vector& y) {
  require_same_size(x, y, "axpy");
  return alpha * x + y;
}

bool all_finite(const Vector& x) { return x.allFinite(); }

Matrix as_matrix(const Vector& x, Shape shape) {
  if (shape.rows < 0 || shape.cols < 0 || shape.size() != x.size()) {
    throw DimensionError("as_matrix: shape " + std::to_string(shape.rows) + "x" +
                         std::to_string(shape.cols) + " does not hold " +
                         std::to_string(x.size()) + " entries");
  }
  return Eigen::Map<const Matrix>(x.data(), shape.rows, shape.cols);
}

Vector from_matrix(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() {
  if (cached_normal_) {
    const double z = *cached_normal_;
    cached_normal_.reset();
    return z;
  }
  // 1 - u lies in (0, 1], so the logarithm is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::below: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % n;
}

Vector sample_gaussian(SeededRng& rng, Index n, double scale) {
  if (n < 1) throw std::invalid_argument("sample_gaussian: n must be at least 1");
  if (!(scale >= 0.0)) throw std::invalid_argument("sample_gaussian: scale must be nonnegative");
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = scale * rng.normal();
  return out;
}

Matrix sample_gaussian_matrix(SeededRng& rng, Index rows, Index cols, double scale) {
  Matrix out(rows, cols);
  // Row-major fill so the stream order matches reading the matrix as text.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = scale * rng.normal();
  return out;
}

Vector sample_box(SeededRng& rng, const Vector& lower, const Vector& upper) {
  require_same_size(lower, upper, "sample_box");
  Vector out(lower.size());
  for (Index i = 0; i < lower.size(); ++i) out[i] = rng.uniform(lower[i], upper[i]);
  return out;
}

}  // namespace dante
