#ifndef DANTE_VECTORSPACE_HPP
#define DANTE_VECTORSPACE_HPP

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace dante {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points of the ambient space are dense double vectors. Matrix-valued
/// points (images) keep their data column-major in the vector and carry
/// the shape separately, on the operators and instances that need it.
using Point = Vector;

struct Shape {
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

double dot(const Vector& a, const Vector& b);
double norm(const Vector& x);
double distance(const Vector& a, const Vector& b);

/// alpha * x + y.
Vector axpy(double alpha, const Vector& x, const Vector& y);

bool all_finite(const Vector& x);

/// Column-major reshape; throws DimensionError when sizes disagree.
Matrix as_matrix(const Vector& x, Shape shape);
Vector from_matrix(const Matrix& m);

/**
 * Reproducible random source.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. The standard distributions are implementation-defined, so every
 * derived draw is computed here: uniforms from the top 53 bits of one engine
 * word, normals by the Box-Muller transform (both values of a pair are used),
 * bounded integers by rejection. Identical seeds give identical streams on
 * every conforming platform.
 */
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

/// n i.i.d. N(0, scale^2) entries.
Vector sample_gaussian(SeededRng& rng, Index n, double scale);
Matrix sample_gaussian_matrix(SeededRng& rng, Index rows, Index cols, double scale);
/// Componentwise uniform draw inside the box [lower, upper].
Vector sample_box(SeededRng& rng, const Vector& lower, const Vector& upper);

}  // namespace dante

#endif  // DANTE_VECTORSPACE_HPP
