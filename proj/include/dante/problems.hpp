#ifndef DANTE_PROBLEMS_HPP
#define DANTE_PROBLEMS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dante/gaps.hpp"
#include "dante/outer_loop.hpp"

namespace dante {

enum class MonitorTarget { Anchor, Average };

/// A named scalar evaluated along the run, on w_{n+1} or on w_bar_{n+1}.
struct Monitor {
  std::string name;
  MonitorTarget target = MonitorTarget::Anchor;
  std::function<double(const Vector&)> evaluate;
};

struct ProblemInstance {
  std::string name;
  OperatorBundle bundle;
  std::optional<SolutionSetDescriptor> solution_set;
  std::optional<Vector> reference;
  std::vector<Monitor> monitors;
  DanteConfig defaults;
  /// Matrix shape of points for image problems.
  std::optional<Shape> image_shape;
  std::optional<Matrix> original_image;
  std::optional<Matrix> corrupted_image;
  /// When positive, eps_bar follows alpha (eps_bar = factor * alpha) unless
  /// set explicitly.
  double eps_bar_per_alpha = 0.0;
  /// Gap functions are evaluated along the run by default.
  bool evaluate_gaps = false;

  const Monitor* find_monitor(const std::string& monitor_name) const;
};

/// ||x - J_A(x - F(x))|| with a unit step; zero exactly on zer(F + A).
/// Bundles with a B part are rejected.
double natural_residual(const Vector& x, const OperatorBundle& bundle);

/// Two-player zero-sum game on X = [11, 60] x [10, 50]:
/// F(x) = S x + c with S = [[0, -0.1], [0.1, 0]], c = (1, 0), A = N_X,
/// G = Id. S0 = [11, 60] x {10}; the least-norm solution is (11, 10).
ProblemInstance build_equilibrium();

struct LnlsData {
  Matrix a;
  Vector b;
  Vector sparse_signal;  ///< s
  Vector solution;       ///< z = pinv(A) b
  std::size_t attempts = 0;
};

inline constexpr double kLnlsBoxRadius = 1000.0;
inline constexpr double kLnlsSingularValueClip = 10.0;
inline constexpr std::size_t kLnlsNonzeros = 20;
inline constexpr std::size_t kLnlsMaxAttempts = 100;
/// Relative singular-value cutoff of the pseudo-inverse.
inline constexpr double kLnlsRankTolerance = 1e-10;

/// A = U1 U2 (standard normal factors, singular values clipped to [0, 10]),
/// s with kLnlsNonzeros entries uniform on [0, 10], b = A s + noise * normal.
/// Regenerated until z = pinv(A) b lies in [-1000, 1000]^Q.
LnlsData generate_lnls_data(Index p, Index q, Index rank, std::uint64_t seed, double noise = 0.1);

/// Least-norm least squares over X = [-1000, 1000]^Q with G = Id,
/// F(v) = 2 A^T (A v - b), A-part = N_X.
ProblemInstance build_lnls(Index p, Index q, Index rank = 50, std::uint64_t seed = 1);
ProblemInstance build_lnls(const LnlsData& data, std::uint64_t seed);

/// 0/1 mask with round(fraction * size) zeros placed uniformly without
/// replacement.
Matrix make_mask(Shape shape, double corruption_fraction, SeededRng& rng);

/// Rank-`rank` product of seeded standard normal factors, min-max scaled to [0, 1].
Matrix synthetic_image(Index rows, Index cols, Index rank, std::uint64_t seed);

/// Nuclear-norm inpainting: G = Id, A = sigma * d||.||_*, B = N_[0,1]^{PxQ},
/// F(Y) = R(R(Y) - Y_corrupt) with R the mask multiply. TOS encoding in
/// nonexpansive mode by default.
ProblemInstance build_inpainting(const Matrix& image, double corruption_fraction = 0.2, double sigma = 50.0,
                                 std::uint64_t seed = 1);

/// 1/2 ||R(Y) - Y_corrupt||^2 + sigma ||Y||_*.
double inpainting_objective(const Matrix& y, const Matrix& mask, const Matrix& corrupted, double sigma);

/// Binary P5 grayscale, 8- or 16-bit on input, 8-bit on output; values are
/// scaled to [0, 1] (clamped on output).
Matrix read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Matrix& image);
/// Plain comma-separated matrix, one row per line.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);
/// Dispatches on the extension: .pgm or .csv.
Matrix read_image(const std::string& path);

}  // namespace dante

#endif  // DANTE_PROBLEMS_HPP
