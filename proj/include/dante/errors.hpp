#ifndef DANTE_ERRORS_HPP
#define DANTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dante {

/// Operands of incompatible length were combined.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A run configuration (file, flags, or key/value override) is invalid.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed: non-finite data, SVD failure, or a
/// sub-iteration that did not converge within its cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inner loop hit its hard cap while the encoding was a contraction.
/// In that regime the a priori iteration cap must not be exceeded, so the
/// run is aborted.
class InnerLoopCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing an image, matrix, trace or config file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dante

#endif  // DANTE_ERRORS_HPP
