#ifndef TLSPOSE_ERRORS_HPP
#define TLSPOSE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlspose {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The observation geometry does not determine the pose: collinear or
/// too few landmarks, a singular information sum, or a rank-deficient
/// matrix where a rotation or an inverse was required.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// The residual weight Q_lambda of one observation is not positive definite.
class SingularWeightError : public Error {
 public:
  SingularWeightError(std::size_t index, const std::string& what)
      : Error("observation " + std::to_string(index) + ": " + what),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A 6x6 measurement covariance is asymmetric, non-finite or not
/// positive definite.
class InvalidNoiseModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace tlspose

#endif  // TLSPOSE_ERRORS_HPP
