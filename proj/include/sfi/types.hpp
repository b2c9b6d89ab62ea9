#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sfi {

using Index = Eigen::Index;

/// Row-major dense matrix; one row per channel, one column per tap.
template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrix = RowMatrixX<double>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An all-zero impulse response was submitted to l2 normalization.
class DegenerateFilterError : public Error {
 public:
  using Error::Error;
};

/// A weight gradient was computed against weights that have since been regenerated.
class StaleGenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfi
