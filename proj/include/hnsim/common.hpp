#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hnsim {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Selects the serial reference kernels or their OpenMP counterparts.
/// The serial path is kept bit-for-bit simple and is what the tests
/// compare the parallel path against.
enum class Exec { serial, parallel };

/// Base of every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Problem size beyond what the library is built to handle.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration (unknown keys, bad values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, failed factorizations, unusable conditioning.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hnsim
