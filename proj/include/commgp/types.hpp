#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace commgp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::Vector4d;

// Point sets are stored row-wise: one communication-event feature vector
// [tx_e, tx_n, rx_e, rx_n] per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Cholesky/conditioning failure that survived the jitter policy.
class NumericError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class InsufficientData : public Error {
public:
  using Error::Error;
};

class WireError : public Error {
public:
  using Error::Error;
};

// Diagonal jitter added to Gram matrices before any factorization.
inline constexpr double kDefaultJitter = 1e-8;

} // namespace commgp
