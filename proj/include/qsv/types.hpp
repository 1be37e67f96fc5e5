#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace qsv {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;
using Matrix2c = Eigen::Matrix2cd;

// Thrown when an argument violates a documented precondition
// (dimension mismatch, non-Hermitian input, out-of-range parameter...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qsv
