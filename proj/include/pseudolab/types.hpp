#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pseudolab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CSparse = Eigen::SparseMatrix<Complex>;

}  // namespace pseudolab
