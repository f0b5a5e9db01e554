// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>

namespace paircal {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations over the upper triangle in row-major order.
/// Stops once the off-diagonal Frobenius norm drops below `threshold`.
/// Only the symmetric part (A + Aᵀ)/2 is used. Throws for n > kMaxEigenDim.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double threshold = 1e-12,
                            int max_sweeps = 100);

/// Pairwise (tree) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace paircal
