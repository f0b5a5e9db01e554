// SPDX-License-Identifier: Apache-2.0
//
// Value types for pair predictions and the algebra that connects a joint
// prediction over (Y1, Y2) with a mean/covariance prediction over Y.
//
// Every type validates on construction and is immutable afterwards.
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paircal/error.hpp"

namespace paircal {

namespace tol {
inline constexpr double kNormalization = 1e-9;
inline constexpr double kRoundTrip = 1e-12;
inline constexpr double kOracleSymmetry = 1e-9;
inline constexpr double kTrainedSymmetry = 1e-6;
}  // namespace tol

/// Upper bound on K accepted by the symmetric eigen-solver.
inline constexpr std::size_t kMaxEigenDim = 64;

std::vector<std::string> default_labels(std::size_t k);

class ProbVector {
 public:
  ProbVector() = default;
  /// Validates non-negativity and normalization (within `tolerance`).
  explicit ProbVector(std::vector<double> entries, double tolerance = tol::kNormalization);

  static ProbVector uniform(std::size_t k);
  static ProbVector one_hot(std::size_t k, std::size_t index);

  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> values() const noexcept { return entries_; }
  Eigen::VectorXd to_eigen() const;

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> entries_;
};

class JointPairDistribution {
 public:
  JointPairDistribution() = default;
  /// `matrix(i, j)` is P(Y1 = labels[i], Y2 = labels[j]). Entries may be as
  /// low as -tolerance (rounding from algebraic construction) and are stored as given.
  explicit JointPairDistribution(Eigen::MatrixXd matrix, std::vector<std::string> labels = {},
                                 double tolerance = tol::kNormalization);

  static JointPairDistribution from_rows(const std::vector<std::vector<double>>& rows,
                                         std::vector<std::string> labels = {});
  static JointPairDistribution uniform(std::size_t k);
  /// Independent pairs: outer product p pᵀ.
  static JointPairDistribution product(const ProbVector& p);

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t index_of(const std::string& label) const;

  /// max |J - Jᵀ| over entries.
  double symmetry_defect() const;
  bool is_symmetric(double tolerance = tol::kOracleSymmetry) const {
    return symmetry_defect() <= tolerance;
  }
  /// (J + Jᵀ) / 2. Only applied when a caller asks for it.
  JointPairDistribution symmetrized() const;

 private:
  Eigen::MatrixXd matrix_;
  std::vector<std::string> labels_;
};

class SecondOrderPrediction {
 public:
  SecondOrderPrediction() = default;
  /// Checks covariance symmetry, zero row sums, and non-negative diagonal.
  SecondOrderPrediction(ProbVector mean, Eigen::MatrixXd covariance,
                        double tolerance = tol::kNormalization);

  const ProbVector& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  std::size_t size() const noexcept { return mean_.size(); }

 private:
  ProbVector mean_;
  Eigen::MatrixXd covariance_;
};

struct BinaryPairParams {
  double mu = 0.5;
  double rho = 0.0;

  /// Throws InvalidArgument outside [0,1]².
  static BinaryPairParams make(double mu, double rho);
};

std::pair<ProbVector, ProbVector> marginals(const JointPairDistribution& j);

/// Σ̂[a,b] = J[a,b] - m1[a]·m2[b].
Eigen::MatrixXd pair_covariance(const JointPairDistribution& j);

/// Throws SymmetryViolation when the symmetry defect exceeds `symmetry_tolerance`.
SecondOrderPrediction pair_to_second_order(const JointPairDistribution& j,
                                           double symmetry_tolerance = tol::kOracleSymmetry);

/// Throws InvalidSecondOrder if Σ̂ + p̂p̂ᵀ is not a distribution.
JointPairDistribution second_order_to_pair(const SecondOrderPrediction& s);

JointPairDistribution binary_params_to_joint(const BinaryPairParams& p);

/// μ = b + c and ρ = 1 - b/(μ(1-μ)); ρ = 0 when μ ∈ {0, 1}.
BinaryPairParams joint_to_binary_params(const JointPairDistribution& j,
                                        double symmetry_tolerance = tol::kOracleSymmetry);

/// Smallest eigenvalue of (J + Jᵀ)/2.
double min_eigenvalue(const JointPairDistribution& j);

/// Weighted average of outer products p pᵀ over mixture components.
JointPairDistribution mixture_joint(std::span<const ProbVector> components,
                                    std::span<const double> weights);

}  // namespace paircal
