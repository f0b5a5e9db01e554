// SPDX-License-Identifier: Apache-2.0
#include "paircal/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "paircal/linalg.hpp"

namespace paircal {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_labels(const std::vector<std::string>& labels, std::size_t k) {
  require(labels.size() == k, ErrorCode::InvalidArgument,
          "label count " + std::to_string(labels.size()) + " does not match K=" + std::to_string(k));
}

}  // namespace

std::vector<std::string> default_labels(std::size_t k) {
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(std::to_string(i));
  return out;
}

ProbVector::ProbVector(std::vector<double> entries, double tolerance) : entries_(std::move(entries)) {
  require(!entries_.empty(), ErrorCode::InvalidProbability, "empty probability vector");
  double total = 0.0;
  for (double e : entries_) {
    require(std::isfinite(e) && e >= 0.0, ErrorCode::InvalidProbability,
            "negative or non-finite entry " + fmt_double(e));
    total += e;
  }
  require(std::abs(total - 1.0) <= tolerance, ErrorCode::InvalidProbability,
          "entries sum to " + fmt_double(total));
}

ProbVector ProbVector::uniform(std::size_t k) {
  return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

ProbVector ProbVector::one_hot(std::size_t k, std::size_t index) {
  std::vector<double> e(k, 0.0);
  e.at(index) = 1.0;
  return ProbVector(std::move(e));
}

Eigen::VectorXd ProbVector::to_eigen() const {
  return Eigen::Map<const Eigen::VectorXd>(entries_.data(), static_cast<Eigen::Index>(entries_.size()));
}

JointPairDistribution::JointPairDistribution(Eigen::MatrixXd matrix, std::vector<std::string> labels,
                                             double tolerance)
    : matrix_(std::move(matrix)), labels_(std::move(labels)) {
  require(matrix_.rows() > 0 && matrix_.rows() == matrix_.cols(), ErrorCode::InvalidArgument,
          "joint must be a non-empty square matrix");
  if (labels_.empty()) labels_ = default_labels(size());
  check_labels(labels_, size());
  for (Eigen::Index i = 0; i < matrix_.size(); ++i) {
    const double e = matrix_.data()[i];
    require(std::isfinite(e) && e >= -tolerance, ErrorCode::InvalidProbability,
            "negative or non-finite joint entry " + fmt_double(e));
  }
  const double total = matrix_.sum();
  require(std::abs(total - 1.0) <= tolerance, ErrorCode::InvalidProbability,
          "joint entries sum to " + fmt_double(total));
}

JointPairDistribution JointPairDistribution::from_rows(const std::vector<std::vector<double>>& rows,
                                                       std::vector<std::string> labels) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    require(static_cast<Eigen::Index>(row.size()) == k, ErrorCode::InvalidArgument, "ragged joint rows");
    for (Eigen::Index j = 0; j < k; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return JointPairDistribution(std::move(m), std::move(labels));
}

JointPairDistribution JointPairDistribution::uniform(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(k);
  return JointPairDistribution(Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(k * k)));
}

JointPairDistribution JointPairDistribution::product(const ProbVector& p) {
  const Eigen::VectorXd v = p.to_eigen();
  return JointPairDistribution(v * v.transpose());
}

std::size_t JointPairDistribution::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  require(it != labels_.end(), ErrorCode::InvalidArgument, "unknown label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

double JointPairDistribution::symmetry_defect() const {
  return (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
}

JointPairDistribution JointPairDistribution::symmetrized() const {
  return JointPairDistribution(0.5 * (matrix_ + matrix_.transpose()), labels_);
}

SecondOrderPrediction::SecondOrderPrediction(ProbVector mean, Eigen::MatrixXd covariance, double tolerance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const auto k = static_cast<Eigen::Index>(mean_.size());
  require(covariance_.rows() == k && covariance_.cols() == k, ErrorCode::InvalidSecondOrder,
          "covariance shape does not match mean");
  require(covariance_.allFinite(), ErrorCode::InvalidSecondOrder, "non-finite covariance");
  require((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() <= tolerance,
          ErrorCode::InvalidSecondOrder, "covariance is not symmetric");
  require(covariance_.rowwise().sum().cwiseAbs().maxCoeff() <= tolerance, ErrorCode::InvalidSecondOrder,
          "covariance rows must sum to zero");
  require(covariance_.diagonal().minCoeff() >= -tolerance, ErrorCode::InvalidSecondOrder,
          "negative variance on the diagonal");
}

BinaryPairParams BinaryPairParams::make(double mu, double rho) {
  require(mu >= 0.0 && mu <= 1.0, ErrorCode::InvalidArgument, "mu outside [0,1]");
  require(rho >= 0.0 && rho <= 1.0, ErrorCode::InvalidArgument, "rho outside [0,1]");
  return BinaryPairParams{mu, rho};
}

std::pair<ProbVector, ProbVector> marginals(const JointPairDistribution& j) {
  const Eigen::VectorXd rows = j.matrix().rowwise().sum();
  const Eigen::VectorXd cols = j.matrix().colwise().sum().transpose();
  // Clamp the -tolerance slack admitted by JointPairDistribution.
  auto to_vec = [](const Eigen::VectorXd& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = std::max(0.0, v(i));
    return ProbVector(std::move(out));
  };
  return {to_vec(rows), to_vec(cols)};
}

Eigen::MatrixXd pair_covariance(const JointPairDistribution& j) {
  const Eigen::VectorXd m1 = j.matrix().rowwise().sum();
  const Eigen::VectorXd m2 = j.matrix().colwise().sum().transpose();
  return j.matrix() - m1 * m2.transpose();
}

SecondOrderPrediction pair_to_second_order(const JointPairDistribution& j, double symmetry_tolerance) {
  const double defect = j.symmetry_defect();
  require(defect <= symmetry_tolerance, ErrorCode::SymmetryViolation,
          "symmetry defect " + fmt_double(defect) + " exceeds " + fmt_double(symmetry_tolerance));
  return SecondOrderPrediction(marginals(j).first, pair_covariance(j),
                               tol::kNormalization + 4.0 * symmetry_tolerance);
}

JointPairDistribution second_order_to_pair(const SecondOrderPrediction& s) {
  const Eigen::VectorXd p = s.mean().to_eigen();
  Eigen::MatrixXd m = s.covariance() + p * p.transpose();
  require(m.minCoeff() >= -tol::kNormalization, ErrorCode::InvalidSecondOrder,
          "Σ̂ + p̂p̂ᵀ has a negative entry " + fmt_double(m.minCoeff()));
  require(std::abs(m.sum() - 1.0) <= tol::kNormalization, ErrorCode::InvalidSecondOrder,
          "Σ̂ + p̂p̂ᵀ sums to " + fmt_double(m.sum()));
  return JointPairDistribution(std::move(m));
}

JointPairDistribution binary_params_to_joint(const BinaryPairParams& p) {
  const double mu = p.mu;
  const double rho = p.rho;
  Eigen::Matrix2d m;
  m(0, 0) = rho * (1.0 - mu) + (1.0 - rho) * (1.0 - mu) * (1.0 - mu);
  m(1, 1) = rho * mu + (1.0 - rho) * mu * mu;
  m(0, 1) = (1.0 - rho) * mu * (1.0 - mu);
  m(1, 0) = m(0, 1);
  return JointPairDistribution(Eigen::MatrixXd(m));
}

BinaryPairParams joint_to_binary_params(const JointPairDistribution& j, double symmetry_tolerance) {
  require(j.size() == 2, ErrorCode::NotBinary, "expected K=2, got K=" + std::to_string(j.size()));
  require(j.symmetry_defect() <= symmetry_tolerance, ErrorCode::AsymmetricInput,
          "off-diagonal entries differ by " + fmt_double(j.symmetry_defect()));
  const double b = 0.5 * (j(0, 1) + j(1, 0));
  const double c = j(1, 1);
  const double mu = std::clamp(b + c, 0.0, 1.0);
  const double var = mu * (1.0 - mu);
  if (var == 0.0) return BinaryPairParams{mu, 0.0};
  double rho = 1.0 - b / var;
  require(rho >= -1e-12, ErrorCode::InvalidArgument, "joint is not positive semidefinite");
  rho = std::clamp(rho, 0.0, 1.0);
  return BinaryPairParams{mu, rho};
}

double min_eigenvalue(const JointPairDistribution& j) {
  return jacobi_eigen(j.matrix()).values(0);
}

JointPairDistribution mixture_joint(std::span<const ProbVector> components, std::span<const double> weights) {
  require(!components.empty(), ErrorCode::EmptyInput, "no mixture components");
  require(components.size() == weights.size(), ErrorCode::InvalidArgument, "weight count mismatch");
  const auto k = static_cast<Eigen::Index>(components.front().size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  double total = 0.0;
  for (std::size_t c = 0; c < components.size(); ++c) {
    require(static_cast<Eigen::Index>(components[c].size()) == k, ErrorCode::InvalidArgument,
            "component size mismatch");
    require(weights[c] >= 0.0, ErrorCode::InvalidArgument, "negative mixture weight");
    const Eigen::VectorXd p = components[c].to_eigen();
    acc.noalias() += weights[c] * (p * p.transpose());
    total += weights[c];
  }
  require(total > 0.0, ErrorCode::EmptyGroup, "mixture weights sum to zero");
  return JointPairDistribution(acc / total);
}

}  // namespace paircal
