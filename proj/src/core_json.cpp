// SPDX-License-Identifier: Apache-2.0
#include "paircal/core_json.hpp"

namespace paircal {

namespace {

Json rows_of(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd square_from(const Json& rows, const char* what) {
  require(rows.is_array() && !rows.empty(), ErrorCode::IoFailure, std::string(what) + " must be a non-empty array");
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == k, ErrorCode::IoFailure,
            std::string(what) + " must be square");
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      require(v.is_number(), ErrorCode::IoFailure, std::string(what) + " entries must be numbers");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

std::vector<double> numbers_from(const Json& a, const char* what) {
  require(a.is_array(), ErrorCode::IoFailure, std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : a) {
    require(v.is_number(), ErrorCode::IoFailure, std::string(what) + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const Json& field(const Json& j, const char* name) {
  require(j.is_object() && j.contains(name), ErrorCode::IoFailure, std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

Json to_json(const ProbVector& p) {
  Json a = Json::array();
  for (double v : p.values()) a.push_back(v);
  return a;
}

Json to_json(const JointPairDistribution& j) {
  Json labels = Json::array();
  for (const auto& l : j.labels()) labels.push_back(l);
  return Json{{"labels", labels}, {"joint", rows_of(j.matrix())}};
}

Json to_json(const SecondOrderPrediction& s) {
  return Json{{"mean", to_json(s.mean())}, {"covariance", rows_of(s.covariance())}};
}

Json to_json(const BinaryPairParams& b) { return Json{{"mu", b.mu}, {"rho", b.rho}}; }

ProbVector prob_vector_from_json(const Json& j) { return ProbVector(numbers_from(j, "probability vector")); }

JointPairDistribution joint_from_json(const Json& j) {
  auto m = square_from(field(j, "joint"), "joint");
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    require(j["labels"].is_array(), ErrorCode::IoFailure, "labels must be an array");
    for (const auto& l : j["labels"]) {
      require(l.is_string(), ErrorCode::IoFailure, "labels must be strings");
      labels.push_back(l.get<std::string>());
    }
  }
  return JointPairDistribution(std::move(m), std::move(labels));
}

SecondOrderPrediction second_order_from_json(const Json& j) {
  auto mean = prob_vector_from_json(field(j, "mean"));
  auto cov = square_from(field(j, "covariance"), "covariance");
  require(static_cast<std::size_t>(cov.rows()) == mean.size(), ErrorCode::IoFailure,
          "covariance size does not match the mean");
  return SecondOrderPrediction(std::move(mean), std::move(cov));
}

BinaryPairParams binary_params_from_json(const Json& j) {
  const auto& mu = field(j, "mu");
  const auto& rho = field(j, "rho");
  require(mu.is_number() && rho.is_number(), ErrorCode::IoFailure, "mu and rho must be numbers");
  return BinaryPairParams::make(mu.get<double>(), rho.get<double>());
}

}  // namespace paircal
