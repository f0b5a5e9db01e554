// SPDX-License-Identifier: Apache-2.0
//
// JSON shapes for the core value types. Matrices are row-major arrays of
// rows. Field names are listed in docs/schema.md.
//
// Reading checks shape (IoFailure) and then runs the type's own validation,
// so a well-formed file with bad numbers fails with that type's error code.
#pragma once

#include "json.hpp"

#include "paircal/core.hpp"

namespace paircal {

using Json = nlohmann::ordered_json;

Json to_json(const ProbVector& p);
Json to_json(const JointPairDistribution& j);
Json to_json(const SecondOrderPrediction& s);
Json to_json(const BinaryPairParams& b);

ProbVector prob_vector_from_json(const Json& j);
JointPairDistribution joint_from_json(const Json& j);
SecondOrderPrediction second_order_from_json(const Json& j);
BinaryPairParams binary_params_from_json(const Json& j);

}  // namespace paircal
