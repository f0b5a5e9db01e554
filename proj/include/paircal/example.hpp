// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

namespace paircal {

/// One input with two responses drawn i.i.d. from the true conditional.
/// `shared_latent` is for auditing only and never reaches a model.
template <class X, class Y>
struct PairedExample {
  X x{};
  Y y1{};
  Y y2{};
  std::optional<int> shared_latent;
};

}  // namespace paircal
