// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "paircal/error.hpp"

namespace testing {

/// Error code thrown by `fn`, or nullopt if it returns normally.
template <class Fn>
std::optional<paircal::ErrorCode> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const paircal::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing
