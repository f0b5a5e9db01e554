// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "paircal/linalg.hpp"
#include "paircal/random.hpp"

namespace paircal {

inline constexpr std::size_t kDefaultChunk = 4096;

/// Calls fn(begin, end, chunk_index) for fixed-size chunks of [0, n). Chunk
/// boundaries do not depend on the worker count.
template <class Fn>
void for_each_chunk(std::size_t n, Fn&& fn, std::size_t chunk = kDefaultChunk) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const std::size_t workers = std::min(worker_count(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c * chunk, std::min(n, (c + 1) * chunk), c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks && !failed; c = next++) {
        try {
          fn(c * chunk, std::min(n, (c + 1) * chunk), c);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Sum of term(i) over [0, n): sequential within a chunk, pairwise across chunks.
template <class Term>
double chunked_sum(std::size_t n, Term&& term, std::size_t chunk = kDefaultChunk) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
  for_each_chunk(
      n,
      [&](std::size_t begin, std::size_t end, std::size_t c) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        partial[c] = s;
      },
      chunk);
  return pairwise_sum(partial);
}

}  // namespace paircal
