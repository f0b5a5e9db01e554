// SPDX-License-Identifier: Apache-2.0
//
// One-dimensional binary regression task: X ~ N(0, 1) and
// P(Y = 1 | x) = (0.98 u(x) + 1) / 2 with
//   u(x) = 0.6 cos(v(x)) + 0.4 cos(4.2 x)
//   v(x) = sign(x) (120|x| - 112 w(|x|) - 0.0635)
//   w(z) = 0.2 ln(1 + exp((z - 1) / 0.2))
// The function oscillates quickly for |x| < 1 and slowly beyond.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "paircal/example.hpp"
#include "paircal/models.hpp"

namespace paircal {

double sin1d_prob(double x);

/// n examples with X ~ N(0,1) and y1, y2 i.i.d. Bernoulli(sin1d_prob(x)).
/// Example i only depends on (seed, i).
std::vector<PairedExample<double, int>> sin1d_dataset(std::size_t n, std::uint64_t seed);

/// Fresh inputs X ~ N(0,1), stream `stream` under `seed`.
std::vector<double> sin1d_inputs(std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// Equal-probability bins of the standard normal.
class NormalQuantileBins {
 public:
  explicit NormalQuantileBins(std::size_t count);
  std::size_t count() const noexcept { return count_; }
  std::size_t bin_of(double x) const;
  /// Interior edges, Φ⁻¹(k / count) for k = 1..count-1.
  const std::vector<double>& edges() const noexcept { return edges_; }

 private:
  std::size_t count_;
  std::vector<double> edges_;
};

/// Midpoint rule in probability space: `per_bin` points per bin, each with
/// weight 1/per_bin, placed at Φ⁻¹ of the sub-interval midpoints.
std::vector<WeightedPoint<double>> normal_bin_quadrature(const NormalQuantileBins& bins, std::size_t per_bin);

/// Binary tabular model over the quantile bins, exactly second-order
/// calibrated for the bin grouping (up to quadrature error).
TabularPairModel<double> sin1d_binned_model(std::size_t bins, std::size_t per_bin = 2000);

}  // namespace paircal
