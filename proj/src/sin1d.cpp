// SPDX-License-Identifier: Apache-2.0
#include "paircal/sin1d.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "paircal/parallel.hpp"

namespace paircal {

namespace {

constexpr std::uint64_t kSin1dStream = 0x51D1;

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double sin1d_prob(double x) {
  require(std::isfinite(x), ErrorCode::InvalidArgument, "x must be finite");
  const double a = std::abs(x);
  const double w = 0.2 * softplus((a - 1.0) / 0.2);
  const double v = sign(x) * (120.0 * a - 112.0 * w - 0.0635);
  const double u = 0.6 * std::cos(v) + 0.4 * std::cos(4.2 * x);
  return (0.98 * u + 1.0) / 2.0;
}

std::vector<PairedExample<double, int>> sin1d_dataset(std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
  std::vector<PairedExample<double, int>> out(n);
  for_each_chunk(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = substream(seed, kSin1dStream, i);
      std::normal_distribution<double> normal(0.0, 1.0);
      const double x = normal(rng);
      const double p = sin1d_prob(x);
      out[i].x = x;
      out[i].y1 = rng.uniform() < p ? 1 : 0;
      out[i].y2 = rng.uniform() < p ? 1 : 0;
    }
  });
  return out;
}

std::vector<double> sin1d_inputs(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> xs(n);
  for_each_chunk(n, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = substream(seed, kSin1dStream ^ (stream << 20), i);
      xs[i] = std::normal_distribution<double>(0.0, 1.0)(rng);
    }
  });
  return xs;
}

NormalQuantileBins::NormalQuantileBins(std::size_t count) : count_(count) {
  require(count >= 1, ErrorCode::InvalidArgument, "need at least one bin");
  const boost::math::normal normal;
  for (std::size_t k = 1; k < count; ++k)
    edges_.push_back(boost::math::quantile(normal, static_cast<double>(k) / static_cast<double>(count)));
}

std::size_t NormalQuantileBins::bin_of(double x) const {
  return static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
}

std::vector<WeightedPoint<double>> normal_bin_quadrature(const NormalQuantileBins& bins, std::size_t per_bin) {
  require(per_bin >= 1, ErrorCode::InvalidArgument, "need at least one point per bin");
  const boost::math::normal normal;
  std::vector<WeightedPoint<double>> out;
  out.reserve(bins.count() * per_bin);
  const double k_total = static_cast<double>(bins.count());
  for (std::size_t k = 0; k < bins.count(); ++k) {
    for (std::size_t j = 0; j < per_bin; ++j) {
      const double u = (static_cast<double>(k) + (static_cast<double>(j) + 0.5) / static_cast<double>(per_bin)) / k_total;
      double x = boost::math::quantile(normal, u);
      // Rounding can push a point across its bin edge; keep it in its bin.
      if (bins.bin_of(x) != k) {
        if (k > 0) x = std::max(x, std::nextafter(bins.edges()[k - 1], INFINITY));
        if (k + 1 < bins.count()) x = std::min(x, std::nextafter(bins.edges()[k], -INFINITY));
      }
      out.push_back({x, 1.0 / static_cast<double>(per_bin)});
    }
  }
  return out;
}

TabularPairModel<double> sin1d_binned_model(std::size_t bins, std::size_t per_bin) {
  const NormalQuantileBins q(bins);
  const auto points = normal_bin_quadrature(q, per_bin);
  const std::function<ProbVector(const double&)> oracle = [](const double& x) {
    const double p = sin1d_prob(x);
    return ProbVector({1.0 - p, p});
  };
  return tabular_from_oracle<double>(oracle, points, [q](const double& x) { return q.bin_of(x); }, bins);
}

}  // namespace paircal
