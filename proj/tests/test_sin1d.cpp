// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "paircal/sin1d.hpp"

using namespace paircal;

TEST_CASE("sin1d_prob values") {
  CHECK(std::abs(sin1d_prob(0.0) - 0.99) < 1e-12);
  double lo = 1.0, hi = 0.0;
  for (int i = -100000; i <= 100000; ++i) {
    const double x = i * 1e-4 * 8.0;
    const double p = sin1d_prob(x);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK(lo >= 0.01);
  CHECK(hi <= 0.99);
  // Far tails stay finite where exp((z-1)/0.2) overflows.
  CHECK(std::isfinite(sin1d_prob(500.0)));
  CHECK(std::isfinite(sin1d_prob(-1e6)));
}

TEST_CASE("sin1d_prob matches the literal formula") {
  double worst = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = -5.0 + 10.0 * i / 200000.0;
    worst = std::max(worst, std::abs(sin1d_prob(x) - oracle::sin1d_direct(x)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("sin1d_dataset draws Bernoulli pairs") {
  const auto d = sin1d_dataset(1000000, 4);
  double resid = 0.0, var = 0.0, cross = 0.0, cross_var = 0.0;
  for (const auto& e : d) {
    const double p = sin1d_prob(e.x);
    resid += (e.y1 - p) + (e.y2 - p);
    var += 2 * p * (1 - p);
    cross += (e.y1 - p) * (e.y2 - p);
    cross_var += p * (1 - p) * p * (1 - p);
  }
  CHECK(std::abs(resid) <= 3.0 * std::sqrt(var));
  CHECK(std::abs(cross) <= 3.0 * std::sqrt(cross_var));
  double mx = 0.0, mx2 = 0.0;
  for (const auto& e : d) {
    mx += e.x;
    mx2 += e.x * e.x;
  }
  CHECK(std::abs(mx / 1e6) <= 3e-3);
  CHECK(std::abs(mx2 / 1e6 - 1.0) <= 5e-3);
}

TEST_CASE("sin1d_dataset is deterministic and prefix-stable") {
  const auto a = sin1d_dataset(1000, 9);
  const auto b = sin1d_dataset(25000, 9);
  CHECK(b.size() == 25000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y1 == b[i].y1);
    CHECK(a[i].y2 == b[i].y2);
  }
  const auto c = sin1d_dataset(1000, 10);
  CHECK(c[0].x != a[0].x);
}

TEST_CASE("normal quantile bins hold equal probability") {
  const NormalQuantileBins q(100);
  CHECK(q.edges().size() == 99);
  CHECK(std::abs(q.edges()[49]) < 1e-12);
  CHECK(q.bin_of(-10.0) == 0);
  CHECK(q.bin_of(10.0) == 99);
  std::vector<double> counts(100, 0.0);
  for (double x : sin1d_inputs(1000000, 2, 0)) counts[q.bin_of(x)] += 1.0;
  for (double c : counts) CHECK(std::abs(c - 1e4) <= 4.0 * std::sqrt(1e4 * 0.99));

  const auto pts = normal_bin_quadrature(q, 10);
  CHECK(pts.size() == 1000);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(q.bin_of(pts[i].x) == i / 10);
}
