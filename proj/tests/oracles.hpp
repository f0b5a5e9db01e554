// SPDX-License-Identifier: Apache-2.0
//
// Reference computations written independently of the library, used as
// ground truth by the unit and acceptance tests.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Random symmetric non-negative K×K matrix with unit total.
template <class Gen>
Eigen::MatrixXd random_symmetric_joint(Gen& gen, int k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = u(gen);
  Eigen::MatrixXd s = a + a.transpose();
  return s / s.sum();
}

template <class Gen>
std::vector<double> random_simplex(Gen& gen, int k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(static_cast<std::size_t>(k));
  double t = 0.0;
  for (auto& x : p) t += (x = e(gen));
  for (auto& x : p) x /= t;
  return p;
}

/// Σ_c w_c p_c p_cᵀ for `n` random components and random weights: a
/// joint that is exactly calibrated for a single group.
template <class Gen>
Eigen::MatrixXd random_mixture_joint(Gen& gen, int k, int n) {
  const auto w = random_simplex(gen, n);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(k, k);
  for (int c = 0; c < n; ++c) {
    const auto p = random_simplex(gen, k);
    const Eigen::Map<const Eigen::VectorXd> v(p.data(), k);
    j += w[static_cast<std::size_t>(c)] * v * v.transpose();
  }
  return j;
}

/// Σ_c w_c (p_c - p̄)(p_c - p̄)ᵀ with weights normalized.
inline Eigen::MatrixXd mixture_covariance(const std::vector<std::vector<double>>& comps,
                                          const std::vector<double>& weights) {
  const auto k = static_cast<int>(comps.front().size());
  double wt = 0.0;
  for (double w : weights) wt += w;
  std::vector<double> mean(static_cast<std::size_t>(k), 0.0);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int y = 0; y < k; ++y) mean[static_cast<std::size_t>(y)] += weights[c] / wt * comps[c][static_cast<std::size_t>(y)];
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        cov(a, b) += weights[c] / wt * (comps[c][static_cast<std::size_t>(a)] - mean[static_cast<std::size_t>(a)]) *
                     (comps[c][static_cast<std::size_t>(b)] - mean[static_cast<std::size_t>(b)]);
  return cov;
}

/// Digits of π via the Rabinowitz-Wagon spigot, "31415..." with `n` digits
/// after the leading 3.
inline std::string pi_spigot(int n) {
  const int want = n + 1 + 8;  // guard digits for the carry handling
  const int len = want * 10 / 3 + 2;
  std::vector<std::int64_t> a(static_cast<std::size_t>(len), 2);
  std::string out;
  int nines = 0;
  int predigit = -1;
  for (int j = 0; j < want; ++j) {
    std::int64_t q = 0;
    for (int i = len; i >= 1; --i) {
      const std::int64_t x = 10 * a[static_cast<std::size_t>(i - 1)] + q * i;
      a[static_cast<std::size_t>(i - 1)] = x % (2 * i - 1);
      q = x / (2 * i - 1);
    }
    a[0] = q % 10;
    q /= 10;
    if (q == 9) {
      ++nines;
    } else if (q == 10) {
      out.push_back(static_cast<char>('0' + predigit + 1));
      out.append(static_cast<std::size_t>(nines), '0');
      predigit = 0;
      nines = 0;
    } else {
      if (predigit >= 0) out.push_back(static_cast<char>('0' + predigit));
      predigit = static_cast<int>(q);
      out.append(static_cast<std::size_t>(nines), '9');
      nines = 0;
    }
  }
  return out.substr(0, static_cast<std::size_t>(n + 1));
}

/// Soft state values on the 5×5 lake by plain value iteration:
///   V(s) = τ log Σ_{allowed s'} exp((r(s') + γ V(s')) / τ),  V(goal) = 0,
/// and the Boltzmann policy π(a|s) = exp((r(s') + γ V(s') − V(s)) / τ).
/// Returns probabilities indexed [r*5 + c][action] with actions
/// left, right, up, down; rows for the goal and the patch are zero.
inline std::array<std::array<double, 4>, 25> lake_boltzmann_policy(int patch_c, int patch_r) {
  constexpr double tau = 2.5, gamma = 0.9;
  const int dc[4] = {-1, 1, 0, 0};
  const int dr[4] = {0, 0, -1, 1};
  auto reward = [&](int c, int r) {
    if (c == 4 && r == 2) return 40.0;
    if (c == 2 && r == 2) return -10.0;
    if (c >= 1 && c <= 3 && r >= 1 && r <= 3) return -5.0;
    return -3.0;
  };
  auto allowed = [&](int c, int r) { return c >= 0 && c < 5 && r >= 0 && r < 5 && !(c == patch_c && r == patch_r); };
  std::array<double, 25> v{};
  for (int it = 0; it < 100000; ++it) {
    std::array<double, 25> nv{};
    double delta = 0.0;
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        if ((c == 4 && r == 2) || (c == patch_c && r == patch_r)) continue;
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
          const int nc = c + dc[a], nr = r + dr[a];
          if (!allowed(nc, nr)) continue;
          acc += std::exp((reward(nc, nr) + gamma * v[static_cast<std::size_t>(nr * 5 + nc)]) / tau);
        }
        nv[static_cast<std::size_t>(r * 5 + c)] = tau * std::log(acc);
        delta = std::max(delta, std::abs(nv[static_cast<std::size_t>(r * 5 + c)] - v[static_cast<std::size_t>(r * 5 + c)]));
      }
    v = nv;
    if (delta < 1e-13) break;
  }
  std::array<std::array<double, 4>, 25> pi{};
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      if ((c == 4 && r == 2) || (c == patch_c && r == patch_r)) continue;
      for (int a = 0; a < 4; ++a) {
        const int nc = c + dc[a], nr = r + dr[a];
        if (!allowed(nc, nr)) continue;
        pi[static_cast<std::size_t>(r * 5 + c)][static_cast<std::size_t>(a)] =
            std::exp((reward(nc, nr) + gamma * v[static_cast<std::size_t>(nr * 5 + nc)] - v[static_cast<std::size_t>(r * 5 + c)]) / tau);
      }
    }
  return pi;
}

/// Target function of the 1D task evaluated literally, without the
/// overflow-safe softplus.
inline double sin1d_direct(double x) {
  const double z = std::abs(x);
  const double w = 0.2 * std::log(1.0 + std::exp((z - 1.0) / 0.2));
  const double sgn = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
  const double v = sgn * (120.0 * z - 112.0 * w - 0.0635);
  const double u = 0.6 * std::cos(v) + 0.4 * std::cos(4.2 * x);
  return (0.98 * u + 1.0) / 2.0;
}

/// Binomial standard error of a rate estimate.
inline double sigma(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

}  // namespace oracle
