// SPDX-License-Identifier: Apache-2.0
//
// Residual MLP pair predictor with hand-written reverse-mode gradients and an
// AdamW trainer (linear warmup, cosine decay).
//
// Layout (W = width, I = inner):
//   v0 = w ⊙ (x·1 + b)           input offsets, I units (dense layer if D > 1)
//   r0 = W0 relu(v0) + b0        W units
//   repeat blocks: r += Wb relu(Wa LN(r) + ba) + bb
//   o  = Wo relu(Wh LN(r) + bh) + bo
// Heads: binary (μ = σ(o0), ρ = σ(o1)), symmetric softmax over K² cells of
// L + Lᵀ, or a single Bernoulli logit for ensemble baselines.
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paircal/core.hpp"
#include "paircal/distfree.hpp"
#include "paircal/example.hpp"

namespace paircal {

/// Parameter storage. Aligned so that vectorized kernels see the same
/// address offsets on every run, which keeps results bit-reproducible.
template <class T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

enum class HeadKind { BinaryMuRho, SymmetricSoftmax, Bernoulli };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

struct MlpConfig {
  std::size_t input_dim = 1;
  std::size_t width = 128;
  std::size_t inner = 512;
  std::size_t blocks = 3;
  HeadKind head = HeadKind::BinaryMuRho;
  std::size_t classes = 2;  // K for the symmetric-softmax head
  double eigen_penalty_weight = 0.0;
  double layer_norm_eps = 1e-6;
};

/// Inputs as columns (D × N) with paired labels.
struct PairDataset {
  Eigen::MatrixXd inputs;
  std::vector<int> y1;
  std::vector<int> y2;

  std::size_t size() const noexcept { return y1.size(); }
  static PairDataset from_examples(std::span<const PairedExample<double, int>> examples);
};

struct LossValue {
  double loss = 0.0;     // total objective (nll + penalty)
  double nll = 0.0;
  double penalty = 0.0;
};

class MlpPairModel {
 public:
  /// Fan-in scaled normal weights, unit LayerNorm scales, zero biases.
  MlpPairModel(MlpConfig config, std::uint64_t seed);

  static MlpPairModel zeros(MlpConfig config);

  const MlpConfig& config() const noexcept { return config_; }
  MlpConfig& mutable_config() noexcept { return config_; }
  std::size_t output_dim() const noexcept;
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  /// Raw head outputs for a batch of column inputs (output_dim × B).
  Eigen::MatrixXd outputs(const Eigen::MatrixXd& inputs) const;

  /// Joint over (Y1, Y2) for one input. Throws NonFiniteActivation.
  JointPairDistribution forward(std::span<const double> x) const;

  /// Binary head: (μ, ρμ(1-μ)) per scalar input. Bernoulli head: (p, 0).
  std::vector<BinaryPrediction> predict_binary(std::span<const double> xs) const;

  /// Mean pair NLL (+ eigenvalue penalty for the softmax head) over the
  /// selected examples; fills `grad` (same size as parameters) if given.
  LossValue loss_and_gradient(const PairDataset& data, std::span<const std::size_t> indices,
                              std::vector<double>* grad) const;

 private:
  struct Layout;
  MlpPairModel(MlpConfig config, AlignedVector<double> params);
  static AlignedVector<double> allocate(const MlpConfig& config);

  MlpConfig config_;
  AlignedVector<double> params_;

  friend MlpPairModel mlp_from_parameters(MlpConfig config, std::vector<double> params);
};

MlpPairModel mlp_from_parameters(MlpConfig config, std::vector<double> params);

/// Number of parameters the layout for `config` requires.
std::size_t mlp_parameter_count(const MlpConfig& config);

/// Arithmetic used for the forward and backward passes while training. The
/// optimizer state and the returned parameters are always double.
enum class Precision { Float64, Float32 };

std::string to_string(Precision precision);
Precision precision_from_string(const std::string& name);

struct TrainConfig {
  std::size_t iterations = 10000;
  std::size_t batch_size = 512;
  double max_learning_rate = 0.002;
  std::size_t warmup_steps = 100;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  std::optional<double> eigen_penalty_weight;  // overrides the model's when set
  std::size_t log_every = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Precision precision = Precision::Float32;
};

struct LossPoint {
  std::size_t step = 0;
  double loss = 0.0;
  double penalty = 0.0;
};

struct TrainResult {
  MlpPairModel model;
  std::vector<LossPoint> trace;
};

/// Learning rate at step t (0-based): linear warmup from 0, then cosine decay to 0.
double scheduled_learning_rate(const TrainConfig& config, std::size_t step);

/// Deterministic given (seed, config, dataset order). Throws DivergedLoss.
TrainResult train(MlpPairModel model, const PairDataset& data, const TrainConfig& config);

}  // namespace paircal
