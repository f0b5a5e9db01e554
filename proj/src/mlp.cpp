// SPDX-License-Identifier: Apache-2.0
#include "paircal/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "paircal/linalg.hpp"
#include "paircal/random.hpp"

namespace paircal {

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <class T>
using VecMap = Eigen::Map<Vec<T>>;
template <class T>
using ConstVecMap = Eigen::Map<const Vec<T>>;

constexpr std::uint64_t kInitStream = 0x1A17;
constexpr std::uint64_t kBatchStream = 0xBA7C;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <class T>
struct LayerNormCache {
  Mat<T> xhat;       // normalized input, width × B
  RowVec<T> invstd;  // 1 × B
};

template <class T>
Mat<T> layer_norm_forward(const Mat<T>& in, const ConstVecMap<T>& gamma, const ConstVecMap<T>& beta, T eps,
                          LayerNormCache<T>& cache) {
  const T n = static_cast<T>(in.rows());
  const RowVec<T> mean = in.colwise().sum() / n;
  cache.xhat = in.rowwise() - mean;
  const RowVec<T> var = cache.xhat.array().square().colwise().sum() / n;
  cache.invstd = (var.array() + eps).rsqrt();
  cache.xhat.array().rowwise() *= cache.invstd.array();
  Mat<T> out = cache.xhat;
  out.array().colwise() *= gamma.array();
  out.colwise() += beta;
  return out;
}

// Returns d(input) and accumulates d(gamma), d(beta).
template <class T>
Mat<T> layer_norm_backward(const Mat<T>& dout, const ConstVecMap<T>& gamma, const LayerNormCache<T>& cache,
                           VecMap<T> dgamma, VecMap<T> dbeta) {
  dgamma += (dout.array() * cache.xhat.array()).rowwise().sum().matrix();
  dbeta += dout.rowwise().sum();
  Mat<T> dxhat = dout;
  dxhat.array().colwise() *= gamma.array();
  const T n = static_cast<T>(dout.rows());
  const RowVec<T> sum_d = dxhat.colwise().sum();
  const RowVec<T> sum_dx = (dxhat.array() * cache.xhat.array()).colwise().sum();
  Mat<T> dx = n * dxhat;
  dx.rowwise() -= sum_d;
  dx.array() -= cache.xhat.array().rowwise() * sum_dx.array();
  dx.array().rowwise() *= (cache.invstd.array() / n);
  return dx;
}

}  // namespace

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::BinaryMuRho: return "binary-mu-rho";
    case HeadKind::SymmetricSoftmax: return "symmetric-softmax";
    case HeadKind::Bernoulli: return "bernoulli";
  }
  return "unknown";
}

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "binary-mu-rho") return HeadKind::BinaryMuRho;
  if (name == "symmetric-softmax") return HeadKind::SymmetricSoftmax;
  if (name == "bernoulli") return HeadKind::Bernoulli;
  fail(ErrorCode::ConfigInvalid, "unknown head kind '" + name + "'");
}

namespace {

struct NetLayout {
  struct Block {
    std::size_t ln_g, ln_b, wa, ba, wb, bb;
  };
  std::size_t in_w = 0, in_b = 0, w0 = 0, b0 = 0;
  std::vector<Block> blocks;
  Block head{};
  std::size_t total = 0;

  NetLayout(const MlpConfig& c, std::size_t out_dim) {
    auto take = [this](std::size_t n) {
      const std::size_t at = total;
      total += n;
      return at;
    };
    in_w = take(c.inner * c.input_dim);
    in_b = take(c.inner);
    w0 = take(c.width * c.inner);
    b0 = take(c.width);
    for (std::size_t i = 0; i < c.blocks; ++i) {
      Block b{};
      b.ln_g = take(c.width);
      b.ln_b = take(c.width);
      b.wa = take(c.inner * c.width);
      b.ba = take(c.inner);
      b.wb = take(c.width * c.inner);
      b.bb = take(c.width);
      blocks.push_back(b);
    }
    head.ln_g = take(c.width);
    head.ln_b = take(c.width);
    head.wa = take(c.inner * c.width);
    head.ba = take(c.inner);
    head.wb = take(out_dim * c.inner);
    head.bb = take(out_dim);
  }
};

}  // namespace

struct MlpPairModel::Layout : NetLayout {
  using NetLayout::NetLayout;
};

namespace {

std::size_t head_output_dim(const MlpConfig& c) {
  switch (c.head) {
    case HeadKind::BinaryMuRho: return 2;
    case HeadKind::SymmetricSoftmax: return c.classes * c.classes;
    case HeadKind::Bernoulli: return 1;
  }
  return 0;
}

void validate_config(const MlpConfig& c) {
  require(c.input_dim >= 1 && c.width >= 1 && c.inner >= 1, ErrorCode::ConfigInvalid, "MLP sizes must be positive");
  require(c.head != HeadKind::SymmetricSoftmax || (c.classes >= 2 && c.classes <= kMaxEigenDim),
          ErrorCode::ConfigInvalid, "symmetric-softmax head needs 2 <= K <= 64");
  require(c.eigen_penalty_weight >= 0.0, ErrorCode::ConfigInvalid, "penalty weight must be >= 0");
}

}  // namespace

std::size_t MlpPairModel::output_dim() const noexcept { return head_output_dim(config_); }

std::size_t mlp_parameter_count(const MlpConfig& config) {
  validate_config(config);
  return NetLayout(config, head_output_dim(config)).total;
}

AlignedVector<double> MlpPairModel::allocate(const MlpConfig& config) {
  return AlignedVector<double>(mlp_parameter_count(config), 0.0);
}

MlpPairModel::MlpPairModel(MlpConfig config, AlignedVector<double> params)
    : config_(config), params_(std::move(params)) {
  validate_config(config_);
  require(params_.size() == mlp_parameter_count(config_), ErrorCode::ConfigInvalid,
          "parameter count does not match layout");
}

MlpPairModel mlp_from_parameters(MlpConfig config, std::vector<double> params) {
  for (double p : params) require(std::isfinite(p), ErrorCode::ConfigInvalid, "non-finite parameter");
  return MlpPairModel(config, AlignedVector<double>(params.begin(), params.end()));
}

MlpPairModel MlpPairModel::zeros(MlpConfig config) { return MlpPairModel(config, allocate(config)); }

MlpPairModel::MlpPairModel(MlpConfig config, std::uint64_t seed) : config_(config), params_(allocate(config)) {
  const Layout L(config_, output_dim());
  Rng rng = substream(seed, kInitStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](std::size_t at, std::size_t n, double scale) {
    for (std::size_t i = 0; i < n; ++i) params_[at + i] = scale * normal(rng);
  };
  const auto& c = config_;
  if (c.input_dim == 1) {
    fill(L.in_w, c.inner, 1.0);
    // Input offsets place each unit's kink somewhere in the bulk of the data.
    fill(L.in_b, c.inner, 1.0);
  } else {
    fill(L.in_w, c.inner * c.input_dim, 1.0 / std::sqrt(static_cast<double>(c.input_dim)));
  }
  fill(L.w0, c.width * c.inner, 1.0 / std::sqrt(static_cast<double>(c.inner)));
  for (const auto& b : L.blocks) {
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(b.ln_g), c.width, 1.0);
    fill(b.wa, c.inner * c.width, 1.0 / std::sqrt(static_cast<double>(c.width)));
    fill(b.wb, c.width * c.inner, 1.0 / std::sqrt(static_cast<double>(c.inner)));
  }
  std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(L.head.ln_g), c.width, 1.0);
  fill(L.head.wa, c.inner * c.width, 1.0 / std::sqrt(static_cast<double>(c.width)));
  fill(L.head.wb, output_dim() * c.inner, 1.0 / std::sqrt(static_cast<double>(c.inner)));
}

namespace {

template <class T>
struct ForwardCache {
  Mat<T> x;
  Mat<T> h0;  // relu(v0)
  std::vector<LayerNormCache<T>> ln;
  std::vector<Mat<T>> u;  // LayerNorm outputs
  std::vector<Mat<T>> h;  // relu activations
};

// Shared forward pass; `cache` may be null.
template <class T>
Mat<T> mlp_forward(const MlpConfig& c, const NetLayout& L, std::span<const T> p, std::size_t out_dim, const Mat<T>& x,
                   ForwardCache<T>* cache) {
  const auto I = static_cast<Eigen::Index>(c.inner);
  const auto W = static_cast<Eigen::Index>(c.width);
  const auto D = static_cast<Eigen::Index>(c.input_dim);
  const auto O = static_cast<Eigen::Index>(out_dim);
  const Eigen::Index B = x.cols();
  require(x.rows() == D, ErrorCode::InvalidArgument, "input dimension mismatch");

  Mat<T> v0(I, B);
  if (c.input_dim == 1) {
    const ConstVecMap<T> w(p.data() + L.in_w, I);
    const ConstVecMap<T> b(p.data() + L.in_b, I);
    v0.noalias() = w * x;
    v0.colwise() += (w.array() * b.array()).matrix();
  } else {
    const ConstMatMap<T> w(p.data() + L.in_w, I, D);
    v0.noalias() = w * x;
    v0.colwise() += ConstVecMap<T>(p.data() + L.in_b, I);
  }
  Mat<T> h0 = v0.cwiseMax(T(0));
  Mat<T> r(W, B);
  r.noalias() = ConstMatMap<T>(p.data() + L.w0, W, I) * h0;
  r.colwise() += ConstVecMap<T>(p.data() + L.b0, W);

  if (cache) {
    cache->x = x;
    cache->h0 = std::move(h0);
    cache->ln.assign(L.blocks.size() + 1, {});
    cache->u.assign(L.blocks.size() + 1, {});
    cache->h.assign(L.blocks.size() + 1, {});
  }

  auto mlp_step = [&](const NetLayout::Block& blk, std::size_t slot, Eigen::Index rows_out) {
    LayerNormCache<T> lnc;
    Mat<T> u = layer_norm_forward<T>(r, ConstVecMap<T>(p.data() + blk.ln_g, W), ConstVecMap<T>(p.data() + blk.ln_b, W),
                                     static_cast<T>(c.layer_norm_eps), lnc);
    Mat<T> v(I, B);
    v.noalias() = ConstMatMap<T>(p.data() + blk.wa, I, W) * u;
    v.colwise() += ConstVecMap<T>(p.data() + blk.ba, I);
    v = v.cwiseMax(T(0));
    Mat<T> delta(rows_out, B);
    delta.noalias() = ConstMatMap<T>(p.data() + blk.wb, rows_out, I) * v;
    delta.colwise() += ConstVecMap<T>(p.data() + blk.bb, rows_out);
    if (cache) {
      cache->ln[slot] = std::move(lnc);
      cache->u[slot] = std::move(u);
      cache->h[slot] = std::move(v);
    }
    return delta;
  };

  for (std::size_t i = 0; i < L.blocks.size(); ++i) r += mlp_step(L.blocks[i], i, W);
  return mlp_step(L.head, L.blocks.size(), O);
}

// Loss and d(loss)/d(outputs) for a batch, always in double.
LossValue head_loss(const MlpConfig& c, const PairDataset& data, std::span<const std::size_t> indices,
                    const Eigen::MatrixXd& out, Eigen::MatrixXd* dout);

template <class T>
LossValue net_loss_and_gradient(const MlpConfig& c, const NetLayout& L, std::span<const T> params,
                                std::size_t out_dim, const PairDataset& data, std::span<const std::size_t> indices,
                                AlignedVector<T>* grad) {
  require(!indices.empty(), ErrorCode::EmptyInput, "empty batch");
  const auto B = static_cast<Eigen::Index>(indices.size());
  const auto D = static_cast<Eigen::Index>(c.input_dim);
  Mat<T> x(D, B);
  for (Eigen::Index n = 0; n < B; ++n) {
    const std::size_t idx = indices[static_cast<std::size_t>(n)];
    require(idx < data.size(), ErrorCode::InvalidArgument, "batch index out of range");
    x.col(n) = data.inputs.col(static_cast<Eigen::Index>(idx)).cast<T>();
  }

  ForwardCache<T> cache;
  const Eigen::MatrixXd out = mlp_forward<T>(c, L, params, out_dim, x, grad ? &cache : nullptr).template cast<double>();
  require(out.allFinite(), ErrorCode::NonFiniteActivation, "non-finite network output");
  Eigen::MatrixXd dout_d;
  const LossValue lv = head_loss(c, data, indices, out, grad ? &dout_d : nullptr);
  if (!grad) return lv;
  const Mat<T> dout = dout_d.cast<T>();

  grad->assign(params.size(), T(0));
  T* gp = grad->data();
  const T* p = params.data();
  const auto I = static_cast<Eigen::Index>(c.inner);
  const auto W = static_cast<Eigen::Index>(c.width);

  auto step_back = [&](const NetLayout::Block& blk, std::size_t slot, const Mat<T>& ddelta,
                       Eigen::Index rows_out) -> Mat<T> {
    const Mat<T>& h = cache.h[slot];
    MatMap<T>(gp + blk.wb, rows_out, I).noalias() += ddelta * h.transpose();
    VecMap<T>(gp + blk.bb, rows_out) += ddelta.rowwise().sum();
    Mat<T> dv(I, B);
    dv.noalias() = ConstMatMap<T>(p + blk.wb, rows_out, I).transpose() * ddelta;
    dv = (h.array() > T(0)).select(dv, T(0));
    MatMap<T>(gp + blk.wa, I, W).noalias() += dv * cache.u[slot].transpose();
    VecMap<T>(gp + blk.ba, I) += dv.rowwise().sum();
    Mat<T> du(W, B);
    du.noalias() = ConstMatMap<T>(p + blk.wa, I, W).transpose() * dv;
    return layer_norm_backward<T>(du, ConstVecMap<T>(p + blk.ln_g, W), cache.ln[slot], VecMap<T>(gp + blk.ln_g, W),
                                  VecMap<T>(gp + blk.ln_b, W));
  };

  Mat<T> dr = step_back(L.head, L.blocks.size(), dout, static_cast<Eigen::Index>(out_dim));
  for (std::size_t i = L.blocks.size(); i-- > 0;) dr += step_back(L.blocks[i], i, dr, W);

  MatMap<T>(gp + L.w0, W, I).noalias() += dr * cache.h0.transpose();
  VecMap<T>(gp + L.b0, W) += dr.rowwise().sum();
  Mat<T> dv0(I, B);
  dv0.noalias() = ConstMatMap<T>(p + L.w0, W, I).transpose() * dr;
  dv0 = (cache.h0.array() > T(0)).select(dv0, T(0));
  if (c.input_dim == 1) {
    const ConstVecMap<T> w(p + L.in_w, I);
    const ConstVecMap<T> b(p + L.in_b, I);
    const Vec<T> row_sum = dv0.rowwise().sum();
    VecMap<T>(gp + L.in_w, I) += dv0 * cache.x.row(0).transpose() + (b.array() * row_sum.array()).matrix();
    VecMap<T>(gp + L.in_b, I) += (w.array() * row_sum.array()).matrix();
  } else {
    MatMap<T>(gp + L.in_w, I, D).noalias() += dv0 * cache.x.transpose();
    VecMap<T>(gp + L.in_b, I) += dv0.rowwise().sum();
  }
  return lv;
}

}  // namespace

Eigen::MatrixXd MlpPairModel::outputs(const Eigen::MatrixXd& inputs) const {
  const Layout L(config_, output_dim());
  return mlp_forward<double>(config_, L, params_, output_dim(), inputs, nullptr);
}

namespace {

JointPairDistribution joint_from_output(const MlpConfig& c, const Eigen::VectorXd& o) {
  require(o.allFinite(), ErrorCode::NonFiniteActivation, "non-finite network output");
  switch (c.head) {
    case HeadKind::BinaryMuRho:
      return binary_params_to_joint(BinaryPairParams{sigmoid(o(0)), sigmoid(o(1))});
    case HeadKind::Bernoulli: {
      const double q = sigmoid(o(0));
      return JointPairDistribution::product(ProbVector({1.0 - q, q}));
    }
    case HeadKind::SymmetricSoftmax: {
      const auto k = static_cast<Eigen::Index>(c.classes);
      const ConstMatMap<double> logits(o.data(), k, k);
      Eigen::MatrixXd s = logits + logits.transpose();
      s.array() -= s.maxCoeff();
      s = s.array().exp();
      s /= s.sum();
      return JointPairDistribution(std::move(s));
    }
  }
  fail(ErrorCode::ConfigInvalid, "unknown head");
}

}  // namespace

JointPairDistribution MlpPairModel::forward(std::span<const double> x) const {
  require(x.size() == config_.input_dim, ErrorCode::InvalidArgument, "input dimension mismatch");
  for (double v : x) require(std::isfinite(v), ErrorCode::InvalidArgument, "non-finite input");
  Eigen::MatrixXd in(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) in(static_cast<Eigen::Index>(i), 0) = x[i];
  return joint_from_output(config_, outputs(in).col(0));
}

std::vector<BinaryPrediction> MlpPairModel::predict_binary(std::span<const double> xs) const {
  require(config_.input_dim == 1, ErrorCode::InvalidArgument, "predict_binary needs scalar inputs");
  require(config_.head != HeadKind::SymmetricSoftmax, ErrorCode::InvalidArgument,
          "predict_binary needs a binary or Bernoulli head");
  std::vector<BinaryPrediction> out(xs.size());
  constexpr std::size_t kChunk = 2048;
  for (std::size_t begin = 0; begin < xs.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, xs.size() - begin);
    Eigen::MatrixXd in(1, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) in(0, static_cast<Eigen::Index>(i)) = xs[begin + i];
    const Eigen::MatrixXd o = outputs(in);
    require(o.allFinite(), ErrorCode::NonFiniteActivation, "non-finite network output");
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      const double mu = sigmoid(o(0, col));
      if (config_.head == HeadKind::BinaryMuRho) {
        const double rho = sigmoid(o(1, col));
        out[begin + i] = {mu, rho * mu * (1.0 - mu)};
      } else {
        out[begin + i] = {mu, 0.0};
      }
    }
  }
  return out;
}

LossValue MlpPairModel::loss_and_gradient(const PairDataset& data, std::span<const std::size_t> indices,
                                          std::vector<double>* grad) const {
  const Layout L(config_, output_dim());
  if (!grad) return net_loss_and_gradient<double>(config_, L, params_, output_dim(), data, indices, nullptr);
  AlignedVector<double> g;
  const LossValue lv = net_loss_and_gradient<double>(config_, L, params_, output_dim(), data, indices, &g);
  grad->assign(g.begin(), g.end());
  return lv;
}

namespace {

LossValue head_loss(const MlpConfig& c, const PairDataset& data, std::span<const std::size_t> indices,
                    const Eigen::MatrixXd& out, Eigen::MatrixXd* dout_out) {
  const auto B = out.cols();
  const double inv_b = 1.0 / static_cast<double>(B);
  Eigen::MatrixXd scratch;
  Eigen::MatrixXd& dout = dout_out ? *dout_out : scratch;
  dout = Eigen::MatrixXd::Zero(out.rows(), out.cols());
  LossValue lv;
  constexpr double kTiny = 1e-300;

  for (Eigen::Index n = 0; n < B; ++n) {
    const std::size_t idx = indices[static_cast<std::size_t>(n)];
    const int a = data.y1[idx];
    const int b = data.y2[idx];
    switch (c.head) {
      case HeadKind::BinaryMuRho: {
        require((a == 0 || a == 1) && (b == 0 || b == 1), ErrorCode::InvalidArgument, "binary labels expected");
        const double mu = sigmoid(out(0, n));
        const double rho = sigmoid(out(1, n));
        double j = 0.0, dj_dmu = 0.0, dj_drho = 0.0;
        if (a == 0 && b == 0) {
          j = rho * (1.0 - mu) + (1.0 - rho) * (1.0 - mu) * (1.0 - mu);
          dj_dmu = -rho - 2.0 * (1.0 - rho) * (1.0 - mu);
          dj_drho = mu * (1.0 - mu);
        } else if (a == 1 && b == 1) {
          j = rho * mu + (1.0 - rho) * mu * mu;
          dj_dmu = rho + 2.0 * (1.0 - rho) * mu;
          dj_drho = mu * (1.0 - mu);
        } else {
          j = (1.0 - rho) * mu * (1.0 - mu);
          dj_dmu = (1.0 - rho) * (1.0 - 2.0 * mu);
          dj_drho = -mu * (1.0 - mu);
        }
        require(j >= kTiny, ErrorCode::ZeroProbabilityTarget, "target pair has zero probability");
        lv.nll -= std::log(j);
        dout(0, n) = -dj_dmu / j * mu * (1.0 - mu) * inv_b;
        dout(1, n) = -dj_drho / j * rho * (1.0 - rho) * inv_b;
        break;
      }
      case HeadKind::Bernoulli: {
        const double q = sigmoid(out(0, n));
        for (int y : {a, b}) {
          const double py = y == 1 ? q : 1.0 - q;
          require(py >= kTiny, ErrorCode::ZeroProbabilityTarget, "target has zero probability");
          lv.nll -= 0.5 * std::log(py);
          dout(0, n) += 0.5 * (q - static_cast<double>(y)) * inv_b;
        }
        break;
      }
      case HeadKind::SymmetricSoftmax: {
        const auto k = static_cast<Eigen::Index>(c.classes);
        require(a >= 0 && b >= 0 && a < k && b < k, ErrorCode::InvalidArgument, "label out of range");
        const Eigen::VectorXd col = out.col(n);
        const ConstMatMap<double> logits(col.data(), k, k);
        Eigen::MatrixXd s = logits + logits.transpose();
        s.array() -= s.maxCoeff();
        Eigen::MatrixXd prob = s.array().exp();
        prob /= prob.sum();
        require(prob(a, b) >= kTiny, ErrorCode::ZeroProbabilityTarget, "target pair has zero probability");
        lv.nll -= std::log(prob(a, b));
        Eigen::MatrixXd ds = prob;
        ds(a, b) -= 1.0;
        if (c.eigen_penalty_weight > 0.0) {
          const SymmetricEigen eig = jacobi_eigen(prob);
          Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
          for (Eigen::Index i = 0; i < k; ++i) {
            const double lam = eig.values(i);
            if (lam < 0.0) {
              lv.penalty += c.eigen_penalty_weight * lam * lam;
              g.noalias() += 2.0 * c.eigen_penalty_weight * lam * (eig.vectors.col(i) * eig.vectors.col(i).transpose());
            }
          }
          // Softmax Jacobian: dS = P ⊙ (G - <G, P>).
          const double gp = (g.array() * prob.array()).sum();
          ds.array() += prob.array() * (g.array() - gp);
        }
        const Eigen::MatrixXd dl = (ds + ds.transpose()) * inv_b;
        MatMap<double> dcol(dout.col(n).data(), k, k);
        dcol = dl;
        break;
      }
    }
  }
  lv.nll *= inv_b;
  lv.penalty *= inv_b;
  lv.loss = lv.nll + lv.penalty;
  return lv;
}

}  // namespace

PairDataset PairDataset::from_examples(std::span<const PairedExample<double, int>> examples) {
  PairDataset d;
  d.inputs.resize(1, static_cast<Eigen::Index>(examples.size()));
  d.y1.reserve(examples.size());
  d.y2.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    d.inputs(0, static_cast<Eigen::Index>(i)) = examples[i].x;
    d.y1.push_back(examples[i].y1);
    d.y2.push_back(examples[i].y2);
  }
  return d;
}

std::string to_string(Precision precision) { return precision == Precision::Float32 ? "float32" : "float64"; }

Precision precision_from_string(const std::string& name) {
  if (name == "float32") return Precision::Float32;
  if (name == "float64") return Precision::Float64;
  fail(ErrorCode::ConfigInvalid, "unknown precision '" + name + "'");
}

double scheduled_learning_rate(const TrainConfig& config, std::size_t step) {
  if (config.warmup_steps > 0 && step < config.warmup_steps)
    return config.max_learning_rate * static_cast<double>(step) / static_cast<double>(config.warmup_steps);
  if (config.iterations <= config.warmup_steps) return config.max_learning_rate;
  const double progress = std::min(1.0, static_cast<double>(step - config.warmup_steps) /
                                            static_cast<double>(config.iterations - config.warmup_steps));
  return config.max_learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

TrainResult train(MlpPairModel model, const PairDataset& data, const TrainConfig& config) {
  require(data.size() > 0, ErrorCode::EmptyInput, "empty training set");
  require(config.iterations > 0 && config.batch_size > 0 && config.max_learning_rate > 0.0,
          ErrorCode::ConfigInvalid, "iterations, batch size and learning rate must be positive");
  require(config.weight_decay >= 0.0, ErrorCode::ConfigInvalid, "weight decay must be >= 0");
  if (config.eigen_penalty_weight) {
    require(*config.eigen_penalty_weight >= 0.0, ErrorCode::ConfigInvalid, "penalty weight must be >= 0");
    model.mutable_config().eigen_penalty_weight = *config.eigen_penalty_weight;
  }

#if defined(__GLIBC__)
  // Activation buffers are a few MB each and reallocated every step; keep
  // them on the heap instead of fresh zero-filled mappings.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  const std::size_t n_params = model.parameter_count();
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
  AlignedVector<double> grad(n_params, 0.0);
  AlignedVector<float> params_f, grad_f;
  const NetLayout layout(model.config(), model.output_dim());
  std::vector<std::size_t> batch(config.batch_size);
  Rng rng = substream(config.seed, kBatchStream);
  TrainResult result{model, {}};
  auto params = result.model.parameters();
  const std::size_t log_every = std::max<std::size_t>(1, config.log_every);

  for (std::size_t step = 0; step < config.iterations; ++step) {
    for (auto& idx : batch)
      idx = std::min(data.size() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(data.size())));
    LossValue lv;
    if (config.precision == Precision::Float32) {
      params_f.assign(params.begin(), params.end());
      lv = net_loss_and_gradient<float>(result.model.config(), layout, params_f, result.model.output_dim(), data,
                                        batch, &grad_f);
      std::copy(grad_f.begin(), grad_f.end(), grad.begin());
    } else {
      lv = net_loss_and_gradient<double>(result.model.config(), layout, params, result.model.output_dim(), data,
                                         batch, &grad);
    }
    require(std::isfinite(lv.loss), ErrorCode::DivergedLoss, "loss is not finite at step " + std::to_string(step));

    const double lr = scheduled_learning_rate(config, step);
    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 - std::pow(config.adam_beta1, t);
    const double c2 = 1.0 - std::pow(config.adam_beta2, t);
    for (std::size_t i = 0; i < n_params; ++i) {
      m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * grad[i];
      v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
      const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_eps);
      params[i] -= lr * (update + config.weight_decay * params[i]);
    }
    if (step % log_every == 0 || step + 1 == config.iterations)
      result.trace.push_back({step, lv.loss, lv.penalty});
  }
  return result;
}

}  // namespace paircal
