#pragma once

#include "adagnn/common.hpp"
#include "adagnn/graph.hpp"
#include "adagnn/sparse.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adagnn {

enum class ModelKind { adagnn_sym, adagnn_rw, gcn, sgc };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::adagnn_sym: return "adagnn-s";
    case ModelKind::adagnn_rw: return "adagnn-r";
    case ModelKind::gcn: return "gcn";
    case ModelKind::sgc: return "sgc";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "adagnn-s" || s == "adagnn_sym") return ModelKind::adagnn_sym;
  if (s == "adagnn-r" || s == "adagnn_rw") return ModelKind::adagnn_rw;
  if (s == "gcn") return ModelKind::gcn;
  if (s == "sgc") return ModelKind::sgc;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

inline bool is_adagnn(ModelKind k) { return k == ModelKind::adagnn_sym || k == ModelKind::adagnn_rw; }

using Labels = std::vector<int>;
using Mask = std::vector<bool>;

enum class Mode { train, eval };

struct ModelDims {
  int layers = 2;       // K
  Index features = 0;   // F
  Index hidden = 128;   // H
  Index classes = 0;    // C
};

/// One contiguous parameter array, as seen by the loss and the optimizer.
struct ParamBlock {
  std::span<double> data;
  bool is_filter;  // phi vectors; the only blocks under the l1 penalty
};

struct ConstParamBlock {
  std::span<const double> data;
  bool is_filter;
};

/// Trainable parameters of any supported model.
///
/// AdaGNN uses phi (K vectors: length F, then H), theta (F x H) and w_out
/// (H x C). GCN keeps one weight matrix per layer in `weights`; SGC keeps a
/// single F x C matrix there.
struct ModelParams {
  ModelKind kind = ModelKind::adagnn_sym;
  ModelDims dims;
  std::vector<Vector> phi;
  Matrix theta;
  Matrix w_out;
  std::vector<Matrix> weights;

  /// Phi = 1 everywhere (the untrained filter is the fixed GCN low-pass
  /// filter); weight matrices Glorot-uniform.
  static ModelParams init(ModelKind kind, const ModelDims& dims, Rng& rng) {
    ModelParams p = shaped(kind, dims);
    for (auto& v : p.phi) v.setOnes();
    auto glorot = [&](Matrix& m) {
      const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
    };
    if (is_adagnn(kind)) {
      glorot(p.theta);
      glorot(p.w_out);
    }
    for (auto& w : p.weights) glorot(w);
    return p;
  }

  /// Correct shapes, all entries zero.
  static ModelParams shaped(ModelKind kind, const ModelDims& dims) {
    if (dims.layers < 1) throw DimensionError("model needs at least one layer, got " + std::to_string(dims.layers));
    if (dims.features < 1 || dims.classes < 1 || dims.hidden < 1) {
      throw DimensionError("model dimensions must be positive (F=" + std::to_string(dims.features) +
                           ", H=" + std::to_string(dims.hidden) + ", C=" + std::to_string(dims.classes) + ")");
    }
    ModelParams p;
    p.kind = kind;
    p.dims = dims;
    const Index F = dims.features, H = dims.hidden, C = dims.classes;
    switch (kind) {
      case ModelKind::adagnn_sym:
      case ModelKind::adagnn_rw:
        p.phi.push_back(Vector::Zero(F));
        for (int k = 1; k < dims.layers; ++k) p.phi.push_back(Vector::Zero(H));
        p.theta = Matrix::Zero(F, H);
        p.w_out = Matrix::Zero(H, C);
        break;
      case ModelKind::gcn:
        if (dims.layers == 1) {
          p.weights.push_back(Matrix::Zero(F, C));
        } else {
          p.weights.push_back(Matrix::Zero(F, H));
          for (int k = 1; k < dims.layers - 1; ++k) p.weights.push_back(Matrix::Zero(H, H));
          p.weights.push_back(Matrix::Zero(H, C));
        }
        break;
      case ModelKind::sgc:
        p.weights.push_back(Matrix::Zero(F, C));
        break;
    }
    return p;
  }

  static ModelParams zeros_like(const ModelParams& o) { return shaped(o.kind, o.dims); }

  std::vector<ParamBlock> blocks() {
    std::vector<ParamBlock> out;
    for (auto& v : phi) out.push_back({{v.data(), static_cast<std::size_t>(v.size())}, true});
    if (theta.size() > 0) out.push_back({{theta.data(), static_cast<std::size_t>(theta.size())}, false});
    if (w_out.size() > 0) out.push_back({{w_out.data(), static_cast<std::size_t>(w_out.size())}, false});
    for (auto& w : weights) out.push_back({{w.data(), static_cast<std::size_t>(w.size())}, false});
    return out;
  }

  std::vector<ConstParamBlock> blocks() const {
    std::vector<ConstParamBlock> out;
    for (auto& b : const_cast<ModelParams*>(this)->blocks()) out.push_back({b.data, b.is_filter});
    return out;
  }

  Index count() const {
    Index n = 0;
    for (const auto& b : blocks()) n += static_cast<Index>(b.data.size());
    return n;
  }

  bool same_shape(const ModelParams& o) const {
    if (kind != o.kind || phi.size() != o.phi.size() || weights.size() != o.weights.size()) return false;
    for (std::size_t k = 0; k < phi.size(); ++k)
      if (phi[k].size() != o.phi[k].size()) return false;
    for (std::size_t k = 0; k < weights.size(); ++k)
      if (weights[k].rows() != o.weights[k].rows() || weights[k].cols() != o.weights[k].cols()) return false;
    return theta.rows() == o.theta.rows() && theta.cols() == o.theta.cols() && w_out.rows() == o.w_out.rows() &&
           w_out.cols() == o.w_out.cols();
  }

  bool operator==(const ModelParams& o) const {
    if (!same_shape(o)) return false;
    const auto a = blocks();
    const auto b = o.blocks();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!std::equal(a[i].data.begin(), a[i].data.end(), b[i].data.begin())) return false;
    return true;
  }
};

struct ForwardOptions {
  double dropout = 0.0;
  bool dropout_intermediate = false;
};

/// Reverse-pass bookkeeping; filled only by train-mode forwards.
struct ForwardCache {
  bool populated = false;
  const SparseMatrix* op = nullptr;        // L~ (AdaGNN) or S (GCN); not owned
  SparseMatrix input;                      // layer-1 input after dropout
  Matrix first_pre;                        // layer-1 pre-activation (AdaGNN)
  std::vector<Matrix> lap_products;        // L~ H^(k-1) for k = 2..K (AdaGNN)
  std::vector<Matrix> layer_inputs;        // dropped inputs of layers 2..K (GCN)
  std::vector<Matrix> pre;                 // per-layer pre-activations (GCN)
  std::vector<Matrix> masks;               // scaled dropout masks; empty matrix = no dropout
  Matrix head_input;                       // representation fed to the classifier
  Matrix head_mask;
};

struct ForwardOutput {
  Matrix logits;
  Matrix yhat;
  ForwardCache cache;
};

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

/// H - L H diag(phi): one adaptive filtering step.
inline Matrix layer_filter(const Matrix& h, const SparseMatrix& lap, const Vector& phi) {
  require(lap.rows() == h.rows() && lap.cols() == h.rows(),
          "layer_filter: operator " + std::to_string(lap.rows()) + "x" + std::to_string(lap.cols()) + " vs " +
              std::to_string(h.rows()) + " nodes");
  require(phi.size() == h.cols(), "layer_filter: phi length " + std::to_string(phi.size()) + " vs " +
                                      std::to_string(h.cols()) + " channels");
  return h - diag_right_mul(spmm(lap, h), phi);
}

/// Row-wise softmax with max subtraction.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    double sum = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      sum += out(r, c);
    }
    out.row(r) /= sum;
  }
  return out;
}

inline Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

namespace detail {

/// Inverted-dropout mask: 0 or 1/(1-rate) per entry.
inline Matrix dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() >= rate ? keep : 0.0;
  return m;
}

/// Dropout on the stored entries of a sparse matrix (zeros stay zero).
inline SparseMatrix dropout_sparse(const SparseMatrix& x, double rate, Rng& rng) {
  std::vector<double> vals(x.values().begin(), x.values().end());
  const double keep = 1.0 / (1.0 - rate);
  for (double& v : vals) v = rng.uniform() >= rate ? v * keep : 0.0;
  return x.with_values(std::move(vals));
}

inline void check_finite(const Matrix& m, int layer, const char* what) {
  if (!m.allFinite()) throw NumericError(layer, what);
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Cross-entropy gradient w.r.t. logits for summed loss over masked rows.
inline Matrix ce_logit_grad(const Matrix& yhat, const Labels& y, const Mask& mask) {
  require(static_cast<Index>(y.size()) == yhat.rows() && static_cast<Index>(mask.size()) == yhat.rows(),
          "ce_logit_grad: label/mask length mismatch");
  Matrix g = Matrix::Zero(yhat.rows(), yhat.cols());
  for (Index r = 0; r < yhat.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    g.row(r) = yhat.row(r);
    g(r, y[static_cast<std::size_t>(r)]) -= 1.0;
  }
  return g;
}

/// Adds the l1 subgradient (filters only; 0 at exactly 0) and the squared
/// l2 gradient to `grads`.
inline void add_regularizer_grad(ModelParams& grads, const ModelParams& p, double alpha, double beta) {
  auto gb = grads.blocks();
  const auto pb = p.blocks();
  for (std::size_t b = 0; b < gb.size(); ++b) {
    for (std::size_t i = 0; i < gb[b].data.size(); ++i) {
      const double v = pb[b].data[i];
      gb[b].data[i] += 2.0 * beta * v + (pb[b].is_filter ? alpha * sign(v) : 0.0);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// AdaGNN
// ---------------------------------------------------------------------------

/// H1 = ReLU((X - L X Phi_1) Theta), H_k = H_{k-1} - L H_{k-1} Phi_k,
/// Yhat = softmax(H_K W).
///
/// The first layer is evaluated as X Theta - L (X (Phi_1 Theta)) so that the
/// N x F intermediate is never formed. Dropout hits X and H_K (and the
/// intermediate layer inputs when requested).
inline ForwardOutput adagnn_forward(const ModelParams& p, const SparseMatrix& x, const SparseMatrix& lap, Mode mode,
                                    std::uint64_t seed, const ForwardOptions& opt = {}) {
  require(is_adagnn(p.kind), "adagnn_forward: parameters are for " + to_string(p.kind));
  const Index n = x.rows();
  require(x.cols() == p.dims.features, "adagnn_forward: X has " + std::to_string(x.cols()) +
                                           " channels, model expects F=" + std::to_string(p.dims.features));
  require(lap.rows() == n && lap.cols() == n, "adagnn_forward: operator does not match node count");
  require(static_cast<int>(p.phi.size()) == p.dims.layers, "adagnn_forward: phi count differs from K");

  const bool train = mode == Mode::train;
  const bool drop = train && opt.dropout > 0.0;
  Rng rng(seed);
  ForwardOutput out;
  ForwardCache& cache = out.cache;

  SparseMatrix xd = drop ? detail::dropout_sparse(x, opt.dropout, rng) : x;
  Matrix scaled_theta = p.phi[0].asDiagonal() * p.theta;
  Matrix pre = spmm(xd, p.theta) - spmm(lap, spmm(xd, scaled_theta));
  detail::check_finite(pre, 1, "first-layer pre-activation");
  Matrix h = relu(pre);

  if (train) {
    cache.populated = true;
    cache.op = &lap;
    cache.input = std::move(xd);
    cache.first_pre = std::move(pre);
  }

  for (int k = 1; k < p.dims.layers; ++k) {
    if (drop && opt.dropout_intermediate) {
      Matrix mask = detail::dropout_mask(h.rows(), h.cols(), opt.dropout, rng);
      h = h.cwiseProduct(mask);
      cache.masks.push_back(std::move(mask));
    } else if (train) {
      cache.masks.emplace_back();
    }
    Matrix lh = spmm(lap, h);
    h -= diag_right_mul(lh, p.phi[static_cast<std::size_t>(k)]);
    detail::check_finite(h, k + 1, "filtered representation");
    if (train) cache.lap_products.push_back(std::move(lh));
  }

  if (drop) {
    cache.head_mask = detail::dropout_mask(h.rows(), h.cols(), opt.dropout, rng);
    h = h.cwiseProduct(cache.head_mask);
  }
  out.logits = h * p.w_out;
  detail::check_finite(out.logits, p.dims.layers + 1, "logits");
  out.yhat = softmax_rows(out.logits);
  if (train) cache.head_input = std::move(h);
  return out;
}

/// Gradients of the full regularized loss (summed cross-entropy over the
/// masked nodes, alpha * l1 on phi, beta * squared l2 on everything).
inline ModelParams adagnn_backward(const ModelParams& p, const ForwardOutput& fwd, const Labels& y, const Mask& mask,
                                   double alpha, double beta) {
  const ForwardCache& c = fwd.cache;
  require(c.populated && c.op != nullptr, "adagnn_backward: cache is not from a train-mode forward");
  require(is_adagnn(p.kind), "adagnn_backward: parameters are for " + to_string(p.kind));
  require(c.head_input.cols() == p.w_out.rows() && c.input.cols() == p.theta.rows() &&
              static_cast<int>(c.lap_products.size()) == p.dims.layers - 1,
          "adagnn_backward: cache does not match parameter shapes");
  const SparseMatrix& lap = *c.op;
  ModelParams g = ModelParams::zeros_like(p);

  Matrix dlogits = detail::ce_logit_grad(fwd.yhat, y, mask);
  g.w_out = c.head_input.transpose() * dlogits;
  Matrix dh = dlogits * p.w_out.transpose();
  if (c.head_mask.size() > 0) dh = dh.cwiseProduct(c.head_mask);

  for (int k = p.dims.layers - 1; k >= 1; --k) {
    const auto ks = static_cast<std::size_t>(k);
    const Matrix& lh = c.lap_products[ks - 1];
    g.phi[ks] = -(lh.cwiseProduct(dh)).colwise().sum().transpose();
    Matrix din = dh - spmm_transposed(lap, diag_right_mul(dh, p.phi[ks]));
    if (c.masks[ks - 1].size() > 0) din = din.cwiseProduct(c.masks[ks - 1]);
    dh = std::move(din);
  }

  Matrix g1 = dh.cwiseProduct((c.first_pre.array() > 0.0).cast<double>().matrix());
  Matrix lt_g = spmm_transposed(lap, g1);
  Matrix xt_g = spmm_transposed(c.input, g1);
  Matrix xt_lt_g = spmm_transposed(c.input, lt_g);
  g.theta = xt_g - p.phi[0].asDiagonal() * xt_lt_g;
  g.phi[0] = -(p.theta.cwiseProduct(xt_lt_g)).rowwise().sum();

  detail::add_regularizer_grad(g, p, alpha, beta);
  return g;
}

// ---------------------------------------------------------------------------
// GCN and SGC baselines
// ---------------------------------------------------------------------------

/// K layers of H <- ReLU(S H W_k); the last layer is linear and feeds the
/// softmax. Dropout is applied to every layer input.
inline ForwardOutput gcn_forward(const ModelParams& p, const SparseMatrix& x, const SparseMatrix& s, Mode mode,
                                 std::uint64_t seed, double dropout = 0.0) {
  require(p.kind == ModelKind::gcn, "gcn_forward: parameters are for " + to_string(p.kind));
  require(!p.weights.empty() && x.cols() == p.weights.front().rows(),
          "gcn_forward: X has " + std::to_string(x.cols()) + " channels, first weight expects " +
              std::to_string(p.weights.empty() ? 0 : p.weights.front().rows()));
  require(s.rows() == x.rows() && s.cols() == x.rows(), "gcn_forward: operator does not match node count");
  for (std::size_t k = 1; k < p.weights.size(); ++k) {
    require(p.weights[k].rows() == p.weights[k - 1].cols(), "gcn_forward: weight chain shape mismatch");
  }

  const bool train = mode == Mode::train;
  const bool drop = train && dropout > 0.0;
  Rng rng(seed);
  ForwardOutput out;
  ForwardCache& cache = out.cache;
  const int layers = static_cast<int>(p.weights.size());

  SparseMatrix xd = drop ? detail::dropout_sparse(x, dropout, rng) : x;
  Matrix pre = spmm(s, spmm(xd, p.weights[0]));
  detail::check_finite(pre, 1, "pre-activation");
  if (train) {
    cache.populated = true;
    cache.op = &s;
    cache.input = std::move(xd);
  }
  for (int k = 1; k < layers; ++k) {
    Matrix h = relu(pre);
    if (drop) {
      Matrix mask = detail::dropout_mask(h.rows(), h.cols(), dropout, rng);
      h = h.cwiseProduct(mask);
      cache.masks.push_back(std::move(mask));
    } else if (train) {
      cache.masks.emplace_back();
    }
    Matrix next = spmm(s, h * p.weights[static_cast<std::size_t>(k)]);
    detail::check_finite(next, k + 1, "pre-activation");
    if (train) {
      cache.pre.push_back(std::move(pre));
      cache.layer_inputs.push_back(std::move(h));
    }
    pre = std::move(next);
  }
  out.logits = std::move(pre);
  out.yhat = softmax_rows(out.logits);
  return out;
}

inline ModelParams gcn_backward(const ModelParams& p, const ForwardOutput& fwd, const Labels& y, const Mask& mask,
                                double beta) {
  const ForwardCache& c = fwd.cache;
  require(c.populated && c.op != nullptr, "gcn_backward: cache is not from a train-mode forward");
  require(p.kind == ModelKind::gcn && c.layer_inputs.size() + 1 == p.weights.size(),
          "gcn_backward: cache does not match parameter shapes");
  const SparseMatrix& s = *c.op;
  ModelParams g = ModelParams::zeros_like(p);

  Matrix grad = detail::ce_logit_grad(fwd.yhat, y, mask);
  for (std::size_t k = p.weights.size(); k-- > 0;) {
    Matrix t = spmm_transposed(s, grad);
    if (k == 0) {
      g.weights[0] = spmm_transposed(c.input, t);
      break;
    }
    g.weights[k] = c.layer_inputs[k - 1].transpose() * t;
    Matrix din = t * p.weights[k].transpose();
    if (c.masks[k - 1].size() > 0) din = din.cwiseProduct(c.masks[k - 1]);
    grad = din.cwiseProduct((c.pre[k - 1].array() > 0.0).cast<double>().matrix());
  }
  detail::add_regularizer_grad(g, p, 0.0, beta);
  return g;
}

/// S^k X by k successive sparse products.
inline Matrix propagate_k(const SparseMatrix& s, const Matrix& x, int k) {
  if (k < 1) throw DimensionError("propagate_k: k must be >= 1, got " + std::to_string(k));
  Matrix h = spmm(s, x);
  for (int i = 1; i < k; ++i) h = spmm(s, h);
  return h;
}

/// softmax(S^k X W).
inline Matrix sgc_forward(const Matrix& w, const Matrix& x, const SparseMatrix& s, int k) {
  require(x.cols() == w.rows(), "sgc_forward: X has " + std::to_string(x.cols()) + " channels, W expects " +
                                    std::to_string(w.rows()));
  return softmax_rows(propagate_k(s, x, k) * w);
}

// ---------------------------------------------------------------------------
// Unified model over one graph
// ---------------------------------------------------------------------------

/// Binds a model kind to a graph and feature matrix, owning the operators.
class Network {
 public:
  Network(ModelKind kind, const Graph& g, SparseMatrix features, int layers)
      : kind_(kind), layers_(layers), x_(std::move(features)) {
    if (layers < 1) throw DimensionError("Network: layers must be >= 1");
    require(x_.rows() == g.num_nodes(), "Network: feature rows differ from node count");
    switch (kind) {
      case ModelKind::adagnn_sym: op_ = laplacian(g, LaplacianKind::sym, true); break;
      case ModelKind::adagnn_rw: op_ = laplacian(g, LaplacianKind::rw, true); break;
      case ModelKind::gcn: op_ = gcn_propagation(g); break;
      case ModelKind::sgc:
        op_ = gcn_propagation(g);
        propagated_ = propagate_k(op_, x_.to_dense(), layers);
        break;
    }
  }

  // The cache of a forward points at op_; keep the Network put.
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  ModelKind kind() const { return kind_; }
  int layers() const { return layers_; }
  const SparseMatrix& features() const { return x_; }
  const SparseMatrix& op() const { return op_; }

  ForwardOutput forward(const ModelParams& p, Mode mode, std::uint64_t seed, const ForwardOptions& opt) const {
    switch (kind_) {
      case ModelKind::adagnn_sym:
      case ModelKind::adagnn_rw: return adagnn_forward(p, x_, op_, mode, seed, opt);
      case ModelKind::gcn: return gcn_forward(p, x_, op_, mode, seed, opt.dropout);
      case ModelKind::sgc: {
        ForwardOutput out;
        require(p.weights.size() == 1 && p.weights[0].rows() == propagated_.cols(), "sgc: weight shape mismatch");
        out.logits = propagated_ * p.weights[0];
        detail::check_finite(out.logits, layers_, "logits");
        out.yhat = softmax_rows(out.logits);
        out.cache.populated = mode == Mode::train;
        return out;
      }
    }
    throw Error("unreachable");
  }

  ModelParams backward(const ModelParams& p, const ForwardOutput& fwd, const Labels& y, const Mask& mask,
                       double alpha, double beta) const {
    switch (kind_) {
      case ModelKind::adagnn_sym:
      case ModelKind::adagnn_rw: return adagnn_backward(p, fwd, y, mask, alpha, beta);
      case ModelKind::gcn: return gcn_backward(p, fwd, y, mask, beta);
      case ModelKind::sgc: {
        ModelParams g = ModelParams::zeros_like(p);
        g.weights[0] = propagated_.transpose() * detail::ce_logit_grad(fwd.yhat, y, mask);
        detail::add_regularizer_grad(g, p, 0.0, beta);
        return g;
      }
    }
    throw Error("unreachable");
  }

 private:
  ModelKind kind_;
  int layers_;
  SparseMatrix x_;
  SparseMatrix op_;
  Matrix propagated_;
};

}  // namespace adagnn
