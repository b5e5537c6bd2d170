#pragma once

#include "adagnn/common.hpp"
#include "adagnn/data.hpp"
#include "adagnn/model.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace adagnn {

struct TrainConfig {
  double lr = 0.01;
  int max_epochs = 300;
  double dropout = 0.5;
  double alpha = 1e-6;  // l1 on filter coefficients (AdaGNN only)
  double beta = 9e-4;   // squared l2 on every parameter
  int patience = 30;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool dropout_intermediate = false;
  bool row_normalize = false;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw std::invalid_argument("alpha and beta must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (patience < 0) throw std::invalid_argument("patience must be >= 0");
  }
};

struct LossBreakdown {
  double cross_entropy = 0.0;
  double l1 = 0.0;  // alpha-weighted
  double l2 = 0.0;  // beta-weighted
  Index clamped = 0;  // probabilities raised to the 1e-12 floor

  double total() const { return cross_entropy + l1 + l2; }
};

inline constexpr double kProbFloor = 1e-12;

/// Masked cross-entropy summed over nodes plus the penalty terms.
inline LossBreakdown total_loss(const Matrix& yhat, const Labels& y, const Mask& mask, const ModelParams& p,
                                double alpha, double beta) {
  require(static_cast<Index>(y.size()) == yhat.rows() && static_cast<Index>(mask.size()) == yhat.rows(),
          "total_loss: label/mask length differs from prediction rows");
  LossBreakdown out;
  for (Index r = 0; r < yhat.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    double q = yhat(r, y[static_cast<std::size_t>(r)]);
    if (q < kProbFloor) {
      q = kProbFloor;
      ++out.clamped;
    }
    out.cross_entropy -= std::log(q);
  }
  double l1 = 0.0, l2 = 0.0;
  for (const auto& b : p.blocks()) {
    for (double v : b.data) {
      if (b.is_filter) l1 += std::abs(v);
      l2 += v * v;
    }
  }
  out.l1 = alpha * l1;
  out.l2 = beta * l2;
  return out;
}

/// Mean cross-entropy over the masked nodes (0 for an empty mask).
inline double mean_cross_entropy(const Matrix& yhat, const Labels& y, const Mask& mask) {
  double s = 0.0;
  Index m = 0;
  for (Index r = 0; r < yhat.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    s -= std::log(std::max(yhat(r, y[static_cast<std::size_t>(r)]), kProbFloor));
    ++m;
  }
  return m ? s / static_cast<double>(m) : 0.0;
}

/// Fraction of masked nodes whose arg-max (lowest index on ties) is correct.
inline double accuracy(const Matrix& yhat, const Labels& y, const Mask& mask) {
  Index hit = 0, m = 0;
  for (Index r = 0; r < yhat.rows(); ++r) {
    if (!mask[static_cast<std::size_t>(r)]) continue;
    Index arg = 0;
    yhat.row(r).maxCoeff(&arg);
    hit += arg == y[static_cast<std::size_t>(r)];
    ++m;
  }
  return m ? static_cast<double>(hit) / static_cast<double>(m) : 0.0;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::int64_t t = 0;

  static AdamState for_params(const ModelParams& p) { return {ModelParams::zeros_like(p), ModelParams::zeros_like(p), 0}; }
};

struct AdamHyper {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update. A non-finite gradient leaves params and
/// state untouched and throws NumericError naming the block and entry.
inline void adam_step(AdamState& s, ModelParams& p, const ModelParams& grad, const AdamHyper& h) {
  require(s.m.same_shape(p) && s.v.same_shape(p) && grad.same_shape(p), "adam_step: shape mismatch");
  const auto gb = grad.blocks();
  for (std::size_t b = 0; b < gb.size(); ++b) {
    for (std::size_t i = 0; i < gb[b].data.size(); ++i) {
      if (!std::isfinite(gb[b].data[i])) {
        throw NumericError(-1, "gradient block " + std::to_string(b) + " entry " + std::to_string(i) + " is " +
                                   std::to_string(gb[b].data[i]));
      }
    }
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.t));
  auto pb = p.blocks();
  auto mb = s.m.blocks();
  auto vb = s.v.blocks();
  for (std::size_t b = 0; b < pb.size(); ++b) {
    for (std::size_t i = 0; i < pb[b].data.size(); ++i) {
      const double g = gb[b].data[i];
      double& m = mb[b].data[i];
      double& v = vb[b].data[i];
      m = h.beta1 * m + (1.0 - h.beta1) * g;
      v = h.beta2 * v + (1.0 - h.beta2) * g * g;
      pb[b].data[i] -= h.lr * (m / c1) / (std::sqrt(v / c2) + h.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // full objective on the training mask, dropout active
  double val_loss = 0.0;    // mean cross-entropy on the validation mask, eval mode
  double val_acc = 0.0;
};

struct Evaluation {
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double val_loss = 0.0;
  Matrix logits;
};

struct TrainResult {
  ModelParams params;  // best by validation accuracy, then validation loss
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  Evaluation eval;  // of `params`
  Index clamped_probabilities = 0;
};

/// Feature matrix as the model sees it.
inline SparseMatrix model_features(const Dataset& ds, const TrainConfig& cfg) {
  return cfg.row_normalize ? row_normalize(ds.features) : ds.features;
}

inline ModelDims model_dims(const Dataset& ds, int layers, Index hidden) {
  return ModelDims{layers, ds.num_features(), hidden, ds.num_classes};
}

inline Evaluation evaluate(const Network& net, const ModelParams& p, const Dataset& ds) {
  ForwardOutput out = net.forward(p, Mode::eval, 0, {});
  Evaluation e;
  e.train_acc = accuracy(out.yhat, ds.labels, ds.train_mask);
  e.val_acc = accuracy(out.yhat, ds.labels, ds.val_mask);
  e.test_acc = accuracy(out.yhat, ds.labels, ds.test_mask);
  e.val_loss = mean_cross_entropy(out.yhat, ds.labels, ds.val_mask);
  e.logits = std::move(out.logits);
  return e;
}

/// Full-batch training with Adam and early stopping on validation accuracy.
///
/// Initial parameters and the per-epoch dropout seeds come from two streams
/// derived from cfg.seed, so a run is a pure function of (kind, data, K,
/// hidden, cfg).
inline TrainResult train(ModelKind kind, const Dataset& ds, int layers, Index hidden, const TrainConfig& cfg) {
  cfg.validate();
  if (mask_count(ds.train_mask) == 0) throw DataError("train: empty training mask");
  if (mask_count(ds.val_mask) == 0) throw DataError("train: empty validation mask");
  const Network net(kind, ds.graph, model_features(ds, cfg), layers);
  const double alpha = is_adagnn(kind) ? cfg.alpha : 0.0;
  const ForwardOptions fopt{kind == ModelKind::sgc ? 0.0 : cfg.dropout, cfg.dropout_intermediate};
  const AdamHyper hyper{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps};

  Rng init_rng(cfg.seed);
  Rng epoch_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  ModelParams p = ModelParams::init(kind, model_dims(ds, layers, hidden), init_rng);
  AdamState adam = AdamState::for_params(p);

  TrainResult res;
  std::optional<Evaluation> best;
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      ForwardOutput fwd = net.forward(p, Mode::train, epoch_rng.bits(), fopt);
      const LossBreakdown loss = total_loss(fwd.yhat, ds.labels, ds.train_mask, p, alpha, cfg.beta);
      res.clamped_probabilities += loss.clamped;
      rec.train_loss = loss.total();
      if (!std::isfinite(rec.train_loss)) throw DivergenceError(epoch, "training loss is not finite");
      const ModelParams grad = net.backward(p, fwd, ds.labels, ds.train_mask, alpha, cfg.beta);
      adam_step(adam, p, grad, hyper);
      Evaluation ev = evaluate(net, p, ds);
      rec.val_loss = ev.val_loss;
      rec.val_acc = ev.val_acc;
      res.history.push_back(rec);
      if (!best || ev.val_acc > best->val_acc || (ev.val_acc == best->val_acc && ev.val_loss < best->val_loss)) {
        best = std::move(ev);
        res.params = p;
        res.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    } catch (const NumericError& e) {
      throw DivergenceError(epoch, e.what());
    }
    if (since_best >= cfg.patience) break;
  }
  res.eval = std::move(*best);
  return res;
}

inline void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,train_loss,val_loss,val_acc\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.val_acc);
    out << buf;
  }
}

}  // namespace adagnn
