#pragma once

#include "adagnn/common.hpp"
#include "adagnn/data.hpp"
#include "adagnn/model.hpp"
#include "adagnn/optim.hpp"
#include "adagnn/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace adagnn {

/// Mean over unordered row pairs of 1 - cos(h_i, h_j). A zero row has
/// similarity 1 with another zero row and 0 with anything else.
inline double smoothness_score(const Matrix& h) {
  const Index n = h.rows();
  require(n >= 2, "smoothness_score: need at least two rows");
  Vector sum = Vector::Zero(h.cols());
  double self = 0.0;
  Index zeros = 0;
  for (Index r = 0; r < n; ++r) {
    const double norm = h.row(r).norm();
    if (norm == 0.0) {
      ++zeros;
      continue;
    }
    const Vector u = h.row(r).transpose() / norm;
    sum += u;
    self += u.squaredNorm();
  }
  // sum_{i<j} u_i.u_j = (|sum u|^2 - sum |u_i|^2) / 2
  const double nonzero_pairs = (sum.squaredNorm() - self) / 2.0;
  const double zero_pairs = static_cast<double>(zeros) * static_cast<double>(zeros - 1) / 2.0;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - (nonzero_pairs + zero_pairs) / pairs;
}

/// ||h - u u^T h||_F / ||h||_F with u the unit vector along D~^1/2 1; 0 for h = 0.
inline double collinearity_residual(const Matrix& h, const DegreeVector& deg) {
  require(deg.d.size() == h.rows(), "collinearity_residual: degree length differs from row count");
  const double total = h.norm();
  if (total == 0.0) return 0.0;
  const Vector u = stationary_direction(deg);
  const Matrix rest = h - u * (u.transpose() * h);
  return rest.norm() / total;
}

// ---------------------------------------------------------------------------
// Frequency responses
// ---------------------------------------------------------------------------

struct ResponseCurve {
  static constexpr Index kSgc = -1;
  Index channel = 0;  // kSgc for the fixed reference curve
  int layers = 0;
  std::vector<double> lambda;
  std::vector<double> response;
};

inline std::vector<double> lambda_grid(Index points) {
  if (points < 2) throw std::invalid_argument("lambda grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (Index i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = 2.0;
  return g;
}

/// Channels usable for a response curve: those that have a coefficient in
/// every layer, i.e. j < min_k len(phi_k).
inline Index response_channel_count(const ModelParams& p) {
  require(is_adagnn(p.kind), "response curves need an AdaGNN model, got " + to_string(p.kind));
  Index m = p.phi.front().size();
  for (const auto& v : p.phi) m = std::min<Index>(m, v.size());
  return m;
}

/// One curve per requested channel (all usable channels when `channels` is
/// empty), followed by the reference (1 - lambda)^K curve.
inline std::vector<ResponseCurve> export_response(const ModelParams& p, const std::vector<Index>& channels,
                                                  Index grid_points = 201) {
  const Index usable = response_channel_count(p);
  std::vector<Index> chosen = channels;
  if (chosen.empty()) {
    for (Index j = 0; j < usable; ++j) chosen.push_back(j);
  }
  const auto grid = lambda_grid(grid_points);
  const int k = p.dims.layers;
  std::vector<ResponseCurve> out;
  auto curve = [&](Index channel, const std::vector<double>& phis) {
    ResponseCurve c{channel, k, grid, {}};
    c.response.reserve(grid.size());
    for (double l : grid) c.response.push_back(freq_response(phis, l));
    out.push_back(std::move(c));
  };
  for (Index j : chosen) {
    if (j < 0 || j >= usable) {
      throw std::out_of_range("channel " + std::to_string(j) + " outside [0," + std::to_string(usable) + ")");
    }
    std::vector<double> phis;
    for (const auto& v : p.phi) phis.push_back(v[j]);
    curve(j, phis);
  }
  curve(ResponseCurve::kSgc, std::vector<double>(static_cast<std::size_t>(k), 1.0));
  return out;
}

inline void write_response_csv(const std::vector<ResponseCurve>& curves, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "lambda,channel_or_SGC,response\n";
  char buf[96];
  for (const auto& c : curves) {
    const std::string label = c.channel == ResponseCurve::kSgc ? "SGC" : std::to_string(c.channel);
    for (std::size_t i = 0; i < c.lambda.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g\n", c.lambda[i], label.c_str(), c.response[i]);
      out << buf;
    }
  }
}

// ---------------------------------------------------------------------------
// Depth sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  ModelKind kind;
  int depth;
  std::uint64_t seed;
  double test_acc;
  double smoothness;
  double seconds;
};

struct SweepFailure {
  ModelKind kind;
  int depth;
  std::uint64_t seed;
  std::string message;
};

struct SweepSummary {
  ModelKind kind;
  int depth;
  Index runs;
  double mean_acc;
  double std_acc;  // population standard deviation
  double mean_smoothness;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (kind, depth, seed)
  std::vector<SweepFailure> failures;

  std::vector<SweepSummary> summary() const {
    std::map<std::pair<int, int>, std::vector<const SweepRow*>> groups;
    for (const auto& r : rows) groups[{static_cast<int>(r.kind), r.depth}].push_back(&r);
    std::vector<SweepSummary> out;
    for (const auto& [key, g] : groups) {
      double acc = 0.0, sm = 0.0;
      for (const auto* r : g) {
        acc += r->test_acc;
        sm += r->smoothness;
      }
      const double n = static_cast<double>(g.size());
      const double mean = acc / n;
      double var = 0.0;
      for (const auto* r : g) var += (r->test_acc - mean) * (r->test_acc - mean);
      out.push_back({g.front()->kind, key.second, static_cast<Index>(g.size()), mean, std::sqrt(var / n), sm / n});
    }
    return out;
  }

  /// Mean test accuracy of one (kind, depth) group; NaN when it has no rows.
  double mean_accuracy(ModelKind kind, int depth) const {
    for (const auto& s : summary())
      if (s.kind == kind && s.depth == depth) return s.mean_acc;
    return std::nan("");
  }
};

struct SweepOptions {
  Index hidden = 128;
  TrainConfig config;
};

/// Trains every (kind, depth, seed) combination. A row that throws is
/// recorded as a failure and the sweep carries on. `trainer` has the
/// signature of `train` and exists so tests can inject failures.
template <typename Trainer>
SweepResult oversmooth_sweep(const Dataset& ds, const std::vector<ModelKind>& kinds, const std::vector<int>& depths,
                             const std::vector<std::uint64_t>& seeds, const SweepOptions& opt, Trainer&& trainer) {
  if (kinds.empty()) throw std::invalid_argument("sweep: no model kinds");
  if (depths.empty()) throw std::invalid_argument("sweep: no depths");
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
  SweepResult res;
  for (ModelKind kind : kinds) {
    for (int depth : depths) {
      for (std::uint64_t seed : seeds) {
        TrainConfig cfg = opt.config;
        cfg.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const TrainResult tr = trainer(kind, ds, depth, opt.hidden, cfg);
          const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          res.rows.push_back({kind, depth, seed, tr.eval.test_acc, smoothness_score(tr.eval.logits), secs});
        } catch (const std::exception& e) {
          res.failures.push_back({kind, depth, seed, e.what()});
        }
      }
    }
  }
  auto key = [](const SweepRow& r) { return std::make_tuple(static_cast<int>(r.kind), r.depth, r.seed); };
  std::sort(res.rows.begin(), res.rows.end(), [&](const SweepRow& a, const SweepRow& b) { return key(a) < key(b); });
  return res;
}

inline SweepResult oversmooth_sweep(const Dataset& ds, const std::vector<ModelKind>& kinds,
                                    const std::vector<int>& depths, const std::vector<std::uint64_t>& seeds,
                                    const SweepOptions& opt) {
  return oversmooth_sweep(ds, kinds, depths, seeds, opt,
                          [](ModelKind k, const Dataset& d, int layers, Index hidden, const TrainConfig& cfg) {
                            return train(k, d, layers, hidden, cfg);
                          });
}

inline void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "kind,depth,seed,test_acc,smoothness,seconds\n";
  char buf[160];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%llu,%.17g,%.17g,%.6f\n", to_string(row.kind).c_str(), row.depth,
                  static_cast<unsigned long long>(row.seed), row.test_acc, row.smoothness, row.seconds);
    out << buf;
  }
}

}  // namespace adagnn
