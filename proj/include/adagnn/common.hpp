#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace adagnn {

using Index = std::int64_t;

/// Row-major dense matrix; rows are nodes, columns are channels.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A normalized operator was requested for a node without neighbours.
class DegenerateDegreeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value showed up in a forward pass.
class NumericError : public Error {
 public:
  NumericError(int layer, const std::string& what)
      : Error("non-finite value at layer " + std::to_string(layer) + ": " + what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Malformed or missing dataset input.
class DataError : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Seeded generator with platform-independent draws (mt19937_64 output is
/// fully specified; the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t bits() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Threading
// ---------------------------------------------------------------------------

namespace detail {
inline thread_local int thread_override = 0;
}

/// Worker cap: ADAGNN_THREADS if set, otherwise hardware concurrency.
inline int max_threads() {
  if (detail::thread_override > 0) return detail::thread_override;
  static const int cap = [] {
    if (const char* env = std::getenv("ADAGNN_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  }();
  return cap;
}

/// Pins the calling thread's worker cap for the lifetime of the guard.
class ScopedThreadCap {
 public:
  explicit ScopedThreadCap(int n) : saved_(detail::thread_override) { detail::thread_override = n; }
  ~ScopedThreadCap() { detail::thread_override = saved_; }
  ScopedThreadCap(const ScopedThreadCap&) = delete;
  ScopedThreadCap& operator=(const ScopedThreadCap&) = delete;

 private:
  int saved_;
};

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is handled
/// by exactly one chunk, so per-index results do not depend on the split.
inline void parallel_for(Index n, Index work_per_item, const std::function<void(Index, Index)>& fn) {
  constexpr Index kMinWork = 1 << 16;
  const int threads = max_threads();
  if (threads <= 1 || n < 2 || n * std::max<Index>(work_per_item, 1) < kMinWork) {
    fn(0, n);
    return;
  }
  const Index chunks = std::min<Index>(threads, n);
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(chunks - 1));
  const Index step = (n + chunks - 1) / chunks;
  for (Index c = 1; c < chunks; ++c) {
    const Index b = c * step;
    const Index e = std::min(n, b + step);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(0, std::min(n, step));
}

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

/// FNV-1a, used for config and dataset fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(s.data(), s.size(), h);
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace adagnn
