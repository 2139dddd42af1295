#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "sps/error.hpp"
#include "sps/vector.hpp"

namespace sps {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. It is seeded with splitmix64(seed) xor splitmix64(splitmix64(stream)),
/// so every (seed, stream) pair gets its own reproducible substream. All
/// transforms (uniform doubles, bounded integers, normals, gammas) are
/// implemented here rather than through <random> distributions, whose
/// algorithms are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(mix(seed, stream)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  RngStream substream(std::uint64_t index) const {
    return RngStream(seed_, splitmix64(stream_ ^ 0xa0761d6478bd642fULL) + index);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n) by rejection on the top of the 64-bit range.
  std::size_t uniform_index(std::size_t n) {
    require(n > 0, ErrorCode::invalid_argument, "uniform_index: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t r = engine_();
    while (r > limit) r = engine_();
    return static_cast<std::size_t>(r % bound);
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  Vector normal_vector(Eigen::Index dim, double scale = 1.0) {
    Vector out(dim);
    for (Eigen::Index i = 0; i < dim; ++i) out[i] = scale * normal();
    return out;
  }

  /// Gamma(shape, rate) via Marsaglia–Tsang; shape < 1 uses the
  /// U^{1/shape} boost.
  double gamma(double shape, double rate = 1.0) {
    require(shape > 0.0 && rate > 0.0, ErrorCode::invalid_argument,
            "gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      double u = uniform01();
      while (u == 0.0) u = uniform01();
      return g * std::pow(u, 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double z, v;
      do {
        z = normal();
        v = 1.0 + c * z;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * z * z * z * z) return d * v / rate;
      if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed) ^ splitmix64(splitmix64(stream));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Sorted set of distinct component indices.
struct MiniBatch {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  auto begin() const noexcept { return indices.begin(); }
  auto end() const noexcept { return indices.end(); }
  std::size_t operator[](std::size_t i) const { return indices[i]; }

  static MiniBatch full(std::size_t n) {
    MiniBatch b;
    b.indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) b.indices[i] = i;
    return b;
  }
  static MiniBatch single(std::size_t i) { return MiniBatch{{i}}; }

  friend bool operator==(const MiniBatch&, const MiniBatch&) = default;
};

/// B distinct indices uniform over size-B subsets of [0, n) (Floyd's algorithm).
inline MiniBatch sample_batch(RngStream& rng, std::size_t n, std::size_t batch_size) {
  if (batch_size < 1 || batch_size > n) {
    throw Error(ErrorCode::invalid_argument,
                "sample_batch: need 1 <= B <= n, got B=" + std::to_string(batch_size) +
                    " n=" + std::to_string(n));
  }
  if (batch_size == n) return MiniBatch::full(n);
  MiniBatch out;
  out.indices.reserve(batch_size);
  if (batch_size <= 64) {
    for (std::size_t j = n - batch_size; j < n; ++j) {
      const std::size_t t = rng.uniform_index(j + 1);
      const bool taken = std::find(out.indices.begin(), out.indices.end(), t) != out.indices.end();
      out.indices.push_back(taken ? j : t);
    }
  } else {
    std::unordered_set<std::size_t> seen;
    seen.reserve(2 * batch_size);
    for (std::size_t j = n - batch_size; j < n; ++j) {
      const std::size_t t = rng.uniform_index(j + 1);
      const std::size_t pick = seen.count(t) ? j : t;
      seen.insert(pick);
      out.indices.push_back(pick);
    }
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

}  // namespace sps
