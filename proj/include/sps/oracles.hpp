#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sps/objectives/objective.hpp"
#include "sps/objectives/quadratic.hpp"
#include "sps/random.hpp"
#include "sps/vector.hpp"

namespace sps {

/// z_{k+1} = A_k z_k + eps_k.
struct LinearRecursion {
  std::vector<Matrix> A;
  std::vector<Vector> eps;
  Vector z0;

  static LinearRecursion scalar(const std::vector<double>& a, const std::vector<double>& e, double z0) {
    LinearRecursion rec;
    for (double v : a) rec.A.push_back(Matrix::Constant(1, 1, v));
    for (double v : e) rec.eps.push_back(Vector::Constant(1, v));
    rec.z0 = Vector::Constant(1, z0);
    return rec;
  }
};

/// Closed form z_k = (prod_{j<k} A_j) z_0 + sum_{i<k} (prod_{j=i+1}^{k-1} A_j) eps_i,
/// products ordered with later factors on the left.
inline Vector variation_of_constants(const LinearRecursion& rec, std::size_t k) {
  require(rec.A.size() == rec.eps.size(), ErrorCode::dimension_mismatch,
          "A and eps sequences must have equal length");
  require(k <= rec.A.size(), ErrorCode::invalid_argument, "k exceeds the sequence length");
  const auto d = rec.z0.size();
  for (std::size_t j = 0; j < rec.A.size(); ++j) {
    require(rec.A[j].rows() == d && rec.A[j].cols() == d && rec.eps[j].size() == d,
            ErrorCode::dimension_mismatch, "inconsistent dimensions at index " + std::to_string(j));
  }
  Matrix suffix = Matrix::Identity(d, d);  // A_{k-1} ... A_{i+1}
  Vector forced = Vector::Zero(d);
  for (std::size_t i = k; i-- > 0;) {
    forced += suffix * rec.eps[i];
    suffix = suffix * rec.A[i];
  }
  return suffix * rec.z0 + forced;
}

/// E|x^{k+1} - x~|^2 for SPS with c_k = (k+1)/2 on 1-d quadratics with exact floors.
inline double sps_bias_variance(std::size_t k, double second_moment_offsets) {
  require(second_moment_offsets >= 0.0, ErrorCode::invalid_argument,
          "second moment of offsets must be non-negative");
  return second_moment_offsets / (static_cast<double>(k) + 1.0);
}

struct BiasFixedPoint {
  double sps_limit;  // unweighted offset mean x~
  double minimizer;  // curvature-weighted mean x^*
};

/// Limit of SPS with a decaying multiplier versus the true minimizer, for
/// 1-d quadratic finite sums.
inline BiasFixedPoint bias_fixed_point(const QuadraticObjective& obj) {
  require(obj.dim() == 1, ErrorCode::invalid_argument, "bias_fixed_point needs a 1-d quadratic");
  double mean = 0.0, weighted = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < obj.size(); ++i) {
    const double a = obj.curvatures()[i](0, 0);
    const double x = obj.offsets()[i][0];
    mean += x;
    weighted += a * x;
    weight += a;
  }
  require(weight > 0.0, ErrorCode::singular_system, "all curvatures are zero");
  return {mean / static_cast<double>(obj.size()), weighted / weight};
}

inline double offset_second_moment(const QuadraticObjective& obj) {
  const double mean = bias_fixed_point(obj).sps_limit;
  double m2 = 0.0;
  for (const auto& o : obj.offsets()) m2 += (o[0] - mean) * (o[0] - mean);
  return m2 / static_cast<double>(obj.size());
}

struct RecursionBoundCheck {
  double max_observed;
  double bound;
};

/// Runs z^{k+1} = (1 - a/sqrt(k+1)) z^k + b/sqrt(k+1) for K steps and
/// reports max_k z^k against max{z^0, b/a}. The recursion is evaluated in
/// the equivalent form z^{k+1} - b/a = (1 - a/sqrt(k+1)) (z^k - b/a), which
/// keeps rounding from carrying an iterate across b/a.
inline RecursionBoundCheck bounded_recursion_check(double z0, double a, double b, std::size_t K) {
  if (!(z0 > 0.0) || !(a > 0.0 && a <= 1.0) || !(b > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "bounded_recursion_check needs z0 > 0, 0 < a <= 1, b > 0");
  }
  const double fixed = b / a;
  double dev = z0 - fixed;
  double observed = z0;
  for (std::size_t k = 0; k < K; ++k) {
    const double r = 1.0 / std::sqrt(static_cast<double>(k) + 1.0);
    dev *= 1.0 - a * r;
    observed = std::max(observed, fixed + dev);
  }
  return {observed, std::max(z0, fixed)};
}

/// Almost-sure bound on ||x^k - x^*||^2 for DecSPS with c_k = c0 sqrt(k+1).
inline double d_max_bound(const CurvatureInfo& curvature, const Vector& x0, const Vector& x_star,
                          double gamma_b, double c0, double sigma2_hat_B_max) {
  if (!(curvature.mu_min > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "d_max_bound is undefined for mu_min = 0");
  }
  require(gamma_b > 0.0 && c0 > 0.0 && sigma2_hat_B_max >= 0.0, ErrorCode::invalid_argument,
          "d_max_bound needs gamma_b > 0, c0 > 0, sigma2_hat_B_max >= 0");
  const double initial = (x0 - x_star).squaredNorm();
  const double denom = std::min(curvature.mu_min / (2.0 * curvature.L_max), curvature.mu_min * gamma_b);
  return std::max(initial, 2.0 * c0 * gamma_b * sigma2_hat_B_max / denom);
}

struct SuboptimalityStats {
  std::optional<double> sigma2_B;  // needs exact f_S^*
  double sigma2_hat_B = 0.0;
  double sigma2_hat_B_max = 0.0;
  bool max_is_lower_estimate = false;  // true when subsets were sampled
  std::size_t batches = 0;
};

struct EstimationMode {
  enum class Kind { exact_enumeration, monte_carlo };
  Kind kind = Kind::exact_enumeration;
  std::size_t samples = 0;  // monte_carlo
  std::uint64_t seed = 0;   // monte_carlo
  std::size_t enumeration_cap = 2'000'000;

  static EstimationMode enumerate(std::size_t cap = 2'000'000) {
    return {Kind::exact_enumeration, 0, 0, cap};
  }
  static EstimationMode monte_carlo(std::size_t m, std::uint64_t seed) {
    return {Kind::monte_carlo, m, seed, 0};
  }
};

/// n choose k, saturating at SIZE_MAX.
inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double r = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  if (r > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::llround(r));
}

/// sigma^2_B = f(x^*) - E_S[f_S^*], hat sigma^2_B = f(x^*) - E_S[l_S],
/// hat sigma^2_{B,max} = max_S f_S(x^*) - l_S.
template <FiniteSumObjective Obj>
SuboptimalityStats estimate_sigma2(const Obj& obj, const Vector& x_star, std::size_t batch_size,
                                   const LowerBoundPolicy& policy, const EstimationMode& mode) {
  const std::size_t n = obj.size();
  require(batch_size >= 1 && batch_size <= n, ErrorCode::invalid_argument, "need 1 <= B <= n");
  const bool exact = obj.exact_minimum_available(batch_size);
  const double f_star = obj.full_value(x_star);

  double sum_exact = 0.0, sum_floor = 0.0, max_gap = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  auto visit = [&](const MiniBatch& s) {
    const double floor = lower_bound(obj, s, policy);
    sum_floor += floor;
    if (exact) sum_exact += *obj.exact_batch_minimum(s);
    max_gap = std::max(max_gap, obj.batch_value(s, x_star) - floor);
    ++count;
  };

  SuboptimalityStats stats;
  if (mode.kind == EstimationMode::Kind::exact_enumeration) {
    const std::size_t total = binomial(n, batch_size);
    if (total > mode.enumeration_cap) {
      throw Error(ErrorCode::invalid_argument,
                  "C(n, B) = " + std::to_string(total) + " exceeds the enumeration cap " +
                      std::to_string(mode.enumeration_cap));
    }
    MiniBatch s = MiniBatch{std::vector<std::size_t>(batch_size)};
    for (std::size_t i = 0; i < batch_size; ++i) s.indices[i] = i;
    for (;;) {
      visit(s);
      // Next combination in lexicographic order.
      std::size_t i = batch_size;
      while (i > 0 && s.indices[i - 1] == n - batch_size + i - 1) --i;
      if (i == 0) break;
      ++s.indices[i - 1];
      for (std::size_t j = i; j < batch_size; ++j) s.indices[j] = s.indices[j - 1] + 1;
    }
  } else {
    require(mode.samples >= 1, ErrorCode::invalid_argument, "monte_carlo needs m >= 1");
    RngStream rng(mode.seed, 0x5167);
    for (std::size_t m = 0; m < mode.samples; ++m) visit(sample_batch(rng, n, batch_size));
    stats.max_is_lower_estimate = true;
  }
  const double c = static_cast<double>(count);
  if (exact) stats.sigma2_B = f_star - sum_exact / c;
  stats.sigma2_hat_B = f_star - sum_floor / c;
  stats.sigma2_hat_B_max = max_gap;
  stats.batches = count;
  return stats;
}

/// E[sum a_i^2 / (sum a_i)^2] for a_i iid Gamma(shape, rate): (shape+1)/(shape n + 1).
inline double gamma_moment_identity(std::size_t n, double shape) {
  require(n >= 1 && shape > 0.0, ErrorCode::invalid_argument, "need n >= 1 and shape > 0");
  return (shape + 1.0) / (shape * static_cast<double>(n) + 1.0);
}

struct MonteCarloEstimate {
  double mean;
  double std_error;
};

/// Sampling estimate of E[sum a_i^2 / (sum a_i)^2].
inline MonteCarloEstimate simulate_gamma_ratio(RngStream& rng, std::size_t n, double shape,
                                               double rate, std::size_t samples) {
  require(samples >= 2, ErrorCode::invalid_argument, "need at least two samples");
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double total = 0.0, squares = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.gamma(shape, rate);
      total += a;
      squares += a * a;
    }
    const double r = squares / (total * total);
    sum += r;
    sum_sq += r * r;
  }
  const double m = static_cast<double>(samples);
  const double mean = sum / m;
  const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
  return {mean, std::sqrt(var / m)};
}

}  // namespace sps
