#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "sps/objectives/objective.hpp"

namespace sps {

/// Non-smooth test family f_i(x) = ||x - s_i||_1. `batch_grad` returns the
/// subgradient with sign(0) = 0.
class AbsoluteObjective {
 public:
  explicit AbsoluteObjective(std::vector<Vector> shifts) : shifts_(std::move(shifts)) {
    require(!shifts_.empty(), ErrorCode::invalid_argument, "absolute objective needs n >= 1");
    d_ = static_cast<std::size_t>(shifts_.front().size());
    require(d_ > 0, ErrorCode::invalid_argument, "dimension must be positive");
    for (const auto& s : shifts_) {
      require(static_cast<std::size_t>(s.size()) == d_, ErrorCode::dimension_mismatch,
              "all shifts must share a dimension");
    }
  }

  /// Scalar convenience constructor: f_i(x) = |x - s_i| on the real line.
  static AbsoluteObjective scalar(const std::vector<double>& shifts) {
    std::vector<Vector> v;
    v.reserve(shifts.size());
    for (double s : shifts) v.push_back(Vector::Constant(1, s));
    return AbsoluteObjective(std::move(v));
  }

  std::size_t size() const noexcept { return shifts_.size(); }
  std::size_t dim() const noexcept { return d_; }
  ObjectiveKind kind() const noexcept { return ObjectiveKind::absolute; }
  const std::vector<Vector>& shifts() const noexcept { return shifts_; }

  double batch_value(const MiniBatch& s, const Vector& x) const {
    detail::check_batch(s, size());
    detail::check_point(x, d_);
    double total = 0.0;
    for (std::size_t i : s) total += (x - shifts_[i]).lpNorm<1>();
    return total / static_cast<double>(s.size());
  }

  Vector batch_grad(const MiniBatch& s, const Vector& x) const { return batch_value_grad(s, x).second; }

  std::pair<double, Vector> batch_value_grad(const MiniBatch& s, const Vector& x) const {
    detail::check_batch(s, size());
    detail::check_point(x, d_);
    double total = 0.0;
    Vector g = Vector::Zero(static_cast<Eigen::Index>(d_));
    for (std::size_t i : s) {
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double r = x[j] - shifts_[i][j];
        total += std::abs(r);
        g[j] += (r > 0.0) - (r < 0.0);
      }
    }
    const double count = static_cast<double>(s.size());
    return {total / count, g / count};
  }

  double full_value(const Vector& x) const { return batch_value(MiniBatch::full(size()), x); }
  Vector full_grad(const Vector& x) const { return batch_grad(MiniBatch::full(size()), x); }

  /// Coordinate-wise (lower) median of the batch shifts minimizes f_S.
  Vector batch_minimizer(const MiniBatch& s) const {
    detail::check_batch(s, size());
    Vector out(static_cast<Eigen::Index>(d_));
    std::vector<double> col(s.size());
    for (Eigen::Index j = 0; j < out.size(); ++j) {
      for (std::size_t k = 0; k < s.size(); ++k) col[k] = shifts_[s[k]][j];
      auto mid = col.begin() + static_cast<std::ptrdiff_t>((col.size() - 1) / 2);
      std::nth_element(col.begin(), mid, col.end());
      out[j] = *mid;
    }
    return out;
  }

  std::optional<double> exact_batch_minimum(const MiniBatch& s) const {
    if (s.size() == 1) {
      detail::check_batch(s, size());
      return 0.0;
    }
    return batch_value(s, batch_minimizer(s));
  }

  bool exact_minimum_available(std::size_t) const noexcept { return true; }
  bool nonnegative() const noexcept { return true; }

  /// Uniform bound on subgradient norms, sqrt(d).
  double lipschitz() const noexcept { return std::sqrt(static_cast<double>(d_)); }

 private:
  std::vector<Vector> shifts_;
  std::size_t d_ = 0;
};

}  // namespace sps
