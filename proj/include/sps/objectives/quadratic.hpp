#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sps/objectives/objective.hpp"

namespace sps {

/// f_i(x) = 1/2 (x - x_i)^T H_i (x - x_i) + f_i^*, with H_i symmetric PSD.
class QuadraticObjective {
 public:
  QuadraticObjective(std::vector<Matrix> curvatures, std::vector<Vector> offsets,
                     std::vector<double> floors)
      : H_(std::move(curvatures)), offsets_(std::move(offsets)), floors_(std::move(floors)) {
    require(!H_.empty(), ErrorCode::invalid_argument, "quadratic objective needs n >= 1");
    require(offsets_.size() == H_.size() && floors_.size() == H_.size(),
            ErrorCode::dimension_mismatch, "curvatures, offsets and floors must have length n");
    d_ = static_cast<std::size_t>(H_.front().rows());
    require(d_ > 0, ErrorCode::invalid_argument, "dimension must be positive");
    for (std::size_t i = 0; i < H_.size(); ++i) {
      require(static_cast<std::size_t>(H_[i].rows()) == d_ &&
                  static_cast<std::size_t>(H_[i].cols()) == d_ &&
                  static_cast<std::size_t>(offsets_[i].size()) == d_,
              ErrorCode::dimension_mismatch, "component " + std::to_string(i) + " has wrong shape");
      require(H_[i].isApprox(H_[i].transpose(), 1e-12), ErrorCode::invalid_argument,
              "curvature matrix " + std::to_string(i) + " is not symmetric");
      require(H_[i].allFinite() && offsets_[i].allFinite() && std::isfinite(floors_[i]),
              ErrorCode::non_finite, "non-finite data in component " + std::to_string(i));
    }
    shared_offset_ = std::all_of(offsets_.begin(), offsets_.end(),
                                 [&](const Vector& o) { return o == offsets_.front(); });
    precompute_full();
  }

  std::size_t size() const noexcept { return H_.size(); }
  std::size_t dim() const noexcept { return d_; }
  ObjectiveKind kind() const noexcept { return ObjectiveKind::quadratic; }
  const std::vector<Matrix>& curvatures() const noexcept { return H_; }
  const std::vector<Vector>& offsets() const noexcept { return offsets_; }
  const std::vector<double>& floors() const noexcept { return floors_; }
  /// All x_i equal: every batch shares the minimizer (interpolation).
  bool interpolated() const noexcept { return shared_offset_; }

  double component_value(std::size_t i, const Vector& x) const {
    detail::check_point(x, d_);
    const Vector r = x - offsets_[i];
    return 0.5 * r.dot(H_[i] * r) + floors_[i];
  }
  Vector component_grad(std::size_t i, const Vector& x) const {
    detail::check_point(x, d_);
    return H_[i] * (x - offsets_[i]);
  }

  double batch_value(const MiniBatch& s, const Vector& x) const {
    detail::check_batch(s, size());
    detail::check_point(x, d_);
    double total = 0.0;
    Vector r(static_cast<Eigen::Index>(d_));
    Vector hr(static_cast<Eigen::Index>(d_));
    for (std::size_t i : s) {
      r = x - offsets_[i];
      hr.noalias() = H_[i] * r;
      total += 0.5 * r.dot(hr) + floors_[i];
    }
    return total / static_cast<double>(s.size());
  }

  Vector batch_grad(const MiniBatch& s, const Vector& x) const { return batch_value_grad(s, x).second; }

  std::pair<double, Vector> batch_value_grad(const MiniBatch& s, const Vector& x) const {
    detail::check_batch(s, size());
    detail::check_point(x, d_);
    double total = 0.0;
    Vector g = Vector::Zero(static_cast<Eigen::Index>(d_));
    Vector r(static_cast<Eigen::Index>(d_));
    Vector hr(static_cast<Eigen::Index>(d_));
    for (std::size_t i : s) {
      r = x - offsets_[i];
      hr.noalias() = H_[i] * r;
      total += 0.5 * r.dot(hr) + floors_[i];
      g += hr;
    }
    const double m = static_cast<double>(s.size());
    g /= m;
    return {total / m, std::move(g)};
  }

  /// Uses f(x) = f^* + 1/2 (x - x^*)^T Hbar (x - x^*) when the averaged
  /// curvature is invertible; this keeps suboptimality free of cancellation.
  double full_value(const Vector& x) const {
    detail::check_point(x, d_);
    if (full_min_) {
      const Vector r = x - full_min_->first;
      return full_min_->second + 0.5 * r.dot(H_avg_ * r);
    }
    return batch_value(MiniBatch::full(size()), x);
  }

  Vector full_grad(const Vector& x) const {
    detail::check_point(x, d_);
    return H_avg_ * x - b_avg_;
  }

  /// (x_S^*, f_S^*) from (sum_S H_i) x = sum_S H_i x_i.
  std::pair<Vector, double> batch_optimum(const MiniBatch& s) const {
    detail::check_batch(s, size());
    const Vector& first = offsets_[s[0]];
    const bool shared = std::all_of(s.begin(), s.end(), [&](std::size_t i) { return offsets_[i] == first; });
    if (shared) {
      double f = 0.0;
      for (std::size_t i : s) f += floors_[i];
      return {first, f / static_cast<double>(s.size())};
    }
    Matrix h = Matrix::Zero(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
    Vector b = Vector::Zero(static_cast<Eigen::Index>(d_));
    for (std::size_t i : s) {
      h += H_[i];
      b += H_[i] * offsets_[i];
    }
    Vector x = solve_spd(h, b);
    return {x, batch_value(s, x)};
  }

  std::optional<double> exact_batch_minimum(const MiniBatch& s) const {
    detail::check_batch(s, size());
    if (s.size() == 1) return floors_[s[0]];
    return batch_optimum(s).second;
  }

  bool exact_minimum_available(std::size_t) const noexcept { return true; }

  bool nonnegative() const noexcept {
    return std::all_of(floors_.begin(), floors_.end(), [](double f) { return f >= 0.0; });
  }

  /// Extreme eigenvalues of each H_i.
  CurvatureInfo curvature() const {
    CurvatureInfo info;
    info.L.resize(size());
    info.mu.resize(size());
    for (std::size_t i = 0; i < size(); ++i) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(H_[i], Eigen::EigenvaluesOnly);
      info.mu[i] = std::max(0.0, es.eigenvalues().minCoeff());
      info.L[i] = es.eigenvalues().maxCoeff();
    }
    info.L_max = *std::max_element(info.L.begin(), info.L.end());
    info.mu_min = *std::min_element(info.mu.begin(), info.mu.end());
    return info;
  }

  const Matrix& average_curvature() const noexcept { return H_avg_; }
  /// Full-batch minimizer and value, when the averaged curvature is invertible.
  const std::optional<std::pair<Vector, double>>& full_minimum() const noexcept { return full_min_; }

 private:
  static Vector solve_spd(const Matrix& h, const Vector& b) {
    Eigen::LDLT<Matrix> ldlt(h);
    const double scale = h.cwiseAbs().maxCoeff();
    const auto& dvec = ldlt.vectorD();
    const bool singular = ldlt.info() != Eigen::Success || scale == 0.0 ||
                          dvec.minCoeff() <= 1e-13 * scale;
    if (singular) throw Error(ErrorCode::singular_system, "batch curvature sum is singular");
    Vector x = ldlt.solve(b);
    // One step of iterative refinement.
    x += ldlt.solve(b - h * x);
    return x;
  }

  void precompute_full() {
    const auto dd = static_cast<Eigen::Index>(d_);
    H_avg_ = Matrix::Zero(dd, dd);
    b_avg_ = Vector::Zero(dd);
    for (std::size_t i = 0; i < size(); ++i) {
      H_avg_ += H_[i];
      b_avg_ += H_[i] * offsets_[i];
    }
    H_avg_ /= static_cast<double>(size());
    b_avg_ /= static_cast<double>(size());
    try {
      auto opt = batch_optimum(MiniBatch::full(size()));
      full_min_ = std::move(opt);
    } catch (const Error&) {
      full_min_.reset();
    }
  }

  std::vector<Matrix> H_;
  std::vector<Vector> offsets_;
  std::vector<double> floors_;
  std::size_t d_ = 0;
  bool shared_offset_ = false;
  Matrix H_avg_;
  Vector b_avg_;
  std::optional<std::pair<Vector, double>> full_min_;
};

}  // namespace sps
