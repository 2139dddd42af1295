#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sps/objectives/objective.hpp"

namespace sps {

/// Sign convention of the margin inside the logistic loss.
/// standard:   log(1 + exp(-y a^T x))
/// as_printed: log(1 + exp(+y a^T x))
enum class LabelSign { standard, as_printed };

namespace detail {

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// f_i(x) = log(1 + exp(s y_i a_i^T x)) + (lambda / 2) ||x||^2, s = -1 by default.
class LogisticObjective {
 public:
  LogisticObjective(Matrix features, Vector labels, double lambda,
                    LabelSign sign = LabelSign::standard)
      : features_(std::move(features)), labels_(std::move(labels)), lambda_(lambda), sign_(sign) {
    require(features_.rows() > 0 && features_.cols() > 0, ErrorCode::invalid_argument,
            "logistic objective needs at least one datapoint and one feature");
    require(labels_.size() == features_.rows(), ErrorCode::dimension_mismatch,
            "label count does not match datapoint count");
    require(lambda_ >= 0.0, ErrorCode::invalid_argument, "lambda must be non-negative");
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
      require(labels_[i] == 1.0 || labels_[i] == -1.0, ErrorCode::invalid_argument,
              "labels must be in {-1, +1}");
    }
    require(features_.allFinite(), ErrorCode::non_finite, "non-finite feature value");
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  ObjectiveKind kind() const noexcept { return ObjectiveKind::logistic; }
  double lambda() const noexcept { return lambda_; }
  LabelSign label_sign() const noexcept { return sign_; }
  Matrix features() const { return features_; }
  const Vector& labels() const noexcept { return labels_; }

  double component_value(std::size_t i, const Vector& x) const {
    return batch_value(MiniBatch::single(i), x);
  }
  Vector component_grad(std::size_t i, const Vector& x) const {
    return batch_grad(MiniBatch::single(i), x);
  }

  double batch_value(const MiniBatch& s, const Vector& x) const {
    detail::check_batch(s, size());
    detail::check_point(x, dim());
    double loss = 0.0;
    for (std::size_t i : s) loss += detail::softplus(margin(i, x));
    return loss / static_cast<double>(s.size()) + 0.5 * lambda_ * x.squaredNorm();
  }

  Vector batch_grad(const MiniBatch& s, const Vector& x) const { return batch_value_grad(s, x).second; }

  std::pair<double, Vector> batch_value_grad(const MiniBatch& s, const Vector& x) const {
    detail::check_batch(s, size());
    detail::check_point(x, dim());
    const double sgn = sign_factor();
    double loss = 0.0;
    Vector g = Vector::Zero(x.size());
    for (std::size_t i : s) {
      const auto row = features_.row(static_cast<Eigen::Index>(i));
      const double m = sgn * labels_[static_cast<Eigen::Index>(i)] * row.dot(x);
      loss += detail::softplus(m);
      g.noalias() += (detail::sigmoid(m) * sgn * labels_[static_cast<Eigen::Index>(i)]) * row.transpose();
    }
    const double count = static_cast<double>(s.size());
    g /= count;
    g += lambda_ * x;
    return {loss / count + 0.5 * lambda_ * x.squaredNorm(), std::move(g)};
  }

  double full_value(const Vector& x) const {
    detail::check_point(x, dim());
    const Vector m = sign_factor() * labels_.cwiseProduct(features_ * x);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) loss += detail::softplus(m[i]);
    return loss / static_cast<double>(size()) + 0.5 * lambda_ * x.squaredNorm();
  }

  Vector full_grad(const Vector& x) const {
    detail::check_point(x, dim());
    const double sgn = sign_factor();
    const Vector m = sgn * labels_.cwiseProduct(features_ * x);
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) w[i] = detail::sigmoid(m[i]) * sgn * labels_[i];
    Vector g = features_.transpose() * w / static_cast<double>(size());
    g += lambda_ * x;
    return g;
  }

  /// (1/n) sum_i sigma'(m_i) a_i a_i^T + lambda I.
  Matrix full_hessian(const Vector& x) const {
    detail::check_point(x, dim());
    const Vector m = sign_factor() * labels_.cwiseProduct(features_ * x);
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double s = detail::sigmoid(m[i]);
      w[i] = s * (1.0 - s);
    }
    Matrix h = features_.transpose() * w.asDiagonal() * features_ / static_cast<double>(size());
    h.diagonal().array() += lambda_;
    return h;
  }

  /// Closed-form f_i^*: the minimizer lies on the ray spanned by a_i, which
  /// reduces the problem to a scalar root solve of lambda * t = sigma(-t q).
  double component_minimum(std::size_t i) const {
    require(i < size(), ErrorCode::index_out_of_range, "component index out of range");
    const double q = features_.row(static_cast<Eigen::Index>(i)).squaredNorm();
    if (q == 0.0) return std::log(2.0);
    if (lambda_ == 0.0) return 0.0;  // infimum, approached as t -> infinity
    // h(t) = lambda t - sigma(-t q) is increasing with h(0) < 0 < h(1/lambda).
    double lo = 0.0, hi = 1.0 / lambda_;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double s = detail::sigmoid(-t * q);
      const double h = lambda_ * t - s;
      if (h > 0.0) hi = t; else lo = t;
      const double dh = lambda_ + q * s * (1.0 - s);
      double next = t - h / dh;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-17 * std::max(1.0, t)) { t = next; break; }
      t = next;
    }
    return detail::softplus(-t * q) + 0.5 * lambda_ * t * t * q;
  }

  /// f_S^* has a closed form only for singleton batches.
  std::optional<double> exact_batch_minimum(const MiniBatch& s) const {
    detail::check_batch(s, size());
    if (s.size() != 1) return std::nullopt;
    return component_minimum(s[0]);
  }

  bool exact_minimum_available(std::size_t batch_size) const noexcept { return batch_size == 1; }
  bool nonnegative() const noexcept { return true; }

  /// L_i = ||a_i||^2 / 4 + lambda, mu_i = lambda.
  CurvatureInfo curvature() const {
    CurvatureInfo info;
    info.L.resize(size());
    info.mu.assign(size(), lambda_);
    info.L_max = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      info.L[i] = features_.row(static_cast<Eigen::Index>(i)).squaredNorm() / 4.0 + lambda_;
      info.L_max = std::max(info.L_max, info.L[i]);
    }
    info.mu_min = lambda_;
    return info;
  }

  /// Smoothness constant of the averaged objective, lambda_max(A^T A) / 4n + lambda.
  double average_smoothness() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(features_.transpose() * features_,
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() / (4.0 * static_cast<double>(size())) + lambda_;
  }

 private:
  double sign_factor() const noexcept { return sign_ == LabelSign::standard ? -1.0 : 1.0; }
  double margin(std::size_t i, const Vector& x) const {
    const auto idx = static_cast<Eigen::Index>(i);
    return sign_factor() * labels_[idx] * features_.row(idx).dot(x);
  }

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> features_;
  Vector labels_;
  double lambda_;
  LabelSign sign_;
};

}  // namespace sps
