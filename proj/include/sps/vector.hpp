#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "sps/error.hpp"

namespace sps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void check_same_dim(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
}

inline double dot(const Vector& a, const Vector& b) {
  check_same_dim(a, b, "dot");
  return a.dot(b);
}

inline double norm_sq(const Vector& a) { return a.squaredNorm(); }

inline bool all_finite(const Vector& a) { return a.allFinite(); }

/// Central-difference gradient: entry i is (f(x + h e_i) - f(x - h e_i)) / 2h.
template <typename F>
Vector finite_diff_grad(F&& f, const Vector& x, double h = 1e-5) {
  require(h > 0.0, ErrorCode::invalid_argument, "finite_diff_grad: h must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::non_finite,
                  "finite_diff_grad: non-finite evaluation at coordinate " + std::to_string(i));
    }
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace sps
