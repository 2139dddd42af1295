#pragma once

#include <cstddef>
#include <vector>

#include "sps/objectives/absolute.hpp"
#include "sps/objectives/quadratic.hpp"
#include "sps/random.hpp"

namespace sps {

/// n random quadratics in R^d with H_i = A_i A_i^T / (3d), A_i in R^{d x 3d}
/// standard Gaussian, floors f_i^* = f_floor and standard normal offsets
/// (a single shared offset when `interpolated`).
inline QuadraticObjective make_random_quadratics(RngStream& rng, std::size_t d, std::size_t n,
                                            bool interpolated, double f_floor) {
  require(d >= 1 && n >= 1, ErrorCode::invalid_argument, "make_random_quadratics: need d, n >= 1");
  const auto dd = static_cast<Eigen::Index>(d);
  std::vector<Matrix> hs;
  std::vector<Vector> offsets;
  hs.reserve(n);
  offsets.reserve(n);
  Matrix a(dd, 3 * dd);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.normal();
    Matrix h = a * a.transpose() / (3.0 * static_cast<double>(d));
    hs.push_back(0.5 * (h + h.transpose()));
  }
  if (interpolated) {
    const Vector shared = rng.normal_vector(dd);
    offsets.assign(n, shared);
  } else {
    for (std::size_t i = 0; i < n; ++i) offsets.push_back(rng.normal_vector(dd));
  }
  return QuadraticObjective(std::move(hs), std::move(offsets), std::vector<double>(n, f_floor));
}

/// f_i(x) = (a_i / 2)(x - x_i)^2 + f_i on the real line.
inline QuadraticObjective make_quadratic_1d(const std::vector<double>& curvatures,
                                            const std::vector<double>& offsets,
                                            const std::vector<double>& floors) {
  require(curvatures.size() == offsets.size() && offsets.size() == floors.size(),
          ErrorCode::dimension_mismatch, "make_quadratic_1d: length mismatch");
  std::vector<Matrix> hs;
  std::vector<Vector> xs;
  for (std::size_t i = 0; i < curvatures.size(); ++i) {
    require(curvatures[i] >= 0.0, ErrorCode::invalid_argument, "curvature must be non-negative");
    hs.push_back(Matrix::Constant(1, 1, curvatures[i]));
    xs.push_back(Vector::Constant(1, offsets[i]));
  }
  return QuadraticObjective(std::move(hs), std::move(xs), floors);
}

/// f_1 = (x - 1)^2, f_2 = (1/2)(x + 1)^2: minimizer 1/3, offset mean 0.
inline QuadraticObjective make_counterexample_1d() {
  return make_quadratic_1d({2.0, 1.0}, {1.0, -1.0}, {0.0, 0.0});
}

/// n scalar shifts drawn uniformly on [-spread, spread].
inline AbsoluteObjective make_shifted_absolute(RngStream& rng, std::size_t n, double spread) {
  require(n >= 1, ErrorCode::invalid_argument, "make_shifted_absolute: need n >= 1");
  std::vector<double> s(n);
  for (auto& v : s) v = rng.uniform(-spread, spread);
  return AbsoluteObjective::scalar(s);
}

}  // namespace sps
