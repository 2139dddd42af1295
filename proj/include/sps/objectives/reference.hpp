#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sps/objectives/absolute.hpp"
#include "sps/objectives/logistic.hpp"
#include "sps/objectives/quadratic.hpp"

namespace sps {

/// Full-batch gradient descent with stepsize 1/L until ||grad f|| <= tol.
template <FiniteSumObjective Obj>
ReferenceSolution gradient_descent_reference(const Obj& obj, double smoothness, double tol,
                                             Vector x0, std::size_t max_iter = 1'000'000) {
  require(tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  require(smoothness > 0.0, ErrorCode::invalid_argument, "smoothness constant must be positive");
  Vector x = std::move(x0);
  Vector g = obj.full_grad(x);
  double gn = g.norm();
  std::size_t it = 0;
  for (; it < max_iter && gn > tol; ++it) {
    x -= g / smoothness;
    g = obj.full_grad(x);
    gn = g.norm();
  }
  if (gn > tol) {
    throw Error(ErrorCode::not_converged,
                "gradient descent reached " + std::to_string(max_iter) +
                    " iterations with gradient norm " + std::to_string(gn));
  }
  return ReferenceSolution{x, obj.full_value(x), gn, tol, "gradient_descent", std::nullopt};
}

/// Damped Newton on the full logistic objective.
inline ReferenceSolution newton_reference(const LogisticObjective& obj, double tol,
                                          std::size_t max_iter = 200) {
  require(tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  Vector x = Vector::Zero(static_cast<Eigen::Index>(obj.dim()));
  double f = obj.full_value(x);
  Vector g = obj.full_grad(x);
  for (std::size_t it = 0; it < max_iter && g.norm() > tol; ++it) {
    const Matrix h = obj.full_hessian(x);
    Eigen::LDLT<Matrix> ldlt(h);
    Vector dir = -ldlt.solve(g);
    double slope = g.dot(dir);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || slope >= 0.0) {
      dir = -g;
      slope = -g.squaredNorm();
    }
    double t = 1.0;
    Vector trial = x + dir;
    double ft = obj.full_value(trial);
    // Close to the optimum the Armijo test is dominated by rounding in f, so
    // the full Newton step is taken unconditionally there.
    const bool local = g.norm() < 1e-6;
    while (!local && ft > f + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      trial = x + t * dir;
      ft = obj.full_value(trial);
    }
    x = std::move(trial);
    f = ft;
    g = obj.full_grad(x);
  }
  const double gn = g.norm();
  if (gn > tol) {
    throw Error(ErrorCode::not_converged,
                "Newton reached " + std::to_string(max_iter) + " iterations with gradient norm " +
                    std::to_string(gn));
  }
  return ReferenceSolution{x, f, gn, tol, "newton", std::nullopt};
}

inline ReferenceSolution solve_reference(const LogisticObjective& obj, double tol) {
  ReferenceSolution ref = [&] {
    try {
      return newton_reference(obj, tol);
    } catch (const Error&) {
      return gradient_descent_reference(obj, obj.average_smoothness(), tol,
                                        Vector::Zero(static_cast<Eigen::Index>(obj.dim())));
    }
  }();
  std::vector<double> minima(obj.size());
  for (std::size_t i = 0; i < obj.size(); ++i) minima[i] = obj.component_minimum(i);
  ref.component_minima = std::move(minima);
  return ref;
}

inline ReferenceSolution solve_reference(const QuadraticObjective& obj, double tol) {
  require(tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  ReferenceSolution ref;
  if (const auto& m = obj.full_minimum()) {
    ref.x_star = m->first;
    ref.f_star = m->second;
    ref.grad_norm = obj.full_grad(ref.x_star).norm();
    ref.method = "linear_solve";
    ref.tolerance = tol;
    if (ref.grad_norm > tol) {
      throw Error(ErrorCode::not_converged,
                  "linear solve left gradient norm " + std::to_string(ref.grad_norm));
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(obj.average_curvature(), Eigen::EigenvaluesOnly);
    ref = gradient_descent_reference(obj, es.eigenvalues().maxCoeff(), tol,
                                     Vector::Zero(static_cast<Eigen::Index>(obj.dim())));
  }
  ref.component_minima = obj.floors();
  return ref;
}

inline ReferenceSolution solve_reference(const AbsoluteObjective& obj, double tol) {
  require(tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  const MiniBatch all = MiniBatch::full(obj.size());
  ReferenceSolution ref;
  ref.x_star = obj.batch_minimizer(all);
  ref.f_star = obj.batch_value(all, ref.x_star);
  ref.grad_norm = 0.0;  // 0 lies in the subdifferential at a median
  ref.tolerance = tol;
  ref.method = "median";
  ref.component_minima = std::vector<double>(obj.size(), 0.0);
  return ref;
}

}  // namespace sps
