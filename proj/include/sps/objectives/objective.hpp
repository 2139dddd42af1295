#pragma once

#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sps/error.hpp"
#include "sps/random.hpp"
#include "sps/vector.hpp"

namespace sps {

enum class ObjectiveKind { logistic, quadratic, absolute };

inline std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::logistic: return "logistic";
    case ObjectiveKind::quadratic: return "quadratic";
    case ObjectiveKind::absolute: return "absolute";
  }
  return "unknown";
}

/// How the stepsize obtains the batch floor it subtracts from f_S(x).
struct LowerBoundPolicy {
  enum class Kind { zero, exact, constant };
  Kind kind = Kind::zero;
  double value = 0.0;  // used by Kind::constant

  static LowerBoundPolicy zero() { return {Kind::zero, 0.0}; }
  static LowerBoundPolicy exact() { return {Kind::exact, 0.0}; }
  static LowerBoundPolicy constant(double c) { return {Kind::constant, c}; }
};

inline std::string to_string(const LowerBoundPolicy& p) {
  switch (p.kind) {
    case LowerBoundPolicy::Kind::zero: return "zero";
    case LowerBoundPolicy::Kind::exact: return "exact";
    case LowerBoundPolicy::Kind::constant: return "constant";
  }
  return "unknown";
}

struct CurvatureInfo {
  double L_max = 0.0;
  double mu_min = 0.0;
  std::vector<double> L;   // per component
  std::vector<double> mu;  // per component
};

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double grad_norm = 0.0;
  double tolerance = 0.0;
  std::string method;
  std::optional<std::vector<double>> component_minima;  // f_i^*, when closed-form
};

/// Minimal surface every finite-sum objective provides. Batch quantities are
/// arithmetic means over the members of S (plus any regularizer).
template <typename T>
concept FiniteSumObjective = requires(const T& obj, const MiniBatch& s, const Vector& x,
                                      std::size_t i) {
  { obj.size() } -> std::convertible_to<std::size_t>;
  { obj.dim() } -> std::convertible_to<std::size_t>;
  { obj.kind() } -> std::same_as<ObjectiveKind>;
  { obj.batch_value(s, x) } -> std::convertible_to<double>;
  { obj.batch_grad(s, x) } -> std::convertible_to<Vector>;
  { obj.batch_value_grad(s, x) } -> std::same_as<std::pair<double, Vector>>;
  { obj.full_value(x) } -> std::convertible_to<double>;
  { obj.full_grad(x) } -> std::convertible_to<Vector>;
  { obj.exact_batch_minimum(s) } -> std::same_as<std::optional<double>>;
  { obj.exact_minimum_available(i) } -> std::convertible_to<bool>;
  { obj.nonnegative() } -> std::convertible_to<bool>;
};

namespace detail {

inline void check_batch(const MiniBatch& s, std::size_t n) {
  require(s.size() > 0, ErrorCode::invalid_argument, "empty mini-batch");
  for (std::size_t i : s) {
    if (i >= n) {
      throw Error(ErrorCode::index_out_of_range,
                  "component index " + std::to_string(i) + " >= n=" + std::to_string(n));
    }
  }
}

inline void check_point(const Vector& x, std::size_t d) {
  if (static_cast<std::size_t>(x.size()) != d) {
    throw Error(ErrorCode::dimension_mismatch,
                "point has dimension " + std::to_string(x.size()) + ", objective has " +
                    std::to_string(d));
  }
}

}  // namespace detail

/// A value l_S <= f_S^* according to `policy`.
template <FiniteSumObjective Obj>
double lower_bound(const Obj& obj, const MiniBatch& s, const LowerBoundPolicy& policy) {
  switch (policy.kind) {
    case LowerBoundPolicy::Kind::zero:
      require(obj.nonnegative(), ErrorCode::configuration,
              "zero lower bound requested but the objective is not certified non-negative");
      return 0.0;
    case LowerBoundPolicy::Kind::exact: {
      auto m = obj.exact_batch_minimum(s);
      if (!m) {
        throw Error(ErrorCode::exact_unavailable,
                    "no closed-form batch minimum for " + to_string(obj.kind()) +
                        " objective with batch size " + std::to_string(s.size()));
      }
      return *m;
    }
    case LowerBoundPolicy::Kind::constant: {
      if (auto m = obj.exact_batch_minimum(s); m && policy.value > *m) {
        throw Error(ErrorCode::configuration,
                    "constant lower bound " + std::to_string(policy.value) +
                        " exceeds the batch minimum " + std::to_string(*m));
      }
      return policy.value;
    }
  }
  return 0.0;
}

/// True when `policy` can be served for every batch of size `batch_size`.
template <FiniteSumObjective Obj>
bool lower_bound_available(const Obj& obj, std::size_t batch_size, const LowerBoundPolicy& policy) {
  switch (policy.kind) {
    case LowerBoundPolicy::Kind::zero: return obj.nonnegative();
    case LowerBoundPolicy::Kind::exact: return obj.exact_minimum_available(batch_size);
    case LowerBoundPolicy::Kind::constant: return true;
  }
  return false;
}

}  // namespace sps
