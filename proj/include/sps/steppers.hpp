#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "sps/objectives/objective.hpp"
#include "sps/random.hpp"
#include "sps/vector.hpp"

namespace sps {

enum class Method {
  sps_max,
  decsps,
  decsps_ns,
  sgd_constant,
  sgd_decreasing,
  adagrad_norm,
  adam,
  amsgrad,
};

/// Scaling sequence c_k.
enum class CSchedule {
  constant,     // c_k = base
  sqrt,         // c_k = base * sqrt(k + 1)
  linear_half,  // c_k = (k + 1) / 2
};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::sps_max: return "sps_max";
    case Method::decsps: return "decsps";
    case Method::decsps_ns: return "decsps_ns";
    case Method::sgd_constant: return "sgd_constant";
    case Method::sgd_decreasing: return "sgd_decreasing";
    case Method::adagrad_norm: return "adagrad_norm";
    case Method::adam: return "adam";
    case Method::amsgrad: return "amsgrad";
  }
  return "unknown";
}

inline std::string_view to_string(CSchedule s) {
  switch (s) {
    case CSchedule::constant: return "constant";
    case CSchedule::sqrt: return "sqrt";
    case CSchedule::linear_half: return "linear_half";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::sps_max, Method::decsps, Method::decsps_ns, Method::sgd_constant,
                   Method::sgd_decreasing, Method::adagrad_norm, Method::adam, Method::amsgrad}) {
    if (name == to_string(m)) return m;
  }
  if (name == "sgd") return Method::sgd_constant;
  if (name == "sgd_dec") return Method::sgd_decreasing;
  throw Error(ErrorCode::configuration, "unknown optimizer '" + std::string(name) + "'");
}

inline CSchedule parse_schedule(std::string_view name) {
  for (CSchedule s : {CSchedule::constant, CSchedule::sqrt, CSchedule::linear_half}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::configuration, "unknown c-schedule '" + std::string(name) + "'");
}

struct StepperConfig {
  Method method = Method::decsps;
  double gamma_b = 10.0;
  double gamma_ell = 1e-3;  // DecSPS-NS floor
  double c0 = 1.0;          // DecSPS / DecSPS-NS
  double c_sps = 1.0;       // SPS_max's c
  std::optional<CSchedule> c_schedule;  // unset: constant for SPS_max, sqrt otherwise
  double eta = 1.0;
  double b0 = 0.1;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  LowerBoundPolicy lower_bound = LowerBoundPolicy::zero();
};

inline CSchedule effective_schedule(const StepperConfig& cfg) {
  if (cfg.c_schedule) return *cfg.c_schedule;
  return cfg.method == Method::sps_max ? CSchedule::constant : CSchedule::sqrt;
}

/// c_k for the configured method and schedule.
inline double scaling(const StepperConfig& cfg, std::size_t k) {
  const double base = cfg.method == Method::sps_max ? cfg.c_sps : cfg.c0;
  const double kk = static_cast<double>(k);
  switch (effective_schedule(cfg)) {
    case CSchedule::constant: return base;
    case CSchedule::sqrt: return base * std::sqrt(kk + 1.0);
    case CSchedule::linear_half: return 0.5 * (kk + 1.0);
  }
  return base;
}

inline void validate(const StepperConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::configuration, std::string(name) + " must be positive and finite");
    }
  };
  switch (cfg.method) {
    case Method::sps_max:
      positive(cfg.gamma_b, "gamma_b");
      positive(cfg.c_sps, "c");
      break;
    case Method::decsps:
      positive(cfg.gamma_b, "gamma_b");
      positive(cfg.c0, "c0");
      break;
    case Method::decsps_ns:
      positive(cfg.gamma_b, "gamma_b");
      positive(cfg.c0, "c0");
      positive(cfg.gamma_ell, "gamma_ell");
      if (cfg.gamma_ell > cfg.gamma_b) {
        throw Error(ErrorCode::configuration, "gamma_ell must not exceed gamma_b");
      }
      break;
    case Method::sgd_constant:
    case Method::sgd_decreasing:
      positive(cfg.eta, "eta");
      break;
    case Method::adagrad_norm:
      positive(cfg.eta, "eta");
      positive(cfg.b0, "b0");
      break;
    case Method::adam:
    case Method::amsgrad:
      positive(cfg.eta, "eta");
      positive(cfg.epsilon, "epsilon");
      if (!(cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
        throw Error(ErrorCode::configuration, "beta2 must lie in (0, 1)");
      }
      break;
  }
}

struct StepperState {
  std::size_t k = 0;
  double gamma_prev = 0.0;   // gamma_{k-1}; gamma_b before the first step
  double c_prev = 0.0;       // c_{k-1}; c_0 before the first step
  double scaled_prev = 0.0;  // c_{k-1} * gamma_{k-1}, carried exactly
  double accumulator = 0.0;  // AdaGrad-Norm b_k^2
  Vector second_moment;      // Adam / AMSgrad v_k
  Vector second_moment_max;  // AMSgrad running max
  StepperConfig config;
};

inline StepperState make_state(const StepperConfig& cfg, std::size_t dim) {
  validate(cfg);
  StepperState st;
  st.config = cfg;
  st.c_prev = scaling(cfg, 0);
  st.gamma_prev = cfg.method == Method::sgd_constant || cfg.method == Method::sgd_decreasing ||
                          cfg.method == Method::adam || cfg.method == Method::amsgrad ||
                          cfg.method == Method::adagrad_norm
                      ? cfg.eta
                      : cfg.gamma_b;
  st.scaled_prev = st.c_prev * cfg.gamma_b;
  st.accumulator = cfg.b0 * cfg.b0;
  if (cfg.method == Method::adam || cfg.method == Method::amsgrad) {
    st.second_moment = Vector::Zero(static_cast<Eigen::Index>(dim));
    st.second_moment_max = Vector::Zero(static_cast<Eigen::Index>(dim));
  }
  return st;
}

/// x_next = x - gamma * direction. For Adam/AMSgrad the direction is the
/// preconditioned gradient and gamma is the scalar base stepsize.
struct StepResult {
  Vector x_next;
  double gamma = 0.0;
  StepperState state;
};

namespace detail {

inline StepperState advance(const StepperState& st, double gamma, double c_k, double scaled) {
  StepperState next = st;
  next.k = st.k + 1;
  next.gamma_prev = gamma;
  next.c_prev = c_k;
  next.scaled_prev = scaled;
  return next;
}

}  // namespace detail

/// SPS_max (policy exact) or SPS_max^l (any other policy):
/// gamma = min{(f_S(x) - m_S) / (c_k ||g||^2), gamma_b}.
/// Returns nullopt when the batch must be resampled: zero gradient, or
/// f_S(x) <= m_S numerically (x is a batch minimizer to working precision).
template <FiniteSumObjective Obj>
std::optional<StepResult> sps_max_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                                       const Vector& x) {
  const auto& cfg = st.config;
  auto [f, g] = obj.batch_value_grad(s, x);
  const double gn2 = norm_sq(g);
  if (gn2 == 0.0) return std::nullopt;
  const double floor = lower_bound(obj, s, cfg.lower_bound);
  const double gap = f - floor;
  if (!(gap > 0.0)) return std::nullopt;
  const double c_k = scaling(cfg, st.k);
  const double gamma = std::min(gap / (c_k * gn2), cfg.gamma_b);
  StepResult out{x - gamma * g, gamma, detail::advance(st, gamma, c_k, c_k * gamma)};
  return out;
}

/// DecSPS: gamma_k = (1/c_k) min{(f_S(x) - l_S) / ||g||^2, c_{k-1} gamma_{k-1}}.
/// The product c_k gamma_k is carried in the state so the recursion never
/// re-multiplies a rounded quotient.
template <FiniteSumObjective Obj>
std::optional<StepResult> decsps_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                                      const Vector& x) {
  const auto& cfg = st.config;
  auto [f, g] = obj.batch_value_grad(s, x);
  const double gn2 = norm_sq(g);
  if (gn2 == 0.0) return std::nullopt;
  const double gap = f - lower_bound(obj, s, cfg.lower_bound);
  if (!(gap > 0.0)) return std::nullopt;
  const double c_k = scaling(cfg, st.k);
  const double scaled = std::min(gap / gn2, st.scaled_prev);
  const double gamma = scaled / c_k;
  StepResult out{x - gamma * g, gamma, detail::advance(st, gamma, c_k, scaled)};
  return out;
}

/// DecSPS-NS: gamma_k = (1/c_k) min{max{c_0 gamma_l, (f_S(x) - l_S) / ||g||^2}, c_{k-1} gamma_{k-1}}
/// with g a subgradient.
template <FiniteSumObjective Obj>
std::optional<StepResult> decsps_ns_step(const StepperState& st, const Obj& obj,
                                         const MiniBatch& s, const Vector& x) {
  const auto& cfg = st.config;
  auto [f, g] = obj.batch_value_grad(s, x);
  const double gn2 = norm_sq(g);
  if (gn2 == 0.0) return std::nullopt;
  const double gap = f - lower_bound(obj, s, cfg.lower_bound);
  const double c_k = scaling(cfg, st.k);
  const double floor = scaling(cfg, 0) * cfg.gamma_ell;
  const double scaled = std::min(std::max(floor, gap / gn2), st.scaled_prev);
  const double gamma = scaled / c_k;
  StepResult out{x - gamma * g, gamma, detail::advance(st, gamma, c_k, scaled)};
  return out;
}

template <FiniteSumObjective Obj>
StepResult sgd_constant_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                             const Vector& x) {
  const double gamma = st.config.eta;
  return {x - gamma * obj.batch_grad(s, x), gamma, detail::advance(st, gamma, 1.0, gamma)};
}

template <FiniteSumObjective Obj>
StepResult sgd_decreasing_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                               const Vector& x) {
  const double gamma = st.config.eta / std::sqrt(static_cast<double>(st.k) + 1.0);
  return {x - gamma * obj.batch_grad(s, x), gamma, detail::advance(st, gamma, 1.0, gamma)};
}

/// b_{k+1}^2 = b_k^2 + ||g||^2, x_next = x - (eta / b_{k+1}) g.
template <FiniteSumObjective Obj>
StepResult adagrad_norm_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                             const Vector& x) {
  const Vector g = obj.batch_grad(s, x);
  StepperState next = detail::advance(st, 0.0, 1.0, 0.0);
  next.accumulator = st.accumulator + norm_sq(g);
  const double gamma = st.config.eta / std::sqrt(next.accumulator);
  next.gamma_prev = gamma;
  next.scaled_prev = gamma;
  return {x - gamma * g, gamma, std::move(next)};
}

/// Adam without momentum: bias-corrected second moment, fixed eta,
/// x_next = x - eta * g / (sqrt(v_hat) + eps).
template <FiniteSumObjective Obj>
StepResult adam_nomom_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                           const Vector& x) {
  const auto& cfg = st.config;
  const Vector g = obj.batch_grad(s, x);
  StepperState next = detail::advance(st, cfg.eta, 1.0, cfg.eta);
  next.second_moment = cfg.beta2 * st.second_moment + (1.0 - cfg.beta2) * g.cwiseAbs2();
  const double correction = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.k) + 1.0);
  const Vector denom = (next.second_moment / correction).cwiseSqrt().array() + cfg.epsilon;
  return {x - cfg.eta * g.cwiseQuotient(denom), cfg.eta, std::move(next)};
}

/// AMSgrad without momentum: running elementwise max of v, no bias
/// correction, stepsize eta / sqrt(k + 1).
template <FiniteSumObjective Obj>
StepResult amsgrad_nomom_step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                              const Vector& x) {
  const auto& cfg = st.config;
  const Vector g = obj.batch_grad(s, x);
  const double gamma = cfg.eta / std::sqrt(static_cast<double>(st.k) + 1.0);
  StepperState next = detail::advance(st, gamma, 1.0, gamma);
  next.second_moment = cfg.beta2 * st.second_moment + (1.0 - cfg.beta2) * g.cwiseAbs2();
  next.second_moment_max = st.second_moment_max.cwiseMax(next.second_moment);
  const Vector denom = next.second_moment_max.cwiseSqrt().array() + cfg.epsilon;
  return {x - gamma * g.cwiseQuotient(denom), gamma, std::move(next)};
}

/// Dispatch on the configured method. nullopt means "resample the batch".
template <FiniteSumObjective Obj>
std::optional<StepResult> step(const StepperState& st, const Obj& obj, const MiniBatch& s,
                               const Vector& x) {
  switch (st.config.method) {
    case Method::sps_max: return sps_max_step(st, obj, s, x);
    case Method::decsps: return decsps_step(st, obj, s, x);
    case Method::decsps_ns: return decsps_ns_step(st, obj, s, x);
    case Method::sgd_constant: return sgd_constant_step(st, obj, s, x);
    case Method::sgd_decreasing: return sgd_decreasing_step(st, obj, s, x);
    case Method::adagrad_norm: return adagrad_norm_step(st, obj, s, x);
    case Method::adam: return adam_nomom_step(st, obj, s, x);
    case Method::amsgrad: return amsgrad_nomom_step(st, obj, s, x);
  }
  return std::nullopt;
}

/// The step taken when the direction vanishes and the batch is kept rather
/// than redrawn: x stays put, k advances, and the stepsize is the formula's
/// value with the ratio (f_S - l_S) / ||g||^2 read as +infinity.
inline StepResult hold_step(const StepperState& st, const Vector& x) {
  const auto& cfg = st.config;
  const double c_k = scaling(cfg, st.k);
  switch (cfg.method) {
    case Method::sps_max:
      return {x, cfg.gamma_b, detail::advance(st, cfg.gamma_b, c_k, c_k * cfg.gamma_b)};
    case Method::decsps:
    case Method::decsps_ns: {
      const double gamma = st.scaled_prev / c_k;
      return {x, gamma, detail::advance(st, gamma, c_k, st.scaled_prev)};
    }
    default:
      return {x, st.gamma_prev, detail::advance(st, st.gamma_prev, 1.0, st.scaled_prev)};
  }
}

/// Fails early when the method's floor cannot be served for this objective
/// and batch size (e.g. exact f_S^* for logistic batches with B > 1).
template <FiniteSumObjective Obj>
void check_compatible(const StepperConfig& cfg, const Obj& obj, std::size_t batch_size) {
  validate(cfg);
  const bool uses_floor = cfg.method == Method::sps_max || cfg.method == Method::decsps ||
                          cfg.method == Method::decsps_ns;
  if (uses_floor && !lower_bound_available(obj, batch_size, cfg.lower_bound)) {
    throw Error(ErrorCode::configuration,
                "lower-bound policy '" + to_string(cfg.lower_bound) + "' is unavailable for the " +
                    to_string(obj.kind()) + " objective with batch size " +
                    std::to_string(batch_size) +
                    (cfg.lower_bound.kind == LowerBoundPolicy::Kind::exact
                         ? " (no closed-form batch minimum exists)"
                         : ""));
  }
}

}  // namespace sps
