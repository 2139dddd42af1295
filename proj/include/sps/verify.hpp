#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sps/oracles.hpp"
#include "sps/runner.hpp"

namespace sps {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

inline std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

inline double rel_err(const Vector& a, const Vector& b) {
  const double denom = b.norm();
  return denom == 0.0 ? a.norm() : (a - b).norm() / denom;
}

}  // namespace verify_detail

/// DecSPS stepsize stays inside [min{1/(2 c_k L_max), c0 gamma_b / c_k}, c0 gamma_b / c_k]
/// and never increases, on random strongly convex quadratics and a logistic problem.
inline CriterionResult check_stepsize_sandwich(std::size_t iters = 10'000, std::size_t seeds = 10) {
  CriterionResult r{1, "DecSPS stepsize sandwich and monotonicity", true, "", 0.0};
  double worst_lower = std::numeric_limits<double>::infinity();
  double worst_upper = std::numeric_limits<double>::infinity();
  std::size_t increases = 0, steps = 0;
  StepperConfig cfg;
  cfg.method = Method::decsps;
  cfg.lower_bound = LowerBoundPolicy::zero();

  auto run_problem = [&](const auto& obj, std::size_t batch) {
    const double l_max = obj.curvature().L_max;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      RngStream rng = batch_stream(seed);
      double prev = std::numeric_limits<double>::infinity();
      run_trajectory(obj, cfg, batch, iters, initial_point(seed, obj.dim(), 1.0), rng,
                     [&](std::size_t k, const Vector&, const StepResult& s) {
                       const double c_k = scaling(cfg, k);
                       const double upper = cfg.c0 * cfg.gamma_b / c_k;
                       const double lower = std::min(1.0 / (2.0 * c_k * l_max), upper);
                       worst_lower = std::min(worst_lower, s.gamma - lower);
                       worst_upper = std::min(worst_upper, upper - s.gamma);
                       if (s.gamma > prev) ++increases;
                       prev = s.gamma;
                       ++steps;
                     });
    }
  };
  for (std::uint64_t p = 0; p < 10; ++p) {
    RngStream gen(100 + p, 0xda7a);
    run_problem(make_random_quadratics(gen, 10, 20, false, 0.0), p % 2 == 0 ? 1 : 4);
  }
  RngStream gen(7, 0xda7a);
  run_problem(make_logistic(make_synthetic(gen, 200, 20), 1e-3, LabelSign::standard), 5);

  r.passed = worst_lower >= -1e-12 && worst_upper >= -1e-12 && increases == 0;
  std::ostringstream os;
  os << steps << " steps; min(gamma - lower) = " << worst_lower << ", min(upper - gamma) = " << worst_upper
     << ", increases = " << increases;
  r.detail = os.str();
  return r;
}

/// DecSPS-NS on a mean of shifted absolute values: c0 gamma_l / c_k <= gamma_k <= c0 gamma_b / c_k
/// with no tolerance, and gamma_k non-increasing.
inline CriterionResult check_ns_sandwich(std::size_t iters = 10'000) {
  CriterionResult r{2, "DecSPS-NS stepsize sandwich (exact)", true, "", 0.0};
  std::size_t violations = 0, steps = 0;
  RngStream gen(11, 0xda7a);
  const AbsoluteObjective obj = make_shifted_absolute(gen, 25, 2.0);
  for (CSchedule sched : {CSchedule::sqrt, CSchedule::linear_half}) {
    for (std::size_t batch : {std::size_t{1}, std::size_t{5}}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        StepperConfig cfg;
        cfg.method = Method::decsps_ns;
        cfg.c_schedule = sched;
        cfg.gamma_ell = 1e-3;
        cfg.gamma_b = 10.0;
        cfg.c0 = 1.0;
        RngStream rng = batch_stream(seed);
        double prev = std::numeric_limits<double>::infinity();
        const double c0 = scaling(cfg, 0);
        run_trajectory(obj, cfg, batch, iters, initial_point(seed, 1, 5.0), rng,
                       [&](std::size_t k, const Vector&, const StepResult& s) {
                         const double c_k = scaling(cfg, k);
                         const double lower = c0 * cfg.gamma_ell / c_k;
                         const double upper = c0 * cfg.gamma_b / c_k;
                         if (!(lower <= s.gamma && s.gamma <= upper) || s.gamma > prev) ++violations;
                         prev = s.gamma;
                         ++steps;
                       });
      }
    }
  }
  r.passed = violations == 0 && steps > 0;
  r.detail = std::to_string(steps) + " steps, " + std::to_string(violations) + " violations";
  return r;
}

/// On f_1 = (x-1)^2, f_2 = (1/2)(x+1)^2: SPS with c_k = (k+1)/2 settles at the
/// offset mean 0, DecSPS at the minimizer 1/3.
inline CriterionResult check_bias_fixed_point(std::size_t seeds = 1000, std::size_t iters = 10'000) {
  CriterionResult r{3, "SPS bias fixed point vs DecSPS on the counterexample", true, "", 0.0};
  const QuadraticObjective obj = make_counterexample_1d();
  const BiasFixedPoint fp = bias_fixed_point(obj);
  auto mean_final = [&](const StepperConfig& cfg) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      RngStream rng = batch_stream(seed);
      sum += run_trajectory(obj, cfg, 1, iters, initial_point(seed, 1, 1.0), rng,
                            [](std::size_t, const Vector&, const StepResult&) {})
                 .x_final[0];
    }
    return sum / static_cast<double>(seeds);
  };
  StepperConfig sps;
  sps.method = Method::sps_max;
  sps.c_schedule = CSchedule::linear_half;
  StepperConfig dec;
  dec.method = Method::decsps;
  const double m_sps = mean_final(sps);
  const double m_dec = mean_final(dec);
  r.passed = std::abs(m_sps - fp.sps_limit) <= 0.05 && std::abs(m_dec - fp.minimizer) <= 0.05 &&
             std::abs(fp.minimizer - 1.0 / 3.0) < 1e-15 && fp.sps_limit == 0.0;
  r.detail = "SPS mean " + verify_detail::fmt("%.5f", m_sps) + " (target 0), DecSPS mean " +
             verify_detail::fmt("%.5f", m_dec) + " (target 1/3)";
  return r;
}

/// Monte-Carlo E|x^k - x~|^2 for SPS with c_k = (k+1)/2 on offsets +-1 equals 1/k.
inline CriterionResult check_bias_variance(std::size_t runs = 100'000) {
  CriterionResult r{4, "SPS bias variance E|x^k - x~|^2 = 1/k", true, "", 0.0};
  const QuadraticObjective obj = make_counterexample_1d();
  const double m2 = offset_second_moment(obj);
  const double centre = bias_fixed_point(obj).sps_limit;
  StepperConfig cfg;
  cfg.method = Method::sps_max;
  cfg.c_schedule = CSchedule::linear_half;
  const std::size_t ks[] = {10, 100, 1000};
  double sums[3] = {0.0, 0.0, 0.0};
  for (std::uint64_t seed = 0; seed < runs; ++seed) {
    RngStream rng = batch_stream(seed);
    auto out = run_trajectory(
        obj, cfg, 1, 1000, initial_point(seed, 1, 1.0), rng,
        [&](std::size_t k, const Vector& x, const StepResult&) {
          const double e = (x[0] - centre) * (x[0] - centre);
          if (k == 10) sums[0] += e;
          else if (k == 100) sums[1] += e;
        },
        ZeroGradientPolicy::hold);
    sums[2] += (out.x_final[0] - centre) * (out.x_final[0] - centre);
  }
  std::ostringstream os;
  for (int i = 0; i < 3; ++i) {
    const double mc = sums[i] / static_cast<double>(runs);
    const double exact = sps_bias_variance(ks[i] - 1, m2);
    const double rel = std::abs(mc - exact) / exact;
    if (!(rel <= 0.05) || std::abs(exact - 1.0 / static_cast<double>(ks[i])) > 1e-15) r.passed = false;
    os << (i ? "; " : "") << "k=" << ks[i] << ": " << verify_detail::fmt("%.5g", mc) << " vs "
       << verify_detail::fmt("%.5g", exact) << " (rel " << verify_detail::fmt("%.2e", rel) << ")";
  }
  r.detail = os.str();
  return r;
}

/// Closed-form solution of z_{k+1} = A_k z_k + eps_k against direct iteration.
inline CriterionResult check_variation_of_constants(std::size_t instances = 1000) {
  CriterionResult r{5, "variation-of-constants closed form", true, "", 0.0};
  RngStream rng(5, 0);
  double worst = 0.0;
  for (std::size_t t = 0; t < instances; ++t) {
    const bool scalar = t % 2 == 0;
    const Eigen::Index d = scalar ? 1 : 1 + static_cast<Eigen::Index>(rng.uniform_index(4));
    const std::size_t len = 1 + rng.uniform_index(60);
    LinearRecursion rec;
    rec.z0 = rng.normal_vector(d);
    for (std::size_t j = 0; j < len; ++j) {
      Matrix a(d, d);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1.0, 1.0);
      if (!scalar) a /= std::sqrt(static_cast<double>(d));
      rec.A.push_back(a);
      rec.eps.push_back(rng.normal_vector(d));
    }
    Vector z = rec.z0;
    for (std::size_t k = 0; k <= len; ++k) {
      if (k == len || rng.uniform01() < 0.1) {
        worst = std::max(worst, verify_detail::rel_err(variation_of_constants(rec, k), z));
      }
      if (k < len) z = rec.A[k] * z + rec.eps[k];
    }
  }
  r.passed = worst <= 1e-12;
  r.detail = "max relative error " + verify_detail::fmt("%.3e", worst);
  return r;
}

/// z^{k+1} = (1 - a/sqrt(k+1)) z^k + b/sqrt(k+1) never exceeds max{z^0, b/a}.
inline CriterionResult check_recursion_bound(std::size_t triples = 1000, std::size_t iters = 10'000) {
  CriterionResult r{6, "bounded recursion max{z0, b/a}", true, "", 0.0};
  RngStream rng(6, 0);
  std::size_t violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < triples; ++t) {
    const double z0 = std::exp(rng.uniform(-5.0, 5.0));
    const double a = 1.0 - rng.uniform01();  // (0, 1]
    const double b = std::exp(rng.uniform(-5.0, 5.0));
    const auto check = bounded_recursion_check(z0, a, b, iters);
    const double excess = (check.max_observed - check.bound) / check.bound;
    worst = std::max(worst, excess);
    if (check.max_observed > check.bound) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations; max relative excess " + verify_detail::fmt("%.3e", worst);
  return r;
}

/// E[sum a_i^2 / (sum a_i)^2] for iid Gamma(k, rate) equals (k+1)/(k n+1) for every rate.
inline CriterionResult check_gamma_moment(std::size_t samples = 1'000'000) {
  CriterionResult r{7, "Gamma moment identity (k+1)/(kn+1), rate invariant", true, "", 0.0};
  std::ostringstream os;
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (std::size_t n : {std::size_t{5}, std::size_t{50}}) {
    for (double shape : {1.0, 2.0}) {
      const double target = gamma_moment_identity(n, shape);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (double rate : {0.5, 1.0, 4.0}) {
        RngStream rng(7, ++stream);
        const auto est = simulate_gamma_ratio(rng, n, shape, rate, samples);
        const double rel = std::abs(est.mean - target) / target;
        worst = std::max(worst, rel);
        lo = std::min(lo, est.mean);
        hi = std::max(hi, est.mean);
      }
      const double spread = (hi - lo) / target;
      worst = std::max(worst, spread);
      os << "n=" << n << " k=" << shape << ": target " << verify_detail::fmt("%.5f", target)
         << ", rate spread " << verify_detail::fmt("%.2e", spread) << "; ";
    }
  }
  r.passed = worst <= 0.02;
  os << "max relative deviation " << verify_detail::fmt("%.3e", worst);
  r.detail = os.str();
  return r;
}

/// With interpolation and all f_i^* = 0, SPS_max with exact f_S^* and with l = 0
/// produce bit-identical iterates under the same seeds.
inline CriterionResult check_interpolation_coincidence(std::size_t seeds = 10, std::size_t iters = 1000) {
  CriterionResult r{8, "SPS_max and SPS_max^l coincide under interpolation", true, "", 0.0};
  RngStream gen(8, 0xda7a);
  const QuadraticObjective obj = make_random_quadratics(gen, 20, 50, true, 0.0);
  std::size_t mismatches = 0, compared = 0;
  for (std::size_t batch : {std::size_t{1}, std::size_t{5}}) {
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      auto trajectory = [&](LowerBoundPolicy policy) {
        StepperConfig cfg;
        cfg.method = Method::sps_max;
        cfg.gamma_b = 2.0;
        cfg.lower_bound = policy;
        std::vector<double> xs;
        RngStream rng = batch_stream(seed);
        auto out = run_trajectory(obj, cfg, batch, iters, initial_point(seed, obj.dim(), 1.0), rng,
                                  [&](std::size_t, const Vector& x, const StepResult& s) {
                                    xs.insert(xs.end(), x.data(), x.data() + x.size());
                                    xs.push_back(s.gamma);
                                  });
        xs.insert(xs.end(), out.x_final.data(), out.x_final.data() + out.x_final.size());
        return xs;
      };
      const auto exact = trajectory(LowerBoundPolicy::exact());
      const auto zero = trajectory(LowerBoundPolicy::zero());
      ++compared;
      if (exact.size() != zero.size() ||
          std::memcmp(exact.data(), zero.data(), exact.size() * sizeof(double)) != 0) {
        ++mismatches;
      }
    }
  }
  r.passed = mismatches == 0;
  r.detail = std::to_string(compared) + " trajectory pairs, " + std::to_string(mismatches) + " differ";
  return r;
}

/// Non-interpolated random quadratics with f_i^* = 1: the SPS_max plateau with
/// exact f_S^* is no higher than with l = 0.
inline CriterionResult check_neighborhood_ordering(std::size_t seeds = 10, std::size_t iters = 10'000) {
  CriterionResult r{9, "neighbourhood ordering: exact f_S^* plateau <= l=0 plateau", true, "", 0.0};
  ProblemSpec spec;
  spec.kind = ProblemKind::quadratic;
  spec.d = 100;
  spec.n = 100;
  spec.floor = 1.0;
  spec.interpolated = false;
  spec.seed = 9;
  const auto obj = std::get<QuadraticObjective>(build_problem(spec));
  const auto ref = solve_reference(obj, 1e-12);
  const std::size_t tail = iters - iters / 10;
  auto plateau = [&](LowerBoundPolicy policy) {
    StepperConfig cfg;
    cfg.method = Method::sps_max;
    cfg.gamma_b = 2.0;
    cfg.c_sps = 1.0;
    cfg.lower_bound = policy;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      RngStream rng = batch_stream(seed);
      auto out = run_trajectory(obj, cfg, 1, iters, initial_point(seed, obj.dim(), 1.0), rng,
                                [&](std::size_t k, const Vector& x, const StepResult&) {
                                  if (k < tail) return;
                                  sum += obj.full_value(x) - ref.f_star;
                                  ++count;
                                });
      sum += obj.full_value(out.x_final) - ref.f_star;
      ++count;
    }
    return sum / static_cast<double>(count);
  };
  const double exact = plateau(LowerBoundPolicy::exact());
  const double zero = plateau(LowerBoundPolicy::zero());
  r.passed = exact <= zero;
  r.detail = "plateau exact " + verify_detail::fmt("%.4g", exact) + ", l=0 " + verify_detail::fmt("%.4g", zero);
  return r;
}

/// Least-squares slope of log(f(xbar^K) - f^*) against log K on K in [1e2, 1e4]
/// for DecSPS on synthetic logistic regression.
inline CriterionResult check_sublinear_rate(std::size_t seeds = 5) {
  CriterionResult r{10, "DecSPS sublinear rate on synthetic logistic", true, "", 0.0};
  ProblemSpec spec;
  spec.kind = ProblemKind::synthetic;
  spec.n = 500;
  spec.d = 100;
  spec.lambda = 1e-4;
  spec.seed = 10;
  const auto obj = std::get<LogisticObjective>(build_problem(spec));
  const auto ref = solve_reference(obj, 1e-12);
  std::vector<std::size_t> ks;
  for (int i = 0; i <= 20; ++i) {
    const auto k = static_cast<std::size_t>(std::llround(std::pow(10.0, 2.0 + i / 10.0)));
    if (ks.empty() || ks.back() != k) ks.push_back(k);
  }
  const std::size_t iters = ks.back();
  std::vector<double> mean_sub(ks.size(), 0.0);
  StepperConfig cfg;
  cfg.method = Method::decsps;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    RngStream rng = batch_stream(seed);
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(obj.dim()));
    std::size_t next = 0;
    run_trajectory(obj, cfg, 20, iters, initial_point(seed, obj.dim(), 1.0), rng,
                   [&](std::size_t k, const Vector& x, const StepResult&) {
                     sum += x;
                     if (next < ks.size() && k + 1 == ks[next]) {
                       mean_sub[next++] +=
                           (obj.full_value(sum / static_cast<double>(k + 1)) - ref.f_star) / static_cast<double>(seeds);
                     }
                   });
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(ks.size());
  bool positive = true;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(mean_sub[i] > 0.0)) positive = false;
    const double lx = std::log(static_cast<double>(ks[i]));
    const double ly = std::log(std::max(mean_sub[i], std::numeric_limits<double>::min()));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  r.passed = positive && slope >= -1.2 && slope <= -0.3;
  r.detail = "slope " + verify_detail::fmt("%.4f", slope) + " over " + std::to_string(ks.size()) +
             " K values; f(xbar^K)-f* from " + verify_detail::fmt("%.3e", mean_sub.front()) + " to " +
             verify_detail::fmt("%.3e", mean_sub.back());
  return r;
}

/// DecSPS with c_k = sqrt(k+1) on strongly convex quadratics keeps
/// ||x^k - x^*||^2 <= D^2_max along every trajectory.
inline CriterionResult check_bounded_iterates(std::size_t seeds = 100, std::size_t iters = 10'000) {
  CriterionResult r{11, "DecSPS iterates stay within D^2_max", true, "", 0.0};
  std::size_t violations = 0, steps = 0;
  double worst_ratio = 0.0;
  struct Case { double floor; std::size_t batch; LowerBoundPolicy policy; double gamma_b; };
  const Case cases[] = {{0.0, 1, LowerBoundPolicy::zero(), 10.0}, {0.5, 3, LowerBoundPolicy::exact(), 2.0}};
  std::uint64_t problem_seed = 110;
  for (const auto& c : cases) {
    RngStream gen(++problem_seed, 0xda7a);
    const QuadraticObjective obj = make_random_quadratics(gen, 5, 10, false, c.floor);
    const auto ref = solve_reference(obj, 1e-13);
    const auto stats = estimate_sigma2(obj, ref.x_star, c.batch, c.policy, EstimationMode::enumerate());
    StepperConfig cfg;
    cfg.method = Method::decsps;
    cfg.c_schedule = CSchedule::sqrt;
    cfg.c0 = 1.0;
    cfg.gamma_b = c.gamma_b;
    cfg.lower_bound = c.policy;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      const Vector x0 = initial_point(seed, obj.dim(), 1.0);
      const double bound = d_max_bound(obj.curvature(), x0, ref.x_star, cfg.gamma_b, cfg.c0, stats.sigma2_hat_B_max);
      auto observe = [&](const Vector& x) {
        const double dist = (x - ref.x_star).squaredNorm();
        worst_ratio = std::max(worst_ratio, dist / bound);
        if (dist > bound) ++violations;
        ++steps;
      };
      RngStream rng = batch_stream(seed);
      auto out = run_trajectory(obj, cfg, c.batch, iters, x0, rng,
                                [&](std::size_t, const Vector& x, const StepResult&) { observe(x); });
      observe(out.x_final);
    }
  }
  r.passed = violations == 0;
  r.detail = std::to_string(steps) + " iterates, " + std::to_string(violations) +
             " violations; max ||x-x*||^2 / D^2_max = " + verify_detail::fmt("%.3e", worst_ratio);
  return r;
}

/// Analytic batch gradients against central finite differences (h = 1e-5)
/// at 100 random points per objective kind.
inline CriterionResult check_gradients(std::size_t points = 100) {
  CriterionResult r{12, "analytic gradients vs central finite differences", true, "", 0.0};
  RngStream rng(12, 0);
  std::ostringstream os;
  double overall = 0.0;
  auto probe = [&](const auto& obj, const char* name, auto&& usable) {
    double worst = 0.0;
    for (std::size_t t = 0; t < points; ++t) {
      const std::size_t b = 1 + rng.uniform_index(obj.size());
      const MiniBatch s = t % 10 == 0 ? MiniBatch::full(obj.size()) : sample_batch(rng, obj.size(), b);
      Vector x = rng.normal_vector(static_cast<Eigen::Index>(obj.dim()), 2.0);
      while (!usable(s, x)) x = rng.normal_vector(static_cast<Eigen::Index>(obj.dim()), 2.0);
      const Vector fd = finite_diff_grad([&](const Vector& y) { return obj.batch_value(s, y); }, x);
      worst = std::max(worst, verify_detail::rel_err(fd, obj.batch_grad(s, x)));
    }
    os << name << " " << verify_detail::fmt("%.2e", worst) << "; ";
    overall = std::max(overall, worst);
  };
  auto anywhere = [](const MiniBatch&, const Vector&) { return true; };

  RngStream gen(12, 0xda7a);
  probe(make_logistic(make_synthetic(gen, 60, 8), 1e-2, LabelSign::standard), "logistic", anywhere);
  probe(make_logistic(make_synthetic(gen, 60, 8), 0.0, LabelSign::as_printed), "logistic(as_printed)", anywhere);
  probe(make_random_quadratics(gen, 6, 15, false, 0.3), "quadratic", anywhere);

  // Finite differences are only meaningful where |x - s_i| is smooth within h.
  std::vector<Vector> shifts;
  for (int i = 0; i < 12; ++i) shifts.push_back(gen.normal_vector(4));
  const AbsoluteObjective abs_obj(shifts);
  probe(abs_obj, "absolute", [&](const MiniBatch& s, const Vector& x) {
    for (std::size_t i : s)
      if ((x - shifts[i]).cwiseAbs().minCoeff() < 1e-3) return false;
    return true;
  });

  r.passed = overall <= 1e-6;
  os << "max relative error " << verify_detail::fmt("%.3e", overall);
  r.detail = os.str();
  return r;
}

struct Criterion {
  int id;
  std::function<CriterionResult()> run;
};

inline std::vector<Criterion> acceptance_criteria() {
  return {
      {1, [] { return check_stepsize_sandwich(); }},
      {2, [] { return check_ns_sandwich(); }},
      {3, [] { return check_bias_fixed_point(); }},
      {4, [] { return check_bias_variance(); }},
      {5, [] { return check_variation_of_constants(); }},
      {6, [] { return check_recursion_bound(); }},
      {7, [] { return check_gamma_moment(); }},
      {8, [] { return check_interpolation_coincidence(); }},
      {9, [] { return check_neighborhood_ordering(); }},
      {10, [] { return check_sublinear_rate(); }},
      {11, [] { return check_bounded_iterates(); }},
      {12, [] { return check_gradients(); }},
  };
}

/// Runs the selected criteria (all when `ids` is empty), timing each one and
/// turning exceptions into failures.
inline std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {},
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> results;
  for (const auto& c : acceptance_criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.id = c.id;
      res.name = "criterion " + std::to_string(c.id);
      res.passed = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(res);
    results.push_back(std::move(res));
  }
  return results;
}

inline std::string format_result(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s criterion %2d (%.1fs) ", r.passed ? "PASS" : "FAIL", r.id, r.seconds);
  return std::string(head) + r.name + ": " + r.detail;
}

}  // namespace sps
