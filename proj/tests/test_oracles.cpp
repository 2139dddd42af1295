#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sps/objectives/generators.hpp"
#include "sps/objectives/reference.hpp"
#include "sps/oracles.hpp"
#include "sps/steppers.hpp"

using sps::LinearRecursion;
using sps::Matrix;
using sps::Vector;

TEST(VariationOfConstants, ScalarCases) {
  const std::size_t k = 7;
  const std::vector<double> ones(k, 1.0);
  EXPECT_DOUBLE_EQ(sps::variation_of_constants(LinearRecursion::scalar(ones, ones, 0.0), k)[0], 7.0);
  std::vector<double> eps{0.5, -1.0, 2.0, 3.0, 4.0, 5.0, 6.25};
  EXPECT_DOUBLE_EQ(sps::variation_of_constants(LinearRecursion::scalar(std::vector<double>(k, 0.0), eps, 9.0), k)[0],
                   6.25);
  EXPECT_DOUBLE_EQ(sps::variation_of_constants(LinearRecursion::scalar(ones, ones, 3.0), 0)[0], 3.0);
}

TEST(VariationOfConstants, MatchesDirectRecursion) {
  sps::RngStream rng(11);
  LinearRecursion rec;
  rec.z0 = rng.normal_vector(3);
  for (int j = 0; j < 40; ++j) {
    Matrix a(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = 0.4 * rng.normal();
    rec.A.push_back(a);
    rec.eps.push_back(rng.normal_vector(3));
  }
  Vector z = rec.z0;
  for (std::size_t k = 0; k <= rec.A.size(); ++k) {
    EXPECT_LT((sps::variation_of_constants(rec, k) - z).norm(), 1e-12 * (1.0 + z.norm())) << "k=" << k;
    if (k < rec.A.size()) z = rec.A[k] * z + rec.eps[k];
  }
}

TEST(VariationOfConstants, RejectsBadInput) {
  auto rec = LinearRecursion::scalar({1.0, 1.0}, {1.0}, 0.0);
  EXPECT_THROW(sps::variation_of_constants(rec, 1), sps::Error);
  rec = LinearRecursion::scalar({1.0}, {1.0}, 0.0);
  EXPECT_THROW(sps::variation_of_constants(rec, 2), sps::Error);
}

TEST(BiasVariance, ClosedForm) {
  EXPECT_DOUBLE_EQ(sps::sps_bias_variance(99, 1.0), 0.01);
  EXPECT_EQ(sps::sps_bias_variance(5, 0.0), 0.0);
  EXPECT_THROW(sps::sps_bias_variance(1, -1.0), sps::Error);
}

TEST(BiasVariance, ExactConditionalRecursion) {
  // One step of SPS with c_k = (k+1)/2 and exact floors, averaged over both
  // components of the counterexample (offset mean 0, second moment 1).
  const auto obj = sps::make_counterexample_1d();
  ASSERT_DOUBLE_EQ(sps::offset_second_moment(obj), 1.0);
  sps::StepperConfig cfg;
  cfg.method = sps::Method::sps_max;
  cfg.c_schedule = sps::CSchedule::linear_half;
  cfg.lower_bound = sps::LowerBoundPolicy::exact();
  auto st = sps::make_state(cfg, 1);
  for (std::size_t k : {0, 1, 2, 9, 99}) {
    st.k = k;
    for (double x : {-1.5, 0.2, 4.0}) {
      double e = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        const auto r = sps::sps_max_step(st, obj, sps::MiniBatch::single(i), Vector::Constant(1, x));
        e += 0.5 * r->x_next[0] * r->x_next[0];
      }
      const double kk = static_cast<double>(k);
      const double expected = std::pow(kk / (kk + 1.0), 2) * x * x + 1.0 / ((kk + 1.0) * (kk + 1.0));
      EXPECT_NEAR(e, expected, 1e-13 * (1.0 + expected));
    }
  }
}

TEST(BiasFixedPoint, Counterexample) {
  const auto fp = sps::bias_fixed_point(sps::make_counterexample_1d());
  EXPECT_DOUBLE_EQ(fp.sps_limit, 0.0);
  EXPECT_DOUBLE_EQ(fp.minimizer, 1.0 / 3.0);
}

TEST(BiasFixedPoint, OtherCurvatures) {
  auto fp = sps::bias_fixed_point(sps::make_quadratic_1d({3.0, 1.0}, {1.0, -1.0}, {0.0, 0.0}));
  EXPECT_DOUBLE_EQ(fp.sps_limit, 0.0);
  EXPECT_DOUBLE_EQ(fp.minimizer, 0.5);
  fp = sps::bias_fixed_point(sps::make_quadratic_1d({2.0, 2.0, 2.0}, {1.0, 2.0, 6.0}, {0.0, 0.0, 0.0}));
  EXPECT_DOUBLE_EQ(fp.sps_limit, 3.0);
  EXPECT_DOUBLE_EQ(fp.minimizer, 3.0);
}

TEST(BiasFixedPoint, MinimizerMatchesReference) {
  const auto obj = sps::make_quadratic_1d({0.5, 4.0, 1.5}, {2.0, -0.5, 1.0}, {0.0, 0.0, 0.0});
  const auto ref = sps::solve_reference(obj, 1e-12);
  EXPECT_NEAR(sps::bias_fixed_point(obj).minimizer, ref.x_star[0], 1e-12);
}

TEST(RecursionBound, Examples) {
  auto r = sps::bounded_recursion_check(5.0, 0.5, 1.0, 10000);
  EXPECT_DOUBLE_EQ(r.bound, 5.0);
  EXPECT_LE(r.max_observed, r.bound);
  r = sps::bounded_recursion_check(0.1, 0.5, 1.0, 10000);
  EXPECT_DOUBLE_EQ(r.bound, 2.0);
  EXPECT_LE(r.max_observed, r.bound);
  EXPECT_GT(r.max_observed, 1.9);
}

TEST(RecursionBound, RandomParameters) {
  sps::RngStream rng(21);
  for (int t = 0; t < 500; ++t) {
    const double z0 = std::exp(rng.uniform(-5.0, 5.0));
    const double a = rng.uniform(1e-3, 1.0);
    const double b = std::exp(rng.uniform(-5.0, 5.0));
    const auto r = sps::bounded_recursion_check(z0, a, b, 2000);
    EXPECT_LE(r.max_observed, r.bound);
  }
}

TEST(RecursionBound, RejectsBadParameters) {
  EXPECT_THROW(sps::bounded_recursion_check(0.0, 0.5, 1.0, 10), sps::Error);
  EXPECT_THROW(sps::bounded_recursion_check(1.0, 1.5, 1.0, 10), sps::Error);
  EXPECT_THROW(sps::bounded_recursion_check(1.0, 0.5, 0.0, 10), sps::Error);
}

TEST(DMaxBound, Cases) {
  sps::CurvatureInfo c;
  c.L_max = 4.0;
  c.mu_min = 1.0;
  const Vector x0 = Vector::Constant(2, 3.0);
  const Vector xs = Vector::Zero(2);
  EXPECT_DOUBLE_EQ(sps::d_max_bound(c, x0, xs, 10.0, 1.0, 0.0), 18.0);
  // denom = min(1/8, 10) = 1/8; 2 * 1 * 10 * 1 * 8 = 160.
  EXPECT_DOUBLE_EQ(sps::d_max_bound(c, x0, xs, 10.0, 1.0, 1.0), 160.0);
  c.mu_min = 0.0;
  EXPECT_THROW(sps::d_max_bound(c, x0, xs, 10.0, 1.0, 1.0), sps::Error);
}

TEST(Binomial, Values) {
  EXPECT_EQ(sps::binomial(5, 2), 10u);
  EXPECT_EQ(sps::binomial(20, 10), 184756u);
  EXPECT_EQ(sps::binomial(3, 4), 0u);
  EXPECT_EQ(sps::binomial(7, 0), 1u);
  EXPECT_EQ(sps::binomial(1000, 500), std::numeric_limits<std::size_t>::max());
}

TEST(Sigma2, Counterexample) {
  const auto obj = sps::make_counterexample_1d();
  const Vector xs = Vector::Constant(1, 1.0 / 3.0);
  const auto st = sps::estimate_sigma2(obj, xs, 1, sps::LowerBoundPolicy::zero(), sps::EstimationMode::enumerate());
  ASSERT_TRUE(st.sigma2_B);
  EXPECT_NEAR(*st.sigma2_B, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(st.sigma2_hat_B, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(st.sigma2_hat_B_max, 8.0 / 9.0, 1e-15);
  EXPECT_EQ(st.batches, 2u);
  EXPECT_FALSE(st.max_is_lower_estimate);
  // The full batch has a single subset whose floor is f^* itself.
  const auto full = sps::estimate_sigma2(obj, xs, 2, sps::LowerBoundPolicy::exact(), sps::EstimationMode::enumerate());
  EXPECT_NEAR(*full.sigma2_B, 0.0, 1e-15);
}

TEST(Sigma2, InterpolatedIsZero) {
  sps::RngStream gen(31, 0xda7a);
  const auto obj = sps::make_random_quadratics(gen, 4, 12, true, 0.0);
  const auto ref = sps::solve_reference(obj, 1e-12);
  for (std::size_t b : {1, 3}) {
    const auto st = sps::estimate_sigma2(obj, ref.x_star, b, sps::LowerBoundPolicy::exact(),
                                         sps::EstimationMode::enumerate());
    EXPECT_NEAR(*st.sigma2_B, 0.0, 1e-12);
    EXPECT_NEAR(st.sigma2_hat_B_max, 0.0, 1e-12);
  }
}

TEST(Sigma2, ZeroPolicyEqualsOptimalValue) {
  sps::RngStream gen(32, 0xda7a);
  const auto obj = sps::make_random_quadratics(gen, 3, 8, false, 0.0);
  const auto ref = sps::solve_reference(obj, 1e-12);
  const auto st = sps::estimate_sigma2(obj, ref.x_star, 2, sps::LowerBoundPolicy::zero(),
                                       sps::EstimationMode::enumerate());
  EXPECT_NEAR(st.sigma2_hat_B, obj.full_value(ref.x_star), 1e-12);
  EXPECT_EQ(st.batches, 28u);
  EXPECT_LE(*st.sigma2_B, st.sigma2_hat_B + 1e-12);
}

TEST(Sigma2, SingletonEnumerationMatchesDirectAverage) {
  sps::RngStream gen(33, 0xda7a);
  const auto obj = sps::make_random_quadratics(gen, 3, 9, false, 0.4);
  const auto ref = sps::solve_reference(obj, 1e-12);
  double direct = 0.0;
  for (std::size_t i = 0; i < obj.size(); ++i) direct += *obj.exact_batch_minimum(sps::MiniBatch::single(i));
  direct = obj.full_value(ref.x_star) - direct / static_cast<double>(obj.size());
  const auto st = sps::estimate_sigma2(obj, ref.x_star, 1, sps::LowerBoundPolicy::exact(),
                                       sps::EstimationMode::enumerate());
  EXPECT_NEAR(*st.sigma2_B, direct, 1e-12);
}

TEST(Sigma2, MonteCarloAgreesWithEnumeration) {
  sps::RngStream gen(34, 0xda7a);
  const auto obj = sps::make_random_quadratics(gen, 3, 10, false, 0.0);
  const auto ref = sps::solve_reference(obj, 1e-12);
  const std::size_t b = 3;
  const auto exact = sps::estimate_sigma2(obj, ref.x_star, b, sps::LowerBoundPolicy::exact(),
                                          sps::EstimationMode::enumerate());
  // Spread of the per-batch minima gives the Monte Carlo standard error.
  double mean = 0.0, sq = 0.0;
  std::size_t count = 0;
  sps::RngStream rng(35);
  for (int t = 0; t < 20000; ++t) {
    const double v = *obj.exact_batch_minimum(sps::sample_batch(rng, obj.size(), b));
    mean += v;
    sq += v * v;
    ++count;
  }
  mean /= static_cast<double>(count);
  const double sd = std::sqrt(sq / static_cast<double>(count) - mean * mean);
  const std::size_t m = 10000;
  const auto mc = sps::estimate_sigma2(obj, ref.x_star, b, sps::LowerBoundPolicy::exact(),
                                       sps::EstimationMode::monte_carlo(m, 7));
  EXPECT_TRUE(mc.max_is_lower_estimate);
  EXPECT_EQ(mc.batches, m);
  EXPECT_NEAR(*mc.sigma2_B, *exact.sigma2_B, 3.0 * sd / std::sqrt(static_cast<double>(m)));
  EXPECT_LE(mc.sigma2_hat_B_max, exact.sigma2_hat_B_max + 1e-15);
}

TEST(Sigma2, EnumerationCap) {
  sps::RngStream gen(36, 0xda7a);
  const auto obj = sps::make_random_quadratics(gen, 2, 30, false, 0.0);
  EXPECT_THROW(sps::estimate_sigma2(obj, Vector::Zero(2), 15, sps::LowerBoundPolicy::zero(),
                                    sps::EstimationMode::enumerate(1000)),
               sps::Error);
}

TEST(GammaMoment, Identity) {
  EXPECT_DOUBLE_EQ(sps::gamma_moment_identity(10, 2.0), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(sps::gamma_moment_identity(1, 3.5), 1.0);
  EXPECT_THROW(sps::gamma_moment_identity(0, 1.0), sps::Error);
  EXPECT_THROW(sps::gamma_moment_identity(3, 0.0), sps::Error);
}

TEST(GammaMoment, SimulationAgrees) {
  sps::RngStream rng(41);
  for (double shape : {0.5, 1.0, 3.0}) {
    const auto est = sps::simulate_gamma_ratio(rng, 5, shape, 2.0, 40000);
    EXPECT_NEAR(est.mean, sps::gamma_moment_identity(5, shape), 4.0 * est.std_error) << "shape=" << shape;
  }
}
