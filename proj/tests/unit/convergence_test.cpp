#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "addpg/convergence/convergence_lab.hpp"
#include "finite_difference.hpp"

namespace addpg::convergence {
namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

Vector random_in_ball(std::mt19937_64& rng, const Vector& center, double radius) {
  Vector d(center.size());
  do {
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = uniform(rng, -radius, radius);
  } while (d.norm() >= radius);
  return center + d;
}

TEST(QuadraticQ, ClosedFormValues) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  const Vector s = Vector::Zero(1);
  EXPECT_EQ(q.value(s, v1(2.0)), 0.0);
  EXPECT_EQ(q.gradient(s, v1(2.0))(0), 0.0);
  EXPECT_EQ(q.value(s, v1(0.0)), -4.0);
  EXPECT_EQ(q.gradient(s, v1(0.0))(0), 4.0);
  EXPECT_EQ(q.lipschitz, 2.0);
  EXPECT_EQ(q.argmax(s), v1(2.0));
  EXPECT_THROW(make_quadratic_q(0.0, v1(0.0)), Error);
  EXPECT_THROW(make_quadratic_q(-1.0, v1(0.0)), Error);
}

TEST(AnalyticFamilies, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  Vector center(3);
  center << 0.5, -1.0, 2.0;
  const Vector s = Vector::Zero(2);
  for (const AnalyticQ& q : {make_quadratic_q(0.25, center), make_log_bump_q(center)}) {
    for (int i = 0; i < 200; ++i) {
      const Vector a = random_in_ball(rng, center, 1.5);
      const Vector fd = testing::central_gradient([&](const Vector& x) { return q.value(s, x); }, a, 1e-4);
      EXPECT_LT((fd - q.gradient(s, a)).cwiseAbs().maxCoeff(), 1e-8) << q.name;
    }
  }
}

TEST(AnalyticFamilies, MidpointConcavity) {
  std::mt19937_64 rng(2);
  Vector center(2);
  center << -0.3, 0.7;
  const Vector s = Vector::Zero(1);
  struct Family {
    AnalyticQ q;
    double radius;
  };
  // The bump is concave only inside the unit ball around its peak.
  for (const Family& f : {Family{make_quadratic_q(2.0, center), 10.0}, Family{make_log_bump_q(center), 1.0}}) {
    for (int i = 0; i < 10000; ++i) {
      const Vector a = random_in_ball(rng, center, f.radius), b = random_in_ball(rng, center, f.radius);
      ASSERT_GE(f.q.value(s, 0.5 * (a + b)), 0.5 * (f.q.value(s, a) + f.q.value(s, b)) - 1e-12) << f.q.name;
    }
  }
}

TEST(IteratePolicy, StationaryStartGivesConstantTrace) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  const auto tr = iterate_policy(q, Vector::Zero(1), v1(2.0), 0.3, 50);
  ASSERT_EQ(tr.size(), 51u);
  for (const auto& a : tr.actions) EXPECT_EQ(a(0), 2.0);
  const auto rep = verify_monotone(tr, q, Vector::Zero(1), 0.3);
  EXPECT_TRUE(rep.passed(true));
  EXPECT_EQ(rep.min_slack, 0.0);
}

TEST(IteratePolicy, OptimalStepReachesPeakInOneStep) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  const auto tr = iterate_policy(q, Vector::Zero(1), v1(0.0), 0.5, 3);
  EXPECT_EQ(tr.actions[1](0), 2.0);
  EXPECT_EQ(tr.values[1], 0.0);
  EXPECT_EQ(tr.gradient_norms[1], 0.0);
}

TEST(IteratePolicy, BoundaryStepOscillates) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  const double beta = 2.0 / q.lipschitz;
  const auto tr = iterate_policy(q, Vector::Zero(1), v1(0.5), beta, 20);
  for (std::size_t t = 0; t < tr.size(); ++t) EXPECT_EQ(tr.actions[t](0), t % 2 == 0 ? 0.5 : 3.5) << t;
  for (std::size_t t = 1; t < tr.size(); ++t) EXPECT_EQ(tr.values[t], tr.values[t - 1]);
  const auto rep = verify_monotone(tr, q, Vector::Zero(1), beta);
  EXPECT_TRUE(rep.improvement_holds);
  EXPECT_FALSE(rep.gradient_vanished);
  EXPECT_FALSE(rep.summability_checked);
}

TEST(IteratePolicy, QuadraticContractionPerStep) {
  for (double c : {0.25, 1.0, 2.0}) {
    const AnalyticQ q = make_quadratic_q(c, v1(-1.0));
    for (double beta : {0.01, 0.1, 0.3}) {
      if (beta > 2.0 / q.lipschitz) continue;
      const auto tr = iterate_policy(q, Vector::Zero(1), v1(3.0), beta, 40);
      const double factor = std::abs(1.0 - 2.0 * c * beta);
      for (std::size_t t = 0; t + 1 < tr.size(); ++t) {
        const double before = std::abs(tr.actions[t](0) + 1.0);
        const double after = std::abs(tr.actions[t + 1](0) + 1.0);
        EXPECT_NEAR(after, factor * before, 1e-12 * (1.0 + before));
      }
    }
  }
}

TEST(IteratePolicy, RejectsBadArguments) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(0.0));
  EXPECT_THROW(iterate_policy(q, Vector::Zero(1), v1(0.0), 0.1, 0), Error);
  EXPECT_THROW(iterate_policy(q, Vector::Zero(1), v1(0.0), 0.0, 5), Error);
  EXPECT_THROW(iterate_policy(q, Vector::Zero(1), Vector::Zero(2), 0.1, 5), Error);
}

TEST(IteratePolicy, DivergenceCarriesStep) {
  // Far past 2/L the quadratic iteration blows up geometrically.
  const AnalyticQ q = make_quadratic_q(1.0, v1(0.0));
  try {
    iterate_policy(q, Vector::Zero(1), v1(1.0), 1e6, 1000);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.step(), 0);
    EXPECT_LT(e.step(), 1000);
  }
}

TEST(VerifyMonotone, SmallStepConvergesOnQuadratic) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  const auto tr = iterate_policy(q, Vector::Zero(1), v1(0.0), 0.01, 5000);
  const auto rep = verify_monotone(tr, q, Vector::Zero(1), 0.01);
  EXPECT_TRUE(rep.improvement_holds);
  EXPECT_LT(rep.final_gradient_norm, 1e-6);
  EXPECT_TRUE(rep.gradient_vanished);
  EXPECT_TRUE(rep.summability_checked);
  EXPECT_TRUE(rep.summability_holds);
  EXPECT_LE(rep.gradient_square_sum, rep.summability_bound);
  EXPECT_TRUE(rep.passed(true));
}

TEST(VerifyMonotone, RefusesStepBeyondBoundary) {
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  const double beta = 1.5 * (2.0 / q.lipschitz);
  const auto tr = iterate_policy(q, Vector::Zero(1), v1(0.0), beta, 10);
  EXPECT_THROW(verify_monotone(tr, q, Vector::Zero(1), beta), Error);
  EXPECT_THROW(verify_monotone(tr, q, Vector::Zero(1), 0.0), Error);
}

TEST(VerifyMonotone, ReportsViolationWithBothSides) {
  // A trace that steps downhill violates the improvement bound at t = 0.
  const AnalyticQ q = make_quadratic_q(1.0, v1(2.0));
  IterationTrace tr;
  for (double a : {1.0, 0.0}) {
    tr.actions.push_back(v1(a));
    tr.values.push_back(q.value(Vector::Zero(1), v1(a)));
    tr.gradient_norms.push_back(q.gradient(Vector::Zero(1), v1(a)).norm());
  }
  const auto rep = verify_monotone(tr, q, Vector::Zero(1), 0.1);
  EXPECT_FALSE(rep.improvement_holds);
  EXPECT_EQ(rep.failing_step, 0);
  EXPECT_DOUBLE_EQ(rep.failing_lhs, -3.0);  // Q(0) - Q(1) = -4 - (-1)
  EXPECT_DOUBLE_EQ(rep.failing_rhs, 0.1 * (1.0 - 0.1) * 4.0);
  EXPECT_FALSE(rep.passed(false));
}

TEST(VerifyMonotone, LogBumpFromInsideConcaveRegion) {
  Vector center(2);
  center << 1.0, -1.0;
  const AnalyticQ q = make_log_bump_q(center);
  Vector a0(2);
  a0 << 1.5, -0.6;
  for (double beta : {0.01, 0.1, 0.5, 2.0 / q.lipschitz}) {
    const auto tr = iterate_policy(q, Vector::Zero(1), a0, beta, 10000);
    const auto rep = verify_monotone(tr, q, Vector::Zero(1), beta);
    EXPECT_TRUE(rep.improvement_holds) << beta;
    EXPECT_TRUE(rep.summability_holds) << beta;
    if (beta < 2.0 / q.lipschitz) EXPECT_TRUE(rep.gradient_vanished) << beta;
  }
}

TEST(ConvergenceSuite, AllCasesPass) {
  const SuiteReport r = run_convergence_suite(10000);
  EXPECT_FALSE(r.cases.empty());
  for (const auto& c : r.cases) {
    EXPECT_TRUE(c.passed) << c.family << " beta=" << c.beta;
    EXPECT_LE(c.beta, 2.0 / c.lipschitz * (1 + 1e-15));
    EXPECT_EQ(c.trace.size(), static_cast<std::size_t>(c.steps) + 1);
  }
  EXPECT_TRUE(r.all_passed());
  std::ostringstream os;
  print_suite_report(os, r);
  EXPECT_NE(os.str().find("PASS"), std::string::npos);
}

TEST(LearnedCriticDiagnostic, RunsWithoutGating) {
  const nn::Network critic = nn::init_network({4, 8, 1}, 3, nn::OutputKind::identity);
  const auto d = diagnose_learned_critic(critic, Vector::Zero(3), Vector::Zero(1), 0.01, 100);
  EXPECT_EQ(d.steps, 100);
  EXPECT_GE(d.non_decreasing_steps, 0);
  EXPECT_LE(d.non_decreasing_steps, 100);
  EXPECT_TRUE(std::isfinite(d.final_q));
}

}  // namespace
}  // namespace addpg::convergence
