#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "moi/models/pendulum.hpp"
#include "moi/recovery.hpp"
#include "test_support.hpp"

namespace moi {
namespace {

Vector vec1(double a) { return Vector::Constant(1, a); }

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

TEST(FindSep, PendulumStableEquilibrium) {
  const auto sys = models::pendulum_system({});
  const Vector sep = find_sep(sys, vec1(1.5), vec2(0.8, 0.0));
  EXPECT_NEAR(sep[0], std::asin(0.75), 1e-12);
  EXPECT_NEAR(sep[0], 0.848, 1e-3);
  EXPECT_NEAR(sep[1], 0.0, 1e-12);
  EXPECT_LE(sys.field(sep, vec1(1.5)).norm(), 1e-12);
}

TEST(FindSep, SaddleIsRejected) {
  const auto sys = models::pendulum_system({});
  try {
    find_sep(sys, vec1(1.5), vec2(2.3, 0.0));
    FAIL() << "expected NotStable";
  } catch (const NotStable& e) {
    EXPECT_NE(std::string(e.what()).find("2.29"), std::string::npos) << e.what();
  }
}

TEST(FindSep, LinearStableSystem) {
  const auto sys = testing::linear_system(-Matrix::Identity(3, 3));
  Vector guess(3);
  guess << 4.0, -7.0, 0.5;
  EXPECT_LE(find_sep(sys, vec1(0.0), guess).norm(), 1e-12);
}

TEST(FindSep, NewtonDivergence) {
  // f(x) = x^2 + 1 has no real root.
  ParameterizedSystem sys = testing::scalar_linear();
  sys.field = [](const Vector& x, const Vector&) -> Vector { return x.array().square() + 1.0; };
  sys.jacobian = [](const Vector& x, const Vector&) -> Matrix { return Matrix::Constant(1, 1, 2.0 * x[0]); };
  EXPECT_THROW(find_sep(sys, vec1(0.0), vec1(0.3)), NewtonDivergence);
}

TEST(ClassifyRecovery, PendulumExamples) {
  const auto sys = models::pendulum_system({});
  const IntegratorConfig cfg;
  const Vector sep15 = find_sep(sys, vec1(1.5), vec2(0.8, 0.0));
  EXPECT_EQ(classify_recovery(sys, vec1(1.5), cfg, sep15).verdict, Verdict::Recovers);
  const Vector sep17 = find_sep(sys, vec1(1.7), vec2(1.0, 0.0));
  const RecoveryVerdict v17 = classify_recovery(sys, vec1(1.7), cfg, sep17);
  EXPECT_EQ(v17.verdict, Verdict::FailsToRecover);
  EXPECT_EQ(v17.termination, Termination::Diverged);
}

TEST(ClassifyRecovery, StartAtSepRecovers) {
  auto sys = models::pendulum_system({});
  sys.initial_condition = [](const Vector& p) -> Vector { return vec2(std::asin(p[0] / 2.0), 0.0); };
  const Vector sep = find_sep(sys, vec1(1.2), vec2(0.8, 0.0));
  EXPECT_EQ(classify_recovery(sys, vec1(1.2), IntegratorConfig{}, sep).verdict, Verdict::Recovers);
}

TEST(ClassifyRecovery, VerdictMapping) {
  EXPECT_EQ(verdict_for(Termination::ConvergedToSEP), Verdict::Recovers);
  EXPECT_EQ(verdict_for(Termination::Diverged), Verdict::FailsToRecover);
  EXPECT_EQ(verdict_for(Termination::MaxTimeReached), Verdict::Undetermined);
  EXPECT_EQ(verdict_for(Termination::SolverFailure), Verdict::Undetermined);
}

TEST(FindMapEquilibrium, MatchesContinuousEquilibriumForAutonomousField) {
  // Equilibria of f are fixed points of the trapezoidal map for every h.
  const auto sys = models::pendulum_system({});
  IntegratorConfig cfg;
  cfg.step = 0.4;
  const Vector uep = vec2(std::numbers::pi - std::asin(0.78), 0.0);
  const Vector found = find_map_equilibrium(sys, vec1(1.56), cfg, uep + vec2(0.05, 0.02));
  EXPECT_NEAR(found[0], uep[0], 1e-10);
  EXPECT_NEAR(found[1], 0.0, 1e-10);
}

class PendulumSearch : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    sys_ = new ParameterizedSystem(models::pendulum_system({}));
    result_ = new BoundarySearchResult(
        ray_boundary_search(*sys_, vec1(1.5), vec1(1.0), IntegratorConfig{}, SearchOptions{}));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete sys_;
  }
  static ParameterizedSystem* sys_;
  static BoundarySearchResult* result_;
};

ParameterizedSystem* PendulumSearch::sys_ = nullptr;
BoundarySearchResult* PendulumSearch::result_ = nullptr;

TEST_F(PendulumSearch, FindsKnownBoundary) {
  EXPECT_NEAR(result_->p_star[0], 1.5686, 1e-3);
  EXPECT_LE(result_->bracket_width, 1e-4);
  EXPECT_GT(result_->iterations, 0);
}

TEST_F(PendulumSearch, BracketInvariantHoldsThroughBisection) {
  // Replay the history: after each bisection probe the bracket endpoints keep
  // their verdicts.
  double lo = 1.5, hi = -1.0;
  for (const auto& probe : result_->history) {
    if (!probe.bisection) {
      if (probe.verdict == Verdict::Recovers) lo = probe.parameter[0];
      else hi = probe.parameter[0];
      continue;
    }
    ASSERT_GT(hi, lo);
    const double mid = probe.parameter[0];
    EXPECT_NEAR(mid, 0.5 * (lo + hi), 1e-15);
    (probe.verdict == Verdict::Recovers ? lo : hi) = mid;
  }
  EXPECT_DOUBLE_EQ(lo, result_->p_star[0]);
  EXPECT_DOUBLE_EQ(hi, result_->p_fail[0]);
}

TEST_F(PendulumSearch, WidthHalvesEachIteration) {
  // Expansion ended at s = 0.1 (first probe), so the initial bracket is 0.1.
  double s_hi = 0.0;
  for (const auto& probe : result_->history) {
    if (!probe.bisection && probe.verdict == Verdict::FailsToRecover) s_hi = probe.parameter[0] - 1.5;
  }
  double s_lo = 0.0;
  for (const auto& probe : result_->history) {
    if (!probe.bisection && probe.verdict == Verdict::Recovers) s_lo = probe.parameter[0] - 1.5;
  }
  const double initial = s_hi - s_lo;
  EXPECT_NEAR(result_->bracket_width, initial / std::ldexp(1.0, result_->iterations), 1e-15);
}

TEST_F(PendulumSearch, ReverificationReproducesVerdicts) {
  const IntegratorConfig cfg;
  const Vector sep_in = find_sep(*sys_, result_->p_star, vec2(0.8, 0.0));
  EXPECT_EQ(classify_recovery(*sys_, result_->p_star, cfg, sep_in).verdict, Verdict::Recovers);
  const Vector p_out = result_->p_star + result_->bracket_width * result_->direction;
  const Vector sep_out = find_sep(*sys_, p_out, vec2(0.8, 0.0));
  EXPECT_EQ(classify_recovery(*sys_, p_out, cfg, sep_out).verdict, Verdict::FailsToRecover);
}

TEST(RayBoundarySearch, NoBracketIntoRegion) {
  const auto sys = models::pendulum_system({});
  SearchOptions opts;
  opts.max_expansions = 3;
  // Decreasing torque only deepens recovery: probes at 1.4, 1.3, 1.1.
  EXPECT_THROW(ray_boundary_search(sys, vec1(1.5), vec1(-1.0), IntegratorConfig{}, opts), NoBracket);
  // Running off the parameter domain is also reported as no bracket.
  opts.max_expansions = 10;
  EXPECT_THROW(ray_boundary_search(sys, vec1(1.5), vec1(-1.0), IntegratorConfig{}, opts), NoBracket);
}

TEST(RayBoundarySearch, StartOutsideRegionIsRejected) {
  const auto sys = models::pendulum_system({});
  EXPECT_THROW(ray_boundary_search(sys, vec1(1.7), vec1(1.0), IntegratorConfig{}), NotRecovered);
}

TEST(RayBoundarySearch, UndeterminedProbeAborts) {
  // From 0.5 the bisection probes p = 1 exactly, which lies on the saddle's
  // stable manifold and never settles.
  const auto sys = testing::saddle_toy();
  IntegratorConfig cfg;
  cfg.max_time = 20.0;
  try {
    ray_boundary_search(sys, vec1(0.5), vec1(1.0), cfg);
    FAIL() << "expected UndeterminedAtBisection";
  } catch (const UndeterminedAtBisection& e) {
    EXPECT_NE(std::string(e.what()).find("1.0"), std::string::npos) << e.what();
  }
}

TEST(RayBoundarySearch, InvalidInputs) {
  const auto sys = models::pendulum_system({});
  EXPECT_THROW(ray_boundary_search(sys, vec1(1.5), vec2(1.0, 0.0), IntegratorConfig{}), DimensionMismatch);
  EXPECT_THROW(ray_boundary_search(sys, vec1(1.5), vec1(0.0), IntegratorConfig{}), InvalidConfig);
  SearchOptions opts;
  opts.param_tol = 0.0;
  EXPECT_THROW(ray_boundary_search(sys, vec1(1.5), vec1(1.0), IntegratorConfig{}, opts), InvalidConfig);
}

TEST(RayBoundarySearch, ToyBoundaryIsExact) {
  const auto sys = testing::saddle_toy();
  SearchOptions opts;
  opts.param_tol = 1e-6;
  const auto r = ray_boundary_search(sys, vec1(0.43), vec1(1.0), IntegratorConfig{}, opts);
  EXPECT_LT(r.p_star[0], 1.0);
  EXPECT_GE(r.p_fail[0], 1.0 - 1e-12);
  EXPECT_NEAR(r.p_star[0], 1.0, 1e-6);
}

}  // namespace
}  // namespace moi
