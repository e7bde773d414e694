#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "moi/models/pendulum.hpp"
#include "moi/system.hpp"
#include "test_support.hpp"

namespace moi {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(EvalField, PendulumAtReportedSepIsNearlyZero) {
  const auto sys = models::pendulum_system({});
  const Vector dx = eval_field(sys, vec({0.848, 0.0}), vec({1.5}));
  EXPECT_DOUBLE_EQ(dx[0], 0.0);
  // -2 sin(0.848) + 1.5, the SEP coordinate being rounded to three digits.
  EXPECT_NEAR(dx[1], 0.0, 1e-3);
}

TEST(EvalField, PendulumDirectSubstitution) {
  // x2' = -2 sin(0) - 0.5 * 1 + 1.5 = 1.0
  const auto sys = models::pendulum_system({});
  const Vector dx = eval_field(sys, vec({0.0, 1.0}), vec({1.5}));
  EXPECT_DOUBLE_EQ(dx[0], 1.0);
  EXPECT_DOUBLE_EQ(dx[1], 1.0);
}

TEST(EvalField, ZeroAtExactEquilibrium) {
  const auto sys = models::pendulum_system({});
  const Vector dx = eval_field(sys, vec({std::asin(0.75), 0.0}), vec({1.5}));
  EXPECT_NEAR(dx.norm(), 0.0, 1e-15);
}

TEST(EvalField, DimensionMismatch) {
  const auto sys = models::pendulum_system({});
  EXPECT_THROW(eval_field(sys, vec({0.0}), vec({1.5})), DimensionMismatch);
  EXPECT_THROW(eval_field(sys, vec({0.0, 0.0}), vec({1.5, 1.0})), DimensionMismatch);
}

TEST(EvalField, NonFiniteOutput) {
  auto sys = testing::linear_system(Matrix::Identity(2, 2));
  sys.field = [](const Vector& x, const Vector&) -> Vector {
    return x.array() / (x.array() - x.array());
  };
  EXPECT_THROW(eval_field(sys, vec({1.0, 2.0}), vec({0.0})), NonFiniteOutput);
}

TEST(EvalJacobian, PendulumAtAnalyticSaddle) {
  const double c3 = 1.5686;
  const auto sys = models::pendulum_system({});
  const Vector xu = vec({std::numbers::pi - std::asin(c3 / 2.0), 0.0});
  const Matrix j = eval_jacobian(sys, xu, vec({c3}));
  EXPECT_DOUBLE_EQ(j(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(j(0, 1), 1.0);
  EXPECT_NEAR(j(1, 0), 1.2407, 1e-4);
  EXPECT_DOUBLE_EQ(j(1, 1), -0.5);
}

TEST(EvalJacobian, LinearSystemIsConstant) {
  std::mt19937 rng(7);
  const Matrix a = testing::random_matrix(rng, 4);
  const auto analytic = testing::linear_system(a, true);
  const auto numeric = testing::linear_system(a, false);
  for (int k = 0; k < 5; ++k) {
    const Vector x = testing::random_matrix(rng, 4).col(0) * 10.0;
    EXPECT_EQ(eval_jacobian(analytic, x, vec({0.0})), a);
    EXPECT_LT((eval_jacobian(numeric, x, vec({0.0})) - a).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(EvalJacobian, FiniteDifferenceMatchesAnalyticOnPendulum) {
  const auto sys = models::pendulum_system({});
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> angle(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(-5.0, 5.0);
  std::uniform_real_distribution<double> torque(0.1, 1.9);
  for (int k = 0; k < 100; ++k) {
    const Vector x = vec({angle(rng), speed(rng)});
    const Vector p = vec({torque(rng)});
    const Matrix diff = eval_jacobian(sys, x, p) - finite_difference_jacobian(sys, x, p);
    EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_LE(jacobian_consistency_excess(sys, x, p), 0.0);
  }
}

TEST(EvalJacobian, Purity) {
  const auto sys = models::pendulum_system({});
  const Vector x = vec({1.234, -0.5});
  const Vector p = vec({1.3});
  const Matrix a = finite_difference_jacobian(sys, x, p);
  const Matrix b = finite_difference_jacobian(sys, x, p);
  EXPECT_EQ(a, b);
  EXPECT_EQ(eval_field(sys, x, p), eval_field(sys, x, p));
}

TEST(StateDistance, ProjectsOutInvariantDirections) {
  auto sys = testing::linear_system(Matrix::Zero(3, 3));
  sys.invariant_directions = Vector::Ones(3).normalized();
  EXPECT_NEAR(state_distance(sys, vec({5.0, 5.0, 5.0}), vec({0.0, 0.0, 0.0})), 0.0, 1e-14);
  EXPECT_NEAR(state_distance(sys, vec({1.0, 0.0, 0.0}), vec({0.0, 0.0, 0.0})),
              std::sqrt(2.0 / 3.0), 1e-14);
}

TEST(StateDistance, WrapsAngleCoordinates) {
  auto sys = testing::linear_system(Matrix::Zero(2, 2));
  sys.angle_coordinates = {0};
  const Vector a = vec({2.0 * std::numbers::pi + 0.1, 0.0});
  const Vector b = vec({0.0, 0.0});
  EXPECT_NEAR(state_distance(sys, a, b, DistanceMode::WrapAngles), 0.1, 1e-12);
  EXPECT_NEAR(state_distance(sys, a, b, DistanceMode::Euclidean), 2.0 * std::numbers::pi + 0.1,
              1e-12);
}

TEST(ReducedJacobian, DropsOneZeroEigenvaluePerDirection) {
  // Rows sum to zero in the angle block, so J (0, 1, 1) = 0.
  Matrix j(3, 3);
  j << -1.0, 2.0, -2.0,
        1.0, 0.0,  0.0,
        0.5, 0.0,  0.0;
  auto sys = testing::linear_system(j);
  Vector s(3);
  s << 0.0, 1.0, 1.0;
  sys.invariant_directions = s.normalized();
  const Matrix r = reduced_jacobian(sys, j);
  ASSERT_EQ(r.rows(), 2);
  Eigen::VectorXcd full = Eigen::EigenSolver<Matrix>(j).eigenvalues();
  Eigen::VectorXcd red = Eigen::EigenSolver<Matrix>(r).eigenvalues();
  // Characteristic polynomials: full = lambda * reduced.
  std::complex<double> prod_full_nonzero = 1.0, prod_red = 1.0;
  for (auto v : full) if (std::abs(v) > 1e-12) prod_full_nonzero *= v;
  for (auto v : red) prod_red *= v;
  EXPECT_NEAR(std::abs(prod_full_nonzero - prod_red), 0.0, 1e-12);
  EXPECT_NEAR(r.trace(), j.trace(), 1e-12);
}

}  // namespace
}  // namespace moi
