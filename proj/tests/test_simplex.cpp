#include "surfenv/simplex.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace surfenv;

namespace {

Mat make(std::initializer_list<std::initializer_list<double>> rows) {
  Mat A(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) A(i, j++) = v;
    ++i;
  }
  return A;
}

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

}  // namespace

// min -x1 - x2 s.t. x1 + 2x2 + s1 = 4, 3x1 + x2 + s2 = 6: vertex (8/5, 6/5).
TEST(Simplex, SmallProblemByHand) {
  const Mat A = make({{1, 2, 1, 0}, {3, 1, 0, 1}});
  const auto r = solve_lp(A, vec({4, 6}), vec({-1, -1, 0, 0}));
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
  EXPECT_NEAR(r.objective, -2.8, 1e-12);
  EXPECT_NEAR(r.duals.dot(vec({4, 6})), r.objective, 1e-12);
}

TEST(Simplex, Infeasible) {
  const Mat A = make({{1, 1}});
  EXPECT_EQ(solve_lp(A, vec({-1}), vec({1, 1})).status, LpStatus::infeasible);
}

TEST(Simplex, Unbounded) {
  const Mat A = make({{1, -1}});
  EXPECT_EQ(solve_lp(A, vec({1}), vec({-1, 0})).status, LpStatus::unbounded);
}

TEST(Simplex, NegativeRightHandSideAndRedundantRows) {
  // x1 - x2 = -1 twice; min x1 + x2 -> x = (0, 1)
  const Mat A = make({{1, -1}, {1, -1}});
  const auto r = solve_lp(A, vec({-1, -1}), vec({1, 1}));
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 1.0, 1e-12);
}

TEST(Simplex, DegenerateAssignment) {
  // 3x3 assignment polytope is highly degenerate; optimum by enumeration is 5.
  const double C[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  Mat A = Mat::Zero(6, 9);
  Vec c(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      A(i, 3 * i + j) = 1;
      A(3 + j, 3 * i + j) = 1;
      c(3 * i + j) = C[i][j];
    }
  const auto r = solve_lp(A, Vec::Ones(6), c);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 5.0, 1e-12);
}

// Random feasible LPs: primal feasibility, dual feasibility, zero duality gap.
TEST(Simplex, OptimalityConditionsOnRandomProblems) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 2.0);
  for (int t = 0; t < 40; ++t) {
    const int m = 3 + t % 5, n = 3 * m;
    Mat A(m, n);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = u(rng);
    Vec x0(n);
    for (int j = 0; j < n; ++j) x0(j) = pos(rng);
    Vec c(n);
    for (int j = 0; j < n; ++j) c(j) = pos(rng);
    const Vec b = A * x0;
    const auto r = solve_lp(A, b, c);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_LE((A * r.x - b).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_GE(r.x.minCoeff(), -1e-12);
    const Vec reduced = c - A.transpose() * r.duals;
    EXPECT_GE(reduced.minCoeff(), -1e-9);
    EXPECT_NEAR(r.objective, b.dot(r.duals), 1e-9 * std::max(1.0, std::abs(r.objective)));
    EXPECT_LE(r.objective, c.dot(x0) + 1e-12);
  }
}

TEST(Simplex, EmptyColumns) {
  EXPECT_EQ(solve_lp(Mat(1, 0), vec({0}), Vec(0)).status, LpStatus::optimal);
  EXPECT_EQ(solve_lp(Mat(1, 0), vec({1}), Vec(0)).status, LpStatus::infeasible);
}
