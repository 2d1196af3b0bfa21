#include "rkx/builders.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

namespace rkx {
namespace {

using Vec = std::array<double, 2>;

Vec rhs(const Vec& y) { return {y[1] + 0.1 * y[0] * y[0], -std::sin(y[0]) + 0.3 * y[1] * y[0]}; }

Vec axpy(Vec y, double a, const Vec& x) {
  y[0] += a * x[0];
  y[1] += a * x[1];
  return y;
}

// One step of a tableau applied in double precision.
Vec rk_step(const Tableau& t, const Vec& y0, double h, WeightSet w) {
  const auto s = t.stages();
  std::vector<Vec> k(s);
  for (std::size_t i = 0; i < s; ++i) {
    Vec yi = y0;
    for (std::size_t j = 0; j < i; ++j) yi = axpy(yi, h * t.a(i, j).to_double(), k[j]);
    k[i] = rhs(yi);
  }
  Vec out = y0;
  for (std::size_t i = 0; i < s; ++i) out = axpy(out, h * t.weights(w)[i].to_double(), k[i]);
  return out;
}

// Direct Aitken-Neville over first- or second-order base values.
Vec neville(std::vector<Vec> T, const std::vector<int>& n, int e, std::size_t upto) {
  for (std::size_t k = 1; k <= upto; ++k)
    for (std::size_t j = upto; j >= k; --j) {
      const double d = std::pow(double(n[j]) / n[j - k], e) - 1;
      T[j] = axpy(T[j], 1 / d, axpy(T[j], -1, T[j - 1]));
    }
  return T[upto];
}

std::pair<Vec, Vec> euler_extrapolation(int p, const Vec& y0, double h) {
  std::vector<Vec> T;
  std::vector<int> n;
  for (int k = 1; k <= p; ++k) {
    Vec y = y0;
    for (int j = 0; j < k; ++j) y = axpy(y, h / k, rhs(y));
    T.push_back(y);
    n.push_back(k);
  }
  return {neville(T, n, 1, static_cast<std::size_t>(p - 1)), neville(T, n, 1, static_cast<std::size_t>(p - 2))};
}

std::pair<Vec, Vec> midpoint_extrapolation(int p, const Vec& y0, double h) {
  std::vector<Vec> T;
  std::vector<int> n;
  for (int k = 1; k <= p / 2; ++k) {
    const double hk = h / (2 * k);
    Vec prev = y0, cur = axpy(y0, hk, rhs(y0));
    for (int j = 2; j <= 2 * k; ++j) {
      Vec next = axpy(prev, 2 * hk, rhs(cur));
      prev = cur;
      cur = next;
    }
    T.push_back(cur);
    n.push_back(k);
  }
  const auto r = static_cast<std::size_t>(p / 2);
  return {neville(T, n, 2, r - 1), neville(T, n, 2, r - 2)};
}

// Integral over [a,b] of the Lagrange polynomial l_m through `c`, by
// composite Simpson on a fine grid.
double lagrange_integral(const std::vector<double>& c, std::size_t m, double a, double b) {
  auto l = [&](double x) {
    double v = 1;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (k != m) v *= (x - c[k]) / (c[m] - c[k]);
    return v;
  };
  const int N = 2000;
  const double dx = (b - a) / N;
  double acc = l(a) + l(b);
  for (int i = 1; i < N; ++i) acc += (i % 2 ? 4 : 2) * l(a + i * dx);
  return acc * dx / 3;
}

std::pair<Vec, Vec> deferred_correction(int p, double theta, const std::vector<double>& c, const Vec& y0, double h) {
  const auto P = static_cast<std::size_t>(p);
  std::vector<std::vector<Vec>> Y(P + 1, std::vector<Vec>(P, y0));
  for (std::size_t j = 1; j < P; ++j) Y[1][j] = axpy(Y[1][j - 1], (c[j] - c[j - 1]) * h, rhs(Y[1][j - 1]));
  for (std::size_t k = 2; k <= P; ++k)
    for (std::size_t j = 1; j < P; ++j) {
      Vec y = axpy(Y[k][j - 1], h * theta, rhs(Y[k][j - 1]));
      y = axpy(y, -h * theta, rhs(Y[k - 1][j - 1]));
      for (std::size_t m = 0; m < P; ++m) y = axpy(y, h * lagrange_integral(c, m, c[j - 1], c[j]), rhs(Y[k - 1][m]));
      Y[k][j] = y;
    }
  return {Y[P][P - 1], Y[P - 1][P - 1]};
}

void expect_close(const Vec& a, const Vec& b, double tol) {
  EXPECT_NEAR(a[0], b[0], tol);
  EXPECT_NEAR(a[1], b[1], tol);
}

const Vec kY0 = {0.4, -0.7};
constexpr double kH = 0.3;

TEST(Extrapolation, NevilleWeightsSumToOne) {
  const auto w = extrapolation_weights(harmonic_sequence(5), 2);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t k = 0; k <= j; ++k) {
      Rational s = 0;
      for (const auto& x : w[j][k]) s += x;
      EXPECT_EQ(s, 1);
    }
  // Richardson with n = (1,2), h expansion: 2 T_21 - T_11.
  const auto w1 = extrapolation_weights(harmonic_sequence(2), 1);
  EXPECT_EQ(w1[1][1], (std::vector<Rational>{-1, 2}));
}

TEST(ExEuler, OrderTwoIsTheExplicitMidpointRule) {
  const auto m = build_ex_euler(2);
  const auto& t = m.tableau;
  ASSERT_EQ(t.stages(), 2u);
  EXPECT_EQ(t.a(1, 0).rational(), Rational(1, 2));
  EXPECT_EQ(t.b()[0].rational(), 0);
  EXPECT_EQ(t.b()[1].rational(), 1);
  EXPECT_EQ(t.b_hat()[0].rational(), 1);
  EXPECT_EQ(t.b_hat()[1].rational(), 0);
}

TEST(ExEuler, MatchesDirectExtrapolationAndStageCount) {
  for (int p = 2; p <= 8; ++p) {
    const auto m = build_ex_euler(p);
    EXPECT_EQ(m.stages(), expected_stages(Family::ex_euler, p));
    EXPECT_EQ(m.principal_check.order, p);
    EXPECT_EQ(m.embedded_check.order, p - 1);
    EXPECT_EQ(m.groups.size(), static_cast<std::size_t>(p));
    auto [y, yhat] = euler_extrapolation(p, kY0, kH);
    expect_close(rk_step(m.tableau, kY0, kH, WeightSet::principal), y, 1e-12);
    if (p > 2) expect_close(rk_step(m.tableau, kY0, kH, WeightSet::embedded), yhat, 1e-12);
  }
}

TEST(ExMidpoint, MatchesDirectExtrapolationAndStageCount) {
  BuildOptions full;
  full.verify_up_to = 11;
  for (int p = 4; p <= 10; p += 2) {
    const auto m = build_ex_midpoint(p, full);
    EXPECT_EQ(m.stages(), expected_stages(Family::ex_midpoint, p));
    EXPECT_EQ(m.principal_check.order, p);
    EXPECT_EQ(m.embedded_check.order, p - 2);
    auto [y, yhat] = midpoint_extrapolation(p, kY0, kH);
    expect_close(rk_step(m.tableau, kY0, kH, WeightSet::principal), y, 1e-12);
    expect_close(rk_step(m.tableau, kY0, kH, WeightSet::embedded), yhat, 1e-12);
  }
  EXPECT_THROW(build_ex_midpoint(5), BuildError);
  EXPECT_THROW(build_ex_midpoint(2), BuildError);
}

TEST(DeferredCorrection, MatchesDirectSweepsForSeveralThetas) {
  for (int p : {3, 4, 6}) {
    for (auto theta : {Rational(0), Rational(1, 2), Rational(1)}) {
      const auto m = build_dc_euler(p, theta);
      const bool tz = theta == 0;
      EXPECT_EQ(m.stages(), expected_stages(Family::dc_euler, p, tz)) << m.label();
      EXPECT_EQ(m.principal_check.order, p) << m.label();
      EXPECT_GE(m.embedded_check.order, p - 1) << m.label();
      std::vector<double> c;
      for (int j = 0; j < p; ++j) c.push_back(double(j) / (p - 1));
      auto [y, yhat] = deferred_correction(p, theta.convert_to<double>(), c, kY0, kH);
      expect_close(rk_step(m.tableau, kY0, kH, WeightSet::principal), y, 1e-10);
      expect_close(rk_step(m.tableau, kY0, kH, WeightSet::embedded), yhat, 1e-10);
    }
  }
}

TEST(DeferredCorrection, UnprunedThetaZeroKeepsTheLastSweep) {
  BuildOptions opt;
  opt.prune_final_sweep = false;
  const auto m = build_dc_euler(4, 0, NodeFamily::equispaced, opt);
  EXPECT_EQ(m.stages(), 4u * 3u);
  EXPECT_EQ(build_dc_euler(4, 0).stages(), 10u);
}

TEST(DeferredCorrection, ChebyshevNodesVerifyToTolerance) {
  const auto m = build_dc_euler(5, 0, NodeFamily::chebyshev_lobatto);
  EXPECT_FALSE(m.tableau.is_exact());
  EXPECT_EQ(m.principal_check.order, 5);
  std::vector<double> c;
  for (int j = 0; j < 5; ++j) c.push_back((1 - std::cos(M_PI * j / 4)) / 2);
  auto [y, yhat] = deferred_correction(5, 0, c, kY0, kH);
  expect_close(rk_step(m.tableau, kY0, kH, WeightSet::principal), y, 1e-10);
}

TEST(DeferredCorrection, IntegrationMatrixIsExactOnPolynomials) {
  const auto cfg = make_dc_config(5, 0);
  // int_{c_j}^{c_{j+1}} tau^3 from interpolation of tau^3 at the nodes.
  for (std::size_t j = 0; j < 4; ++j) {
    Rational acc = 0;
    for (std::size_t m = 0; m < 5; ++m) {
      const Rational x = cfg.c_nodes[m].rational();
      acc += cfg.integration[m][j].rational() * x * x * x;
    }
    const Rational a = cfg.c_nodes[j].rational(), b = cfg.c_nodes[j + 1].rational();
    EXPECT_EQ(acc, (b * b * b * b - a * a * a * a) / 4);
  }
}

TEST(Builders, RejectOutOfRangeParameters) {
  EXPECT_THROW(build_ex_euler(1), BuildError);
  EXPECT_THROW(build_ex_euler(13), BuildError);
  EXPECT_THROW(build_dc_euler(2, 0), BuildError);
  EXPECT_THROW(build_dc_euler(4, Rational(3, 2)), BuildError);
  EXPECT_THROW(build_dc_euler(4, -1), BuildError);
  auto cfg = make_dc_config(4, 0);
  cfg.integration[0][0] += Coefficient(Rational(1, 1000));
  EXPECT_THROW(validate_dc_config(cfg), BuildError);
}

TEST(Builders, StageLabelsFollowTheAlgorithm) {
  const auto m = build_dc_euler(3, 0);
  EXPECT_EQ(m.graph.label(0), "y_n");
  EXPECT_EQ(m.graph.label(1), "Y_{1,1}");
  EXPECT_EQ(m.graph.label(m.graph.output()), "y_{n+1}");
  const auto e = build_ex_euler(3);
  EXPECT_EQ(e.graph.label(1), "T_{21} substep 1");
}

}  // namespace
}  // namespace rkx
