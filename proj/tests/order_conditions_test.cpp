#include "rkx/order_conditions.hpp"

#include <gtest/gtest.h>

namespace rkx {
namespace {

Coefficient q(long n, long d = 1) { return Coefficient(Rational(n, d)); }

Tableau rk4() {
  return Tableau::single("rk4", {{}, {q(1, 2)}, {q(0), q(1, 2)}, {q(0), q(0), q(1)}},
                         {q(1, 6), q(1, 3), q(1, 3), q(1, 6)}, 4);
}

TEST(OrderConditions, ForwardEulerHasOrderOne) {
  const auto t = Tableau::single("euler", {{}}, {q(1)}, 1);
  const auto r = order_residuals(t, 2);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].value.rational(), Rational(-1, 2));
  const auto v = verify_order(t);
  EXPECT_EQ(v.order, 1);
  EXPECT_FALSE(v.capped);
  ASSERT_TRUE(v.first_violation);
}

TEST(OrderConditions, MidpointResidualsAtOrderThree) {
  const auto t = Tableau("mid", {{}, {q(1, 2)}}, {q(0), q(1)}, {q(1), q(0)}, 2, 1);
  const auto r = order_residuals(t, 3);
  ASSERT_EQ(r.size(), 2u);
  // Tall tree [[.]]: 0 - 1/6; bushy tree [.,.]: 1/4 - 1/3.
  EXPECT_EQ(r[0].value.rational(), Rational(-1, 6));
  EXPECT_EQ(r[1].value.rational(), Rational(-1, 12));
  EXPECT_EQ(verify_order(t).order, 2);
  EXPECT_EQ(verify_order(t, WeightSet::embedded).order, 1);
}

TEST(OrderConditions, ClassicalRk4IsExactlyFourthOrder) {
  OrderChecker c(rk4());
  const auto v = c.verify(WeightSet::principal);
  EXPECT_EQ(v.order, 4);
  EXPECT_EQ(c.violations(5, WeightSet::principal), 9u);
  const auto sw = c.residuals(5, WeightSet::principal, ResidualConvention::symmetry_weighted);
  const auto pl = c.residuals(5, WeightSet::principal);
  const auto& f = Forest::up_to(5);
  for (std::size_t i = 0; i < sw.size(); ++i)
    EXPECT_EQ(sw[i].value.rational() * Rational(f[pl[i].tree].sigma), pl[i].value.rational());
}

TEST(OrderConditions, InexactTableauUsesScaledTolerance) {
  auto d = [](const char* s) { return Coefficient::inexact(HighFloat(s)); };
  const auto t = Tableau::single(
      "rk4f", {{}, {d("0.5")}, {d("0"), d("0.5")}, {d("0"), d("0"), d("1")}},
      {d("0.16666666666666666666666666666666"), d("0.33333333333333333333333333333333"),
       d("0.33333333333333333333333333333333"), d("0.16666666666666666666666666666666")},
      4);
  EXPECT_EQ(verify_order(t).order, 4);
  // Perturbing a weight beyond the tolerance breaks order one.
  const auto bad = Tableau::single("bad", {{}}, {d("1.000001")}, 1);
  EXPECT_EQ(verify_order(bad).order, 0);
  EXPECT_EQ(verify_order(bad, WeightSet::principal, 1e-3).order, 1);
}

TEST(OrderConditions, RejectsOrdersOutsideTheForest) {
  OrderChecker c(rk4());
  EXPECT_THROW(c.residuals(0), std::out_of_range);
  EXPECT_THROW(c.residuals(13), std::out_of_range);
}

}  // namespace
}  // namespace rkx
