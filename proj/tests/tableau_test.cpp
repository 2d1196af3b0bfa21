#include "rkx/tableau.hpp"

#include <gtest/gtest.h>

namespace rkx {
namespace {

Tableau forward_euler() { return Tableau::single("euler", {{}}, {Coefficient(1)}, 1); }

Tableau midpoint_with_euler() {
  return Tableau("midpoint", {{}, {Coefficient(Rational(1, 2))}}, {Coefficient(0), Coefficient(1)},
                 {Coefficient(1), Coefficient(0)}, 2, 1);
}

TEST(Tableau, ComputesNodesFromRowSums) {
  const auto t = midpoint_with_euler();
  EXPECT_EQ(t.stages(), 2u);
  EXPECT_EQ(t.c()[1].rational(), Rational(1, 2));
  EXPECT_TRUE(t.is_exact());
  EXPECT_TRUE(t.a(0, 1).is_zero());
}

TEST(Tableau, RejectsInconsistentInput) {
  EXPECT_THROW(Tableau("x", {{}, {Coefficient(1)}}, {Coefficient(1)}, {Coefficient(1)}, 2, 1), TableauError);
  EXPECT_THROW(Tableau("x", {{}}, {Coefficient(1)}, {Coefficient(1)}, 1, 1), TableauError);
  EXPECT_THROW(Tableau("x", {{}, {Coefficient(1)}}, {Coefficient(0), Coefficient(1)},
                       {Coefficient(1), Coefficient(0)}, 2, 1, std::vector<Coefficient>{0, Coefficient(Rational(1, 2))}),
               TableauError);
  // Nonzero entry on the diagonal.
  EXPECT_THROW(Tableau("x", {{Coefficient(1)}, {Coefficient(1), Coefficient(0)}}, {Coefficient(0), Coefficient(1)},
                       {Coefficient(1), Coefficient(0)}, 2, 1),
               TableauError);
}

TEST(TableauFormat, ParsesForwardEuler) {
  const auto t = parse_tableau("RKPAIR euler s=1 p=1 phat=0\nc: 0\nb: 1\nbhat: 1\n");
  EXPECT_EQ(t.stages(), 1u);
  EXPECT_EQ(t.b()[0].rational(), Rational(1));
  EXPECT_EQ(t, forward_euler());
}

TEST(TableauFormat, RoundTripsRationalsExactly) {
  const auto t = midpoint_with_euler();
  const auto text = serialize_tableau(t);
  EXPECT_EQ(parse_tableau(text), t);
  EXPECT_EQ(serialize_tableau(parse_tableau(text)), text);
}

TEST(TableauFormat, AcceptsCommentsAndDecimals) {
  const auto t = parse_tableau(
      "# heun\nRKPAIR heun s=2 p=2 phat=1  # trailing\n"
      "c: 0 1.0\nA[2]: 1\nb: 1/2 0.5\nbhat: 1 0\n");
  EXPECT_FALSE(t.is_exact());
  EXPECT_EQ(t.label(), "heun");
}

TEST(TableauFormat, ReportsLineAndFieldOnErrors) {
  try {
    parse_tableau("RKPAIR x s=2 p=2 phat=1\nc: 0 1/2\nA[2]: 1/0\nb: 0 1\nbhat: 1 0\n");
    FAIL() << "expected a parse error";
  } catch (const TableauParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.field(), "A[2] entry 1");
  }
  try {
    parse_tableau("RKPAIR x s=2 p=2 phat=1\nc: 0 1/3\nA[2]: 1/2\nb: 0 1\nbhat: 1 0\n");
    FAIL() << "expected a row-sum error";
  } catch (const TableauParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "c");
  }
  try {
    parse_tableau("RKPAIR x s=2 p=2 phat=1\nc: 0 1/2\nA[2]: 1/2 0\nb: 0 1\nbhat: 1 0\n");
    FAIL() << "expected a triangularity error";
  } catch (const TableauParseError& e) {
    EXPECT_EQ(e.field(), "A[2]");
  }
  EXPECT_THROW(parse_tableau("RKPAIR x s=2 p=2\n"), TableauParseError);
  EXPECT_THROW(parse_tableau("RKPAIR x s=1 p=1 phat=0\nc: 0\nb: 1\n"), TableauParseError);
  EXPECT_THROW(parse_tableau("RKPAIR x s=1 p=1 phat=0\nc: 0\nb: 1\nbhat: 1\nq: 1\n"), TableauParseError);
}

}  // namespace
}  // namespace rkx
