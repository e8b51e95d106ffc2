#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "finite_difference.hpp"
#include "geoscope/chart.hpp"
#include "geoscope/error.hpp"
#include "geoscope/expr.hpp"
#include "models.hpp"

using namespace geoscope;

namespace {

const std::vector<std::string> kThPh = {"th", "ph"};
const std::vector<std::string> kXY = {"x", "y"};

std::string random_expression(std::mt19937& rng, int depth) {
  static const char* leaves[] = {"x", "y", "0.5", "1.25", "2", "x", "y"};
  if (depth == 0) return leaves[std::uniform_int_distribution<int>(0, 6)(rng)];
  const std::string a = random_expression(rng, depth - 1);
  const std::string b = random_expression(rng, depth - 1);
  switch (std::uniform_int_distribution<int>(0, 15)(rng)) {
    case 0: return "sin(" + a + ")";
    case 1: return "cos(" + a + ")";
    case 2: return "tanh(" + a + ")";
    case 3: return "exp(sin(" + a + "))";
    case 4: return "log(2 + cos(" + a + "))";
    case 5: return "sqrt(1 + (" + a + ")^2)";
    case 6: return a + "/(2 + sin(" + b + "))";
    case 7: return a + "*" + b;
    case 8: return a + " + " + b;
    case 9: return a + " - " + b;
    case 10: return "-" + a;
    case 11: return "(" + a + ")^2";
    case 12: return "(1.5 + cos(" + a + "))^0.5";
    case 13: return "sinh(sin(" + a + "))";
    case 14: return "cosh(sin(" + a + "))";
    default: return "tan(0.5*sin(" + a + "))";
  }
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("geoscope_test_" + name);
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(ParseExpression, PowerOfFunctionCall) {
  const Expr e = parse_expression("sin(th)^2", kThPh);
  const Expr want = Expr::binary(BinaryOp::pow, Expr::call(Function::sin, Expr::variable(0, "th")), Expr::number(2));
  EXPECT_EQ(e, want);
}

TEST(ParseExpression, QuotientOfProduct) {
  const Expr e = parse_expression("1/(y*y)", kXY);
  const Expr want = Expr::binary(BinaryOp::div, Expr::number(1),
                                 Expr::binary(BinaryOp::mul, Expr::variable(1, "y"), Expr::variable(1, "y")));
  EXPECT_EQ(e, want);
}

TEST(ParseExpression, UnknownIdentifierNamed) {
  try {
    parse_expression("foo(x)", kXY);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("foo"), std::string::npos);
    EXPECT_EQ(e.offset(), 0u);
  }
  EXPECT_THROW(parse_expression("x + z", kXY), ParseError);
}

TEST(ParseExpression, PrecedenceAndAssociativity) {
  const double p[] = {3.0, 2.0};
  auto eval = [&](const char* text) { return evaluate_real(parse_expression(text, kXY), p); };
  EXPECT_DOUBLE_EQ(eval("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(eval("-x^2"), -9.0);
  EXPECT_DOUBLE_EQ(eval("x - y - 1"), 0.0);
  EXPECT_DOUBLE_EQ(eval("8/4/2"), 1.0);
  EXPECT_DOUBLE_EQ(eval("1 + 2*x^2/y"), 10.0);
  EXPECT_DOUBLE_EQ(eval("2^-1"), 0.5);
  EXPECT_DOUBLE_EQ(eval("1.5e1 + 0.5"), 15.5);
  EXPECT_EQ(parse_expression("-x^2", kXY),
            Expr::negate(Expr::binary(BinaryOp::pow, Expr::variable(0, "x"), Expr::number(2))));
}

TEST(ParseExpression, SyntaxErrorsCarryOffsetAndExpected) {
  try {
    parse_expression("x + * y", kXY);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_FALSE(e.expected().empty());
  }
  EXPECT_THROW(parse_expression("", kXY), ParseError);
  EXPECT_THROW(parse_expression("(x + y", kXY), ParseError);
  EXPECT_THROW(parse_expression("x y", kXY), ParseError);
  EXPECT_THROW(parse_expression("sin x", kXY), ParseError);
  EXPECT_THROW(parse_expression("x +", kXY), ParseError);
  EXPECT_THROW(parse_expression("3 $ 4", kXY), ParseError);
}

TEST(ParseExpression, PrintParseFixedPoint) {
  std::mt19937 rng(17);
  for (int i = 0; i < 300; ++i) {
    const std::string text = random_expression(rng, 1 + i % 4);
    const Expr e = parse_expression(text, kXY);
    const Expr again = parse_expression(to_string(e), kXY);
    EXPECT_EQ(e, again) << text;
    EXPECT_EQ(to_string(again), to_string(e));
  }
}

TEST(EvalExpr, SineSquaredSecondDerivative) {
  const double p[] = {std::numbers::pi / 2, 0.0};
  const Jet j = evaluate(parse_expression("sin(th)^2", kThPh), p, 2);
  EXPECT_NEAR(j.value(), 1.0, 1e-15);
  const int d1[] = {1, 0};
  const int d2[] = {2, 0};
  EXPECT_NEAR(j.partial(d1), 0.0, 1e-15);
  EXPECT_NEAR(j.partial(d2), -2.0, 1e-14);
  EXPECT_NEAR(j.coefficient(d2), -1.0, 1e-14);
}

TEST(EvalExpr, SumGradient) {
  const double p[] = {1.0, 2.0};
  const Jet j = evaluate(parse_expression("x + y", kXY), p, 1);
  EXPECT_EQ(j.value(), 3.0);
  EXPECT_EQ(j.gradient(), (std::vector<double>{1.0, 1.0}));
}

TEST(EvalExpr, DivisionByZeroIsDomainError) {
  const double p[] = {1.0, 0.0};
  try {
    evaluate(parse_expression("1/y", kXY), p, 2);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
  EXPECT_THROW(evaluate_real(parse_expression("1/y", kXY), p), DomainError);
  EXPECT_THROW(evaluate(parse_expression("log(y - 1)", kXY), p, 1), DomainError);
  EXPECT_THROW(evaluate(parse_expression("(y - 1)^x", kXY), p, 1), DomainError);
}

TEST(EvalExpr, NegativeBaseWithIntegerExponent) {
  const double p[] = {-2.0, 1.0};
  EXPECT_DOUBLE_EQ(evaluate(parse_expression("x^3", kXY), p, 2).value(), -8.0);
  EXPECT_DOUBLE_EQ(evaluate_real(parse_expression("x^2", kXY), p), 4.0);
}

TEST(EvalExpr, ValueSlotMatchesRealEvaluationExactly) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 300; ++i) {
    const Expr e = parse_expression(random_expression(rng, 1 + i % 4), kXY);
    const double p[] = {u(rng), u(rng)};
    EXPECT_EQ(evaluate(e, p, 3).value(), evaluate_real(e, p)) << to_string(e);
  }
}

TEST(EvalExpr, CoefficientsMatchFiniteDifferences) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& layout = JetLayout::get(2, 4);
  for (int i = 0; i < 40; ++i) {
    const Expr e = parse_expression(random_expression(rng, 1 + i % 3), kXY);
    const double p[] = {u(rng), u(rng)};
    const long double pl[] = {p[0], p[1]};
    const Jet j = evaluate(e, p, 4);
    auto fn = [&](std::span<const long double> q) { return evaluate_real(e, q); };
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const auto& alpha = layout.index(k);
      const double fd = static_cast<double>(fixtures::richardson_partial(fn, pl, alpha, 2e-2L));
      EXPECT_LE(std::abs(j.partial(alpha) - fd), 1e-6 * std::max(1.0, std::abs(fd))) << to_string(e) << " k=" << k;
    }
  }
}

TEST(LoadChart, SphereFile) {
  const Chart c = fixtures::load_model("sphere");
  EXPECT_EQ(c.dim(), 2);
  EXPECT_EQ(c.coords(), kThPh);
  EXPECT_EQ(c.metric(0, 0), Expr::number(1));
  EXPECT_EQ(c.metric(1, 1), parse_expression("sin(th)^2", kThPh));
  EXPECT_EQ(c.metric(0, 1), Expr::number(0));
  ASSERT_TRUE(c.domain(0).has_value());
  EXPECT_FALSE(c.domain(1).has_value());
  const double inside[] = {1.0, 0.0};
  const double pole[] = {0.0, 0.0};
  EXPECT_TRUE(c.in_domain(inside));
  EXPECT_FALSE(c.in_domain(pole));
}

TEST(LoadChart, MetricLargerThanDimension) {
  const auto text = "dim = 2\ncoords = x y\ng 0 0 = 1\ng 1 1 = 1\ng 2 2 = 1\n";
  try {
    Chart::parse(text, "bad.chart");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    EXPECT_EQ(e.line(), 5);
  }
}

TEST(LoadChart, SymmetricCompletion) {
  const Chart c = Chart::parse("dim = 2\ncoords = x y\ng 0 0 = 2\ng 0 1 = x\ng 1 1 = 3\n");
  EXPECT_EQ(c.metric(1, 0), parse_expression("x", kXY));
  EXPECT_EQ(c.metric(0, 1), c.metric(1, 0));
}

TEST(LoadChart, OmittedEntriesAreZero) {
  const Chart c = Chart::parse("dim = 3\ncoords = a b c\ng 0 0 = 1\n");
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i || j) EXPECT_EQ(c.metric(i, j), Expr::number(0));
    }
  }
}

TEST(LoadChart, CommentsBlankLinesAndInfiniteDomains) {
  const Chart c = Chart::parse(
      "# comment\n\n  dim = 2   # trailing\ncoords = r t\ng 0 0 = 1\ng 1 1 = r^2\ndomain r = (0, inf)\ndomain t = (-inf, "
      "inf)\n");
  ASSERT_TRUE(c.domain(0).has_value());
  EXPECT_EQ(c.domain(0)->lo, 0.0);
  EXPECT_TRUE(std::isinf(c.domain(0)->hi));
  EXPECT_TRUE(std::isinf(c.domain(1)->lo));
}

TEST(LoadChart, Errors) {
  const std::vector<std::string> bad = {
      "coords = x y\ng 0 0 = 1\n",                       // missing dim
      "dim = 2\ng 0 0 = 1\n",                            // missing coords
      "dim = 2\ncoords = x x\n",                         // duplicate coordinate
      "dim = 3\ncoords = x y\n",                         // count mismatch
      "dim = 2\ncoords = x y\ng 1 0 = 1\n",              // lower triangle
      "dim = 2\ncoords = x y\ng 0 0 = 1\ng 0 0 = 2\n",   // duplicate entry
      "dim = 2\ncoords = x y\ng 0 0 = q\n",              // unknown identifier
      "dim = 2\ncoords = x y\ng 0 0 = (x\n",             // syntax
      "dim = 2\ncoords = x y\nmetric = 1\n",             // unknown key
      "dim = 2\ncoords = x y\ndomain z = (0, 1)\n",      // unknown coordinate
      "dim = 2\ncoords = x y\ndomain x = (1, 0)\n",      // empty interval
      "dim = 2\ncoords = x sin\n",                       // collides with function
      "dim = 2\ncoords = x y\ng 0 = 1\n",                // malformed entry
      "dim = 0\ncoords =\n",                             // non-positive dim
      "dim = 2\ncoords = x y\njust words\n",             // no '='
  };
  for (const auto& text : bad) EXPECT_THROW(Chart::parse(text, "t.chart"), ParseError) << text;
}

TEST(LoadChart, ExpressionErrorsCarryFileAndLine) {
  try {
    Chart::parse("dim = 2\ncoords = x y\ng 0 0 = 1\ng 1 1 = sin(x\n", "f.chart");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(std::string(e.what()).rfind("f.chart:4:", 0), 0u) << e.what();
  }
}

TEST(LoadChart, FileRoundTripAndIoError) {
  const auto path = write_temp("mirror.chart", "dim = 2\ncoords = x y\ng 0 0 = 1\ng 0 1 = x/10\ng 1 1 = 1\n");
  const Chart c = Chart::load(path);
  EXPECT_EQ(c.metric(1, 0), parse_expression("x/10", kXY));
  std::filesystem::remove(path);
  EXPECT_THROW(Chart::load("/nonexistent/dir/none.chart"), IoError);
}

TEST(LoadChart, AllModelChartsLoad) {
  for (const auto& m : fixtures::models()) {
    const Chart c = fixtures::load_model(m.name);
    EXPECT_EQ(c.dim(), m.dim) << m.name;
  }
}
