#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gri/expr.hpp"

using namespace gri;

static const std::vector<std::string> xy{"x1", "x2"};

TEST_CASE("parse basic expression and evaluate") {
  ExprPool p;
  Expr e = p.parse("2*x1 + sin(x2)^2", xy);
  Point pt{{0.3, 0.7}};
  double expect = 2 * 0.3 + std::pow(std::sin(0.7), 2);
  CHECK(eval(p, e, pt) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("interning gives reference equality for equivalent text") {
  ExprPool p;
  Expr a = p.parse("x1*(x1)", xy);
  Expr b = p.parse("x1*x1", xy);
  CHECK(a == b);
  Expr c = p.parse("2*x1 + sin(x2)", xy);
  Expr d = p.parse("2 * x1+sin( x2 )", xy);
  CHECK(c == d);
}

TEST_CASE("unknown identifier reports the name") {
  ExprPool p;
  bool threw = false;
  try {
    p.parse("sin(y)", std::vector<std::string>{"x1"});
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::UnknownIdentifier);
    CHECK(std::string(e.what()).find('y') != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("syntax errors carry a position") {
  ExprPool p;
  CHECK_THROWS_AS(p.parse("2*+", xy), Error);
  CHECK_THROWS_AS(p.parse("sin()", xy), Error);
  CHECK_THROWS_AS(p.parse("x1^x2", xy), Error);  // exponent must be a number
  CHECK_THROWS_AS(p.parse("(x1", xy), Error);
  try {
    p.parse("x1 + ", xy);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Syntax);
  }
}

TEST_CASE("differentiation examples") {
  ExprPool p;
  Expr x1 = p.coord(0);
  Expr sq = p.mul(x1, x1);
  Expr d = p.diff(sq, 0);
  Point pt{{1.7, 0.0}};
  CHECK(eval(p, d, pt) == doctest::Approx(2 * 1.7).epsilon(1e-14));

  CHECK(p.diff(p.parse("sin(x2)", xy), 0) == p.zero());
  CHECK(p.diff(p.constant(5.0), 1) == p.zero());

  Expr dl = p.diff(p.parse("ln(x1)", xy), 0);
  CHECK(eval(p, dl, Point{{2.0, 0.0}}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("evaluation domain errors") {
  ExprPool p;
  Expr e = p.pow(p.sin(p.coord(0)), 2.0);
  CHECK(eval(p, e, Point{{M_PI / 2, 0.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eval(p, p.ln(p.coord(0)), Point{{-1.0, 0.0}}), Error);
  CHECK_THROWS_AS(eval(p, p.div(p.one(), p.coord(0)), Point{{0.0, 0.0}}),
                  Error);
  try {
    eval(p, p.ln(p.coord(0)), Point{{-1.0, 0.0}});
  } catch (const Error& e2) {
    CHECK(e2.code() == ErrorCode::Domain);
  }
}

TEST_CASE("constant folding canon") {
  ExprPool p;
  Expr x = p.coord(0);
  CHECK(p.add(x, p.zero()) == x);
  CHECK(p.mul(x, p.one()) == x);
  CHECK(p.mul(x, p.zero()) == p.zero());
  CHECK(p.add(p.constant(2), p.constant(3)) == p.constant(5));
  CHECK(p.sub(x, x) == p.zero());
  CHECK(p.pow(x, 1.0) == x);
  CHECK(p.pow(x, 0.0) == p.one());
}

namespace {

// random tree over exp/ln-safe building blocks
Expr random_tree(ExprPool& p, std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> op(0, 9);
  std::uniform_real_distribution<double> c(0.2, 2.0);
  if (depth == 0) {
    if (op(rng) < 4) return p.constant(c(rng));
    return p.coord(op(rng) % 2);
  }
  Expr a = random_tree(p, rng, depth - 1);
  Expr b = random_tree(p, rng, depth - 1);
  switch (op(rng)) {
    case 0: return p.add(a, b);
    case 1: return p.sub(a, b);
    case 2: return p.mul(a, b);
    case 3: return p.div(a, p.add(p.constant(3.0), p.sin(b)));  // keeps |den|>0
    case 4: return p.sin(a);
    case 5: return p.cos(a);
    case 6: return p.exp(p.mul(p.constant(0.3), p.sin(a)));
    case 7: return p.ln(p.add(p.constant(2.0), p.sin(a)));
    case 8: return p.pow(p.add(p.constant(2.0), p.sin(a)), 1.5);
    default: return p.neg(a);
  }
}

}  // namespace

TEST_CASE("derivative matches central finite difference on random trees") {
  ExprPool p;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  const double h = 1e-5;
  for (int trial = 0; trial < 60; ++trial) {
    Expr e = random_tree(p, rng, 1 + trial % 6);
    for (int k = 0; k < 2; ++k) {
      Expr d = p.diff(e, k);
      Point pt{{box(rng), box(rng)}};
      Point lo = pt, hi = pt;
      lo.x[k] -= h;
      hi.x[k] += h;
      double fd = (eval(p, e, hi) - eval(p, e, lo)) / (2 * h);
      double ex = eval(p, d, pt);
      CHECK(std::fabs(ex - fd) / (1 + std::fabs(ex)) < 1e-5);
    }
  }
}

TEST_CASE("folding preserves values at random points") {
  ExprPool p;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> box(-0.5, 0.5);
  // expressions written with obvious foldable structure
  Expr raw = p.parse("1*x1 + 0*x2 + (2+3)*sin(x2) - (x1 - x1)", xy);
  Expr direct = p.parse("x1 + 5*sin(x2)", xy);
  CHECK(raw == direct);
  for (int i = 0; i < 100; ++i) {
    Point pt{{box(rng), box(rng)}};
    CHECK(std::fabs(eval(p, raw, pt) - eval(p, direct, pt)) < 1e-12);
  }
}

TEST_CASE("to_string round-trips through the parser") {
  ExprPool p;
  Expr e = p.parse("2*x1 + sin(x2)^2 - exp(0.5*x1)/(1 + x2*x2)", xy);
  std::string s = p.to_string(e, xy);
  CHECK(p.parse(s, xy) == e);
}

TEST_CASE("memoized evaluation matches one-shot evaluation") {
  ExprPool p;
  Expr e = p.parse("sin(x1)*sin(x1) + cos(x1)*cos(x1)", xy);
  Point pt{{0.37, 0.0}};
  EvalContext ctx(p, pt);
  CHECK(ctx.eval(e) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ctx.eval(e) == eval(p, e, pt));
}
