#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "curvlab/expr.hpp"

using namespace curvlab;

namespace {

double eval_one(ExprPool& pool, Expr e,
                const std::vector<std::pair<std::string, double>>& env) {
  Binding b = pool.make_binding();
  for (const auto& [name, v] : env) b.set(*pool.find_symbol(name), v);
  EvalContext ctx(pool, b);
  return ctx(e);
}

}  // namespace

TEST_CASE("rational constants fold exactly") {
  ExprPool pool;
  Expr half = pool.parse("1/2");
  Expr e = pool.add(half, half);
  CHECK(e == pool.one());
  Expr p = pool.parse("2/4 + 3/6");
  CHECK(p == pool.one());
  Expr dec = pool.parse("0.25");
  CHECK(dec == pool.parse("1/4"));
  CHECK(pool.parse("-0.125*8") == pool.parse("-1"));
}

TEST_CASE("hash consing dedupes structurally equal nodes") {
  ExprPool pool;
  pool.symbol("x");
  Expr a = pool.parse("x^2 + sin(x)");
  Expr b = pool.parse("sin(x) + x^2");
  CHECK(a == b);  // commutative normalization => same interned node
  auto before = pool.node_count();
  Expr c = pool.parse("x^2 + sin(x)");
  CHECK(c == a);
  CHECK(pool.node_count() == before);
}

TEST_CASE("zero and one identities") {
  ExprPool pool;
  pool.symbol("x");
  Expr x = pool.parse("x");
  CHECK(pool.add(x, pool.zero()) == x);
  CHECK(pool.mul(x, pool.one()) == x);
  CHECK(pool.mul(x, pool.zero()) == pool.zero());
  CHECK(pool.sub(x, x) == pool.zero());
  CHECK(pool.pow(x, 1) == x);
  CHECK(pool.pow(x, 0) == pool.one());
  CHECK(pool.neg(pool.neg(x)) == x);
}

TEST_CASE("like terms and powers are collected") {
  ExprPool pool;
  pool.symbol("x");
  pool.symbol("y");
  Expr x = pool.parse("x");
  CHECK(pool.add(x, x) == pool.parse("2*x"));
  CHECK(pool.parse("2*x - x") == x);
  CHECK(pool.parse("3*x*y - x*y - 2*y*x") == pool.zero());
  CHECK(pool.mul(x, x) == pool.pow(x, 2));
  CHECK(pool.parse("sin(x)*sin(x)") == pool.parse("sin(x)^2"));
  CHECK(pool.parse("x^3*x^-2") == x);
  CHECK(pool.mul(pool.neg(x), pool.neg(pool.parse("y"))) == pool.parse("x*y"));
  CHECK(pool.parse("x^2 - (x + x)*x + x*x") == pool.zero());
}

TEST_CASE("parser handles precedence, unary minus, powers") {
  ExprPool pool;
  pool.symbol("x");
  pool.symbol("y");
  auto v = [&](const std::string& s, double x, double y) {
    return eval_one(pool, pool.parse(s), {{"x", x}, {"y", y}});
  };
  CHECK(v("2 + 3*4", 0, 0) == doctest::Approx(14.0));
  CHECK(v("(2 + 3)*4", 0, 0) == doctest::Approx(20.0));
  CHECK(v("-x^2", 3, 0) == doctest::Approx(-9.0));
  CHECK(v("2*x^3 - y/4", 2, 8) == doctest::Approx(14.0));
  CHECK(v("x^-2", 2, 0) == doctest::Approx(0.25));
  CHECK(v("sin(x)^2 + cos(x)^2", 0.7, 0) == doctest::Approx(1.0));
  CHECK(v("1 - 2*x/(y + 1)", 3, 1) == doctest::Approx(-2.0));
}

TEST_CASE("parser rejects malformed input with positions") {
  ExprPool pool;
  pool.symbol("x");
  CHECK_THROWS_AS(pool.parse("x +"), parse_error);
  CHECK_THROWS_AS(pool.parse("unknown_sym"), parse_error);
  CHECK_THROWS_AS(pool.parse("sin()"), parse_error);
  CHECK_THROWS_AS(pool.parse("(x"), parse_error);
  CHECK_THROWS_AS(pool.parse("x^y"), parse_error);  // exponents are integers
  CHECK_THROWS_AS(pool.parse(""), parse_error);
  try {
    pool.parse("x + @");
    CHECK(false);
  } catch (const parse_error& e) {
    CHECK(e.position == 4);
  }
}

TEST_CASE("differentiation basic rules") {
  ExprPool pool;
  auto xs = pool.symbol("x");
  pool.symbol("y");
  auto d = [&](const std::string& s) { return pool.differentiate(pool.parse(s), xs); };
  CHECK(d("7") == pool.zero());
  CHECK(d("y") == pool.zero());
  CHECK(d("x") == pool.one());
  CHECK(d("x^3") == pool.parse("3*x^2"));
  CHECK(d("sin(x)") == pool.parse("cos(x)"));
  CHECK(d("cos(x)") == pool.parse("-sin(x)"));
  // product and quotient rules, checked numerically
  Expr e = pool.parse("x^2*sin(x) + x/(1 + x^2)");
  Expr de = pool.differentiate(e, xs);
  const double x0 = 0.83, h = 1e-6;
  double fp = eval_one(pool, e, {{"x", x0 + h}});
  double fm = eval_one(pool, e, {{"x", x0 - h}});
  double num = (fp - fm) / (2 * h);
  CHECK(eval_one(pool, de, {{"x", x0}}) == doctest::Approx(num).epsilon(1e-7));
}

TEST_CASE("differentiation is cached and deterministic") {
  ExprPool pool;
  auto xs = pool.symbol("x");
  Expr e = pool.parse("sin(x^2)*cos(x) + x^5");
  Expr d1 = pool.differentiate(e, xs);
  Expr d2 = pool.differentiate(e, xs);
  CHECK(d1 == d2);  // identical interned node both times
}

TEST_CASE("mixed partials commute") {
  ExprPool pool;
  auto xs = pool.symbol("x");
  auto ys = pool.symbol("y");
  Expr e = pool.parse("sin(x*y)*y^3 + x^2/(1 + y^2)");
  // d/dx d/dy == d/dy d/dx for smooth expressions, numerically
  Expr dxy = pool.differentiate(pool.differentiate(e, ys), xs);
  Expr dyx = pool.differentiate(pool.differentiate(e, xs), ys);
  double a = eval_one(pool, dxy, {{"x", 1.3}, {"y", -0.4}});
  double b = eval_one(pool, dyx, {{"x", 1.3}, {"y", -0.4}});
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("evaluation memoization survives binding changes") {
  ExprPool pool;
  pool.symbol("x");
  auto xs = *pool.find_symbol("x");
  Expr e = pool.parse("x^2 + 1");
  Binding b1 = pool.make_binding();
  b1.set(xs, 2.0);
  Binding b2 = pool.make_binding();
  b2.set(xs, 3.0);
  EvalContext c1(pool, b1);
  CHECK(c1(e) == doctest::Approx(5.0));
  EvalContext c2(pool, b2);
  CHECK(c2(e) == doctest::Approx(10.0));
  EvalContext c3(pool, b1);
  CHECK(c3(e) == doctest::Approx(5.0));
}

TEST_CASE("singular evaluation raises") {
  ExprPool pool;
  pool.symbol("x");
  Expr e = pool.parse("1/x");
  CHECK_THROWS_AS(eval_one(pool, e, {{"x", 0.0}}), singular_evaluation);
  Expr p = pool.parse("x^-1");
  CHECK_THROWS_AS(eval_one(pool, p, {{"x", 0.0}}), singular_evaluation);
}

TEST_CASE("unbound symbol raises") {
  ExprPool pool;
  pool.symbol("x");
  pool.symbol("y");
  Expr e = pool.parse("x + y");
  CHECK_THROWS(eval_one(pool, e, {{"x", 1.0}}));
}

TEST_CASE("rational overflow falls back instead of corrupting") {
  ExprPool pool;
  // 3^40 does not fit an int64 numerator when combined further; the pool
  // must keep an unfolded (but still correct) form rather than overflow.
  Expr big = pool.parse("(3/1)^40 * (3/1)^40");
  double v = eval_one(pool, big, {});
  CHECK(v == doctest::Approx(std::pow(3.0, 80.0)).epsilon(1e-12));
}

TEST_CASE("to_string round trips through the parser") {
  ExprPool pool;
  pool.symbol("r");
  pool.symbol("m");
  pool.symbol("theta");
  std::vector<std::string> exprs = {
      "-(1 - 2*m*r^2/(r^3 + 2*m))", "r^2*sin(theta)^2",
      "cos(theta)/sin(theta)", "1/2*r - 7/3", "(r + m)^3/(r - m)"};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.5, 2.5);
  for (const auto& s : exprs) {
    Expr e = pool.parse(s);
    Expr back = pool.parse(pool.to_string(e));
    for (int k = 0; k < 5; ++k) {
      std::vector<std::pair<std::string, double>> env = {
          {"r", dist(rng)}, {"m", dist(rng)}, {"theta", dist(rng)}};
      CHECK(eval_one(pool, e, env) ==
            doctest::Approx(eval_one(pool, back, env)).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivative of hayward lapse matches finite differences") {
  ExprPool pool;
  auto rs = pool.symbol("r");
  pool.symbol("m");
  pool.symbol("b");
  Expr lapse = pool.parse("1 - 2*m*r^2/(r^3 + 2*m*b^2)");
  Expr dl = pool.differentiate(lapse, rs);
  const double r0 = 2.0, h = 1e-6;
  auto at = [&](double r) {
    return eval_one(pool, lapse, {{"r", r}, {"m", 1.0}, {"b", 1.0}});
  };
  double num = (at(r0 + h) - at(r0 - h)) / (2 * h);
  double sym = eval_one(pool, dl, {{"r", r0}, {"m", 1.0}, {"b", 1.0}});
  CHECK(sym == doctest::Approx(num).epsilon(1e-8));
  // closed form: d/dr [1 - 2 m r^2/(r^3+2 m b^2)] = 2 m r (r^3 - 4 m b^2)/(r^3+2 m b^2)^2
  CHECK(sym == doctest::Approx(2.0 * 2.0 * (8.0 - 4.0) / 100.0).epsilon(1e-12));
}
