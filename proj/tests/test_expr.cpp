#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plastopt/errors.hpp"
#include "plastopt/expr.hpp"

using namespace plastopt;

static double ev(const std::string& src, double x = 0.0, double y = 0.0, double t = 0.0) {
  return Expr::parse(src)(x, y, t);
}

TEST_CASE("literals, variables, and basic arithmetic") {
  CHECK(ev("0") == 0.0);
  CHECK(ev("1.5e2") == 150.0);
  CHECK(ev(".25") == 0.25);
  CHECK(ev("x", 3.0) == 3.0);
  CHECK(ev("y", 0.0, -2.0) == -2.0);
  CHECK(ev("t", 0.0, 0.0, 0.75) == 0.75);
  CHECK(ev("1 + 2*3") == 7.0);
  CHECK(ev("(1 + 2)*3") == 9.0);
  CHECK(ev("7/2") == 3.5);
  CHECK(ev("1 - 2 - 3") == -4.0);  // left associative
  CHECK(ev("12/2/3") == 2.0);
}

TEST_CASE("powers bind tightest and associate to the right") {
  CHECK(ev("2^3^2") == 512.0);
  CHECK(ev("2*3^2") == 18.0);
  CHECK(ev("-2^2") == -4.0);   // unary minus wraps the power
  CHECK(ev("2^-1") == 0.5);    // and may start the exponent
  CHECK(ev("(-2)^2") == 4.0);
  CHECK(ev("--3") == 3.0);
}

TEST_CASE("min, max, and ramp") {
  CHECK(ev("min(2, 3)") == 2.0);
  CHECK(ev("max(2, 3)") == 3.0);
  CHECK(ev("min(x, max(y, t))", 5.0, 1.0, 2.0) == 2.0);
  CHECK(ev("ramp(t, 0, 1)", 0, 0, -1.0) == 0.0);
  CHECK(ev("ramp(t, 0, 1)", 0, 0, 0.25) == 0.25);
  CHECK(ev("ramp(t, 0, 1)", 0, 0, 7.0) == 1.0);
  CHECK(ev("ramp(t, 0.5, 0.5)", 0, 0, 0.4) == 0.0);  // degenerate window: step
  CHECK(ev("ramp(t, 0.5, 0.5)", 0, 0, 0.6) == 1.0);
  // hold-and-release profile: up over [0, 0.5], flat after
  const Expr e = Expr::parse("0.35*ramp(t, 0, 0.5)");
  CHECK(e(0, 0, 0.25) == doctest::Approx(0.175).epsilon(1e-15));
  CHECK(e(0, 0, 0.9) == 0.35);
}

TEST_CASE("space-time profiles compose") {
  const Expr e = Expr::parse("t*(x^2 - y/2 + min(x, y))");
  CHECK(e(2.0, 4.0, 3.0) == doctest::Approx(3.0 * (4.0 - 2.0 + 2.0)).epsilon(1e-15));
  CHECK(e(2.0, 4.0, 0.0) == 0.0);
}

TEST_CASE("syntax errors carry the offending column") {
  const auto column_of = [](const std::string& src) -> std::string {
    try {
      Expr::parse(src);
    } catch (const ConfigError& e) {
      return e.violations.at(0);
    }
    return "";
  };
  CHECK(column_of("1 +") != "");
  CHECK(column_of("1 +").find("column 4") != std::string::npos);
  CHECK(column_of("2 * foo").find("unknown identifier 'foo'") != std::string::npos);
  CHECK(column_of("2 * foo").find("column 5") != std::string::npos);
  CHECK(column_of("min(1)").find("expected ','") != std::string::npos);
  CHECK(column_of("ramp(1, 2)").find("expected ','") != std::string::npos);
  CHECK(column_of("(1 + 2").find("expected ')'") != std::string::npos);
  CHECK(column_of("1 2").find("trailing input") != std::string::npos);
  CHECK(column_of("1 @ 2").find("trailing input") != std::string::npos);
  CHECK(column_of("").find("unexpected end of input") != std::string::npos);
  CHECK_THROWS_AS(Expr::parse("sin(x)"), ConfigError);  // grammar is closed
}

TEST_CASE("a default-constructed expression reports unparsed") {
  Expr e;
  CHECK(!e.parsed());
  CHECK(Expr::parse("0").parsed());
}
