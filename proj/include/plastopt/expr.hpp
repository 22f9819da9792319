#pragma once

#include <string>
#include <vector>

namespace plastopt {

// Closed arithmetic grammar over the variables x, y, t:
//
//   expr   := term  (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?                    right associative
//   atom   := number | 'x' | 'y' | 't' | '(' expr ')'
//           | 'min' '(' expr ',' expr ')' | 'max' '(' expr ',' expr ')'
//           | 'ramp' '(' expr ',' expr ',' expr ')'
//
// ramp(s, t0, t1) rises linearly from 0 at s <= t0 to 1 at s >= t1; it is the
// only piecewise primitive, enough for hold-and-release load programs.
class Expr {
 public:
  Expr() = default;

  // Throws ConfigError with the offending column on any syntax error.
  static Expr parse(const std::string& src);

  double operator()(double x, double y, double t) const;

  const std::string& source() const { return src_; }
  bool parsed() const { return !prog_.empty(); }

 private:
  enum class Op : unsigned char {
    num, var_x, var_y, var_t, add, sub, mul, div, pow, neg, min, max, ramp
  };
  struct Ins {
    Op op;
    double value;
  };

  std::vector<Ins> prog_;  // postfix program
  int max_stack_ = 0;
  std::string src_;
};

}  // namespace plastopt
