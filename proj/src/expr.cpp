#include "plastopt/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "plastopt/errors.hpp"

namespace plastopt {

namespace {

struct Parser {
  const std::string& src;
  std::size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError({"expression \"" + src + "\": " + what + " at column " +
                       std::to_string(pos + 1)});
  }

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eat(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
};

// Mirror of Expr::Op, same declaration order; parse() translates by value.
enum class POp : unsigned char {
  num, var_x, var_y, var_t, add, sub, mul, div, pow, neg, min, max, ramp
};

struct Builder {
  std::vector<std::pair<POp, double>> prog;

  void emit(POp op, double v = 0.0) { prog.emplace_back(op, v); }
};

void parse_expr(Parser& p, Builder& b);

void parse_atom(Parser& p, Builder& b) {
  p.skip();
  if (p.pos >= p.src.size()) p.fail("unexpected end of input");
  const char c = p.src[p.pos];

  if (c == '(') {
    ++p.pos;
    parse_expr(p, b);
    p.expect(')');
    return;
  }
  if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
    const char* begin = p.src.c_str() + p.pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) p.fail("malformed number");
    p.pos += static_cast<std::size_t>(end - begin);
    b.emit(POp::num, v);
    return;
  }
  if (std::isalpha(static_cast<unsigned char>(c))) {
    std::size_t n = 0;
    while (p.pos + n < p.src.size() &&
           std::isalpha(static_cast<unsigned char>(p.src[p.pos + n])))
      ++n;
    const std::string name = p.src.substr(p.pos, n);
    p.pos += n;
    if (name == "x") return b.emit(POp::var_x);
    if (name == "y") return b.emit(POp::var_y);
    if (name == "t") return b.emit(POp::var_t);
    if (name == "min" || name == "max") {
      p.expect('(');
      parse_expr(p, b);
      p.expect(',');
      parse_expr(p, b);
      p.expect(')');
      return b.emit(name == "min" ? POp::min : POp::max);
    }
    if (name == "ramp") {
      p.expect('(');
      parse_expr(p, b);
      p.expect(',');
      parse_expr(p, b);
      p.expect(',');
      parse_expr(p, b);
      p.expect(')');
      return b.emit(POp::ramp);
    }
    p.pos -= n;
    p.fail("unknown identifier '" + name + "'");
  }
  p.fail(std::string("unexpected character '") + c + "'");
}

void parse_factor(Parser& p, Builder& b);

void parse_power(Parser& p, Builder& b) {
  parse_atom(p, b);
  if (p.eat('^')) {
    parse_factor(p, b);  // right associative, unary minus binds to the exponent
    b.emit(POp::pow);
  }
}

void parse_factor(Parser& p, Builder& b) {
  if (p.eat('-')) {
    parse_factor(p, b);
    b.emit(POp::neg);
    return;
  }
  parse_power(p, b);
}

void parse_term(Parser& p, Builder& b) {
  parse_factor(p, b);
  for (;;) {
    if (p.eat('*')) {
      parse_factor(p, b);
      b.emit(POp::mul);
    } else if (p.eat('/')) {
      parse_factor(p, b);
      b.emit(POp::div);
    } else {
      return;
    }
  }
}

void parse_expr(Parser& p, Builder& b) {
  parse_term(p, b);
  for (;;) {
    if (p.eat('+')) {
      parse_term(p, b);
      b.emit(POp::add);
    } else if (p.eat('-')) {
      parse_term(p, b);
      b.emit(POp::sub);
    } else {
      return;
    }
  }
}

double ramp_value(double s, double t0, double t1) {
  if (t1 == t0) return s >= t1 ? 1.0 : 0.0;  // degenerate window: a step
  const double r = (s - t0) / (t1 - t0);
  return r <= 0.0 ? 0.0 : (r >= 1.0 ? 1.0 : r);
}

}  // namespace

Expr Expr::parse(const std::string& src) {
  Parser p(src);
  Builder b;
  parse_expr(p, b);
  p.skip();
  if (p.pos != src.size()) p.fail("trailing input");

  Expr e;
  e.src_ = src;
  e.prog_.reserve(b.prog.size());
  int depth = 0, max_depth = 0;
  for (const auto& [op, v] : b.prog) {
    switch (op) {
      case POp::num: case POp::var_x: case POp::var_y: case POp::var_t: ++depth; break;
      case POp::neg: break;
      case POp::ramp: depth -= 2; break;
      default: --depth; break;
    }
    max_depth = std::max(max_depth, depth);
    e.prog_.push_back({static_cast<Expr::Op>(op), v});
  }
  e.max_stack_ = max_depth;
  if (max_depth > 256) {
    Parser q(src);
    q.fail("expression too deep");
  }
  return e;
}

double Expr::operator()(double x, double y, double t) const {
  double stack[256];
  int top = 0;
  for (const Ins& ins : prog_) {
    switch (ins.op) {
      case Op::num: stack[top++] = ins.value; break;
      case Op::var_x: stack[top++] = x; break;
      case Op::var_y: stack[top++] = y; break;
      case Op::var_t: stack[top++] = t; break;
      case Op::neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::add: --top; stack[top - 1] += stack[top]; break;
      case Op::sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::div: --top; stack[top - 1] /= stack[top]; break;
      case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
      case Op::max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
      case Op::ramp:
        top -= 2;
        stack[top - 1] = ramp_value(stack[top - 1], stack[top], stack[top + 1]);
        break;
    }
  }
  return top == 1 ? stack[0] : 0.0;
}

}  // namespace plastopt
