#include "gri/expr.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstring>
#include <sstream>

namespace gri {

namespace {

uint64_t double_bits(double v) {
  // Normalize -0.0 so folded constants intern consistently.
  if (v == 0.0) v = 0.0;
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  return bits;
}

}  // namespace

size_t ExprPool::KeyHash::operator()(const Key& k) const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ull;
  };
  mix(static_cast<uint64_t>(k.op));
  mix(k.a);
  mix(k.b);
  mix(k.bits);
  return static_cast<size_t>(h);
}

ExprPool::ExprPool() {
  zero_ = constant(0.0);
  one_ = constant(1.0);
}

Expr ExprPool::intern(Op op, uint32_t a, uint32_t b, double value) {
  Key key{op, a, b, double_bits(value)};
  auto it = table_.find(key);
  if (it != table_.end()) return Expr{it->second};
  uint32_t id = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back(Node{op, a, b, value});
  table_.emplace(key, id);
  return Expr{id};
}

bool ExprPool::is_const(Expr e, double v) const {
  const Node& n = nodes_[e.id];
  return n.op == Op::Constant && n.value == v;
}

Expr ExprPool::constant(double v) { return intern(Op::Constant, 0, 0, v); }

Expr ExprPool::coord(int index) {
  return intern(Op::Coord, static_cast<uint32_t>(index), 0, 0.0);
}

Expr ExprPool::add(Expr a, Expr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (op(a) == Op::Constant && op(b) == Op::Constant)
    return constant(value(a) + value(b));
  return intern(Op::Add, a.id, b.id, 0.0);
}

Expr ExprPool::sub(Expr a, Expr b) {
  if (is_const(b, 0.0)) return a;
  if (a == b) return zero_;
  if (op(a) == Op::Constant && op(b) == Op::Constant)
    return constant(value(a) - value(b));
  if (is_const(a, 0.0)) return neg(b);
  return intern(Op::Sub, a.id, b.id, 0.0);
}

Expr ExprPool::mul(Expr a, Expr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return zero_;
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (op(a) == Op::Constant && op(b) == Op::Constant)
    return constant(value(a) * value(b));
  return intern(Op::Mul, a.id, b.id, 0.0);
}

Expr ExprPool::div(Expr a, Expr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0)) return zero_;
  if (op(a) == Op::Constant && op(b) == Op::Constant && value(b) != 0.0)
    return constant(value(a) / value(b));
  return intern(Op::Div, a.id, b.id, 0.0);
}

Expr ExprPool::pow(Expr base, double exponent) {
  if (exponent == 0.0) return one_;
  if (exponent == 1.0) return base;
  if (op(base) == Op::Constant)
    return constant(std::pow(value(base), exponent));
  return intern(Op::Pow, base.id, 0, exponent);
}

Expr ExprPool::neg(Expr a) {
  if (op(a) == Op::Constant) return constant(-value(a));
  if (op(a) == Op::Neg) return child_a(a);
  return intern(Op::Neg, a.id, 0, 0.0);
}

Expr ExprPool::exp(Expr a) {
  if (is_const(a, 0.0)) return one_;
  if (op(a) == Op::Constant) return constant(std::exp(value(a)));
  return intern(Op::Exp, a.id, 0, 0.0);
}

Expr ExprPool::ln(Expr a) {
  if (is_const(a, 1.0)) return zero_;
  return intern(Op::Ln, a.id, 0, 0.0);
}

Expr ExprPool::sin(Expr a) {
  if (op(a) == Op::Constant) return constant(std::sin(value(a)));
  return intern(Op::Sin, a.id, 0, 0.0);
}

Expr ExprPool::cos(Expr a) {
  if (op(a) == Op::Constant) return constant(std::cos(value(a)));
  return intern(Op::Cos, a.id, 0, 0.0);
}

Expr ExprPool::diff(Expr e, int k) {
  uint64_t key = (static_cast<uint64_t>(e.id) << 8) | static_cast<uint32_t>(k);
  auto it = diff_cache_.find(key);
  if (it != diff_cache_.end()) return it->second;

  const Node n = nodes_[e.id];
  Expr a{n.a}, b{n.b};
  Expr d;
  switch (n.op) {
    case Op::Constant:
      d = zero_;
      break;
    case Op::Coord:
      d = (static_cast<int>(n.a) == k) ? one_ : zero_;
      break;
    case Op::Add:
      d = add(diff(a, k), diff(b, k));
      break;
    case Op::Sub:
      d = sub(diff(a, k), diff(b, k));
      break;
    case Op::Mul:
      d = add(mul(diff(a, k), b), mul(a, diff(b, k)));
      break;
    case Op::Div:
      d = div(sub(mul(diff(a, k), b), mul(a, diff(b, k))), mul(b, b));
      break;
    case Op::Pow:
      d = mul(mul(constant(n.value), pow(a, n.value - 1.0)), diff(a, k));
      break;
    case Op::Neg:
      d = neg(diff(a, k));
      break;
    case Op::Exp:
      d = mul(e, diff(a, k));
      break;
    case Op::Ln:
      d = div(diff(a, k), a);
      break;
    case Op::Sin:
      d = mul(cos(a), diff(a, k));
      break;
    case Op::Cos:
      d = neg(mul(sin(a), diff(a, k)));
      break;
  }
  diff_cache_.emplace(key, d);
  return d;
}

// ---------------------------------------------------------------------------
// Parser
//
// expr   := term (("+"|"-") term)*
// term   := factor (("*"|"/") factor)*
// factor := base ("^" number)?
// base   := number | ident | "(" expr ")" | ("-"|"+") base | func "(" expr ")"
// func   := exp | ln | sin | cos
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
  Parser(ExprPool& pool, std::string_view text,
         std::span<const std::string> coords)
      : pool_(pool), text_(text), coords_(coords) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) {
    std::ostringstream os;
    os << "syntax error at position " << pos_ << ": " << what;
    throw Error(ErrorCode::Syntax, os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (consume('+'))
        e = pool_.add(e, term());
      else if (consume('-'))
        e = pool_.sub(e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (consume('*'))
        e = pool_.mul(e, factor());
      else if (consume('/'))
        e = pool_.div(e, factor());
      else
        return e;
    }
  }

  Expr factor() {
    Expr b = base();
    if (consume('^')) return pool_.pow(b, number());
    return b;
  }

  Expr base() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (c == '-') {
      ++pos_;
      return pool_.neg(base());
    }
    if (c == '+') {
      ++pos_;
      return base();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return pool_.constant(number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return ident();
    fail("expected number, identifier or '('");
  }

  double number() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
    // optional exponent part of the literal (1e-3)
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;  // 'e' belonged to an identifier context; not a literal exponent
      }
    }
    if (start == pos_) fail("expected number");
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_)
      fail("malformed number literal");
    return v;
  }

  Expr ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);
    if (name == "exp" || name == "ln" || name == "sin" || name == "cos") {
      if (!consume('(')) fail("expected '(' after function name");
      Expr arg = expr();
      if (!consume(')')) fail("expected ')'");
      if (name == "exp") return pool_.exp(arg);
      if (name == "ln") return pool_.ln(arg);
      if (name == "sin") return pool_.sin(arg);
      return pool_.cos(arg);
    }
    for (size_t i = 0; i < coords_.size(); ++i)
      if (coords_[i] == name) return pool_.coord(static_cast<int>(i));
    throw Error(ErrorCode::UnknownIdentifier,
                "unknown identifier '" + std::string(name) + "' at position " +
                    std::to_string(start));
  }

  ExprPool& pool_;
  std::string_view text_;
  std::span<const std::string> coords_;
  size_t pos_ = 0;
};

}  // namespace

Expr ExprPool::parse(std::string_view text, std::span<const std::string> coords) {
  return Parser(*this, text, coords).run();
}

std::string ExprPool::to_string(Expr e, std::span<const std::string> coords) const {
  // Fully parenthesized except leaves; parseable and unambiguous.
  const Node& n = nodes_[e.id];
  auto bin = [&](const char* sym) {
    return "(" + to_string(Expr{n.a}, coords) + sym + to_string(Expr{n.b}, coords) + ")";
  };
  auto fn = [&](const char* name) {
    return std::string(name) + "(" + to_string(Expr{n.a}, coords) + ")";
  };
  std::ostringstream os;
  switch (n.op) {
    case Op::Constant:
      os.precision(17);
      os << n.value;
      return (n.value < 0) ? "(" + os.str() + ")" : os.str();
    case Op::Coord:
      return coords[n.a];
    case Op::Add: return bin("+");
    case Op::Sub: return bin("-");
    case Op::Mul: return bin("*");
    case Op::Div: return bin("/");
    case Op::Pow: {
      os.precision(17);
      os << n.value;
      return "(" + to_string(Expr{n.a}, coords) + ")^" + os.str();
    }
    case Op::Neg: return "(-" + to_string(Expr{n.a}, coords) + ")";
    case Op::Exp: return fn("exp");
    case Op::Ln: return fn("ln");
    case Op::Sin: return fn("sin");
    case Op::Cos: return fn("cos");
  }
  return {};
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvalContext::EvalContext(const ExprPool& pool, const Point& p)
    : pool_(pool), point_(p) {
  val_.resize(pool.size(), 0.0);
  done_.resize(pool.size(), 0);
}

double EvalContext::eval(Expr root) {
  // the pool may have grown since construction (or since the last call)
  if (pool_.size() > val_.size()) {
    val_.resize(pool_.size(), 0.0);
    done_.resize(pool_.size(), 0);
  }
  if (done_[root.id]) return val_[root.id];
  // Iterative post-order so deep sum chains cannot overflow the stack.
  std::vector<uint32_t> stack{root.id};
  while (!stack.empty()) {
    uint32_t id = stack.back();
    if (done_[id]) {
      stack.pop_back();
      continue;
    }
    const auto op = pool_.nodes_[id].op;
    uint32_t a = pool_.nodes_[id].a;
    uint32_t b = pool_.nodes_[id].b;
    bool binary = (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div);
    bool unary = (op == Op::Pow || op == Op::Neg || op == Op::Exp ||
                  op == Op::Ln || op == Op::Sin || op == Op::Cos);
    if ((binary || unary) && !done_[a]) {
      stack.push_back(a);
      continue;
    }
    if (binary && !done_[b]) {
      stack.push_back(b);
      continue;
    }
    double v = 0.0;
    const double value = pool_.nodes_[id].value;
    switch (op) {
      case Op::Constant: v = value; break;
      case Op::Coord:
        if (a >= point_.x.size())
          throw Error(ErrorCode::Domain, "coordinate index out of range for point");
        v = point_.x[a];
        break;
      case Op::Add: v = val_[a] + val_[b]; break;
      case Op::Sub: v = val_[a] - val_[b]; break;
      case Op::Mul: v = val_[a] * val_[b]; break;
      case Op::Div:
        if (val_[b] == 0.0)
          throw Error(ErrorCode::Domain, "division by zero during evaluation");
        v = val_[a] / val_[b];
        break;
      case Op::Pow: {
        double base = val_[a];
        if (base == 0.0 && value < 0.0)
          throw Error(ErrorCode::Domain, "pow: zero base with negative exponent");
        if (base < 0.0 && value != std::floor(value))
          throw Error(ErrorCode::Domain, "pow: negative base with non-integer exponent");
        v = std::pow(base, value);
        break;
      }
      case Op::Neg: v = -val_[a]; break;
      case Op::Exp: v = std::exp(val_[a]); break;
      case Op::Ln:
        if (val_[a] <= 0.0)
          throw Error(ErrorCode::Domain, "ln of non-positive argument");
        v = std::log(val_[a]);
        break;
      case Op::Sin: v = std::sin(val_[a]); break;
      case Op::Cos: v = std::cos(val_[a]); break;
    }
    val_[id] = v;
    done_[id] = 1;
    stack.pop_back();
  }
  return val_[root.id];
}

double eval(const ExprPool& pool, Expr e, const Point& p) {
  EvalContext ctx(pool, p);
  return ctx.eval(e);
}

}  // namespace gri
