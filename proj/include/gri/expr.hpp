#ifndef GRI_EXPR_HPP
#define GRI_EXPR_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gri {

enum class ErrorCode {
  Syntax,
  UnknownIdentifier,
  Domain,
  DimensionUnsupported,
  SingularMetric,
  RankUnsupported,
  InvalidKind,
  GenerationFailed,
  ShapeMismatch,
  Validation,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

enum class Op : uint8_t {
  Constant,
  Coord,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // base ^ real exponent
  Neg,
  Exp,
  Ln,
  Sin,
  Cos,
};

/// Handle into an ExprPool. Hash-consed: structural equality of the
/// underlying DAG nodes implies handle equality.
struct Expr {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
  friend bool operator==(Expr a, Expr b) { return a.id == b.id; }
  friend bool operator!=(Expr a, Expr b) { return a.id != b.id; }
};

struct Point {
  std::vector<double> x;
};

/// Arena of interned expression nodes. Children always precede parents,
/// so node order is a topological order of the DAG.
///
/// Construction (parse / diff / builders) is a single-threaded phase;
/// once built, the pool is immutable and safe for concurrent readers.
class ExprPool {
public:
  ExprPool();

  Expr constant(double v);
  Expr coord(int index);
  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr mul(Expr a, Expr b);
  Expr div(Expr a, Expr b);
  Expr pow(Expr base, double exponent);
  Expr neg(Expr a);
  Expr exp(Expr a);
  Expr ln(Expr a);
  Expr sin(Expr a);
  Expr cos(Expr a);

  Expr zero() const { return zero_; }
  Expr one() const { return one_; }

  /// Exact symbolic partial derivative with respect to coordinate k.
  Expr diff(Expr e, int k);

  /// Parse `text` over the declared coordinate names.
  Expr parse(std::string_view text, std::span<const std::string> coords);

  /// Render a parseable infix form (for SpaceFile round trips).
  std::string to_string(Expr e, std::span<const std::string> coords) const;

  size_t size() const { return nodes_.size(); }

  Op op(Expr e) const { return nodes_[e.id].op; }
  Expr child_a(Expr e) const { return Expr{nodes_[e.id].a}; }
  Expr child_b(Expr e) const { return Expr{nodes_[e.id].b}; }
  double value(Expr e) const { return nodes_[e.id].value; }
  int coord_index(Expr e) const { return static_cast<int>(nodes_[e.id].a); }

private:
  struct Node {
    Op op;
    uint32_t a = UINT32_MAX;
    uint32_t b = UINT32_MAX;
    double value = 0.0;  // Constant payload or Pow exponent
  };

  struct Key {
    Op op;
    uint32_t a, b;
    uint64_t bits;
    bool operator==(const Key& o) const {
      return op == o.op && a == o.a && b == o.b && bits == o.bits;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };

  Expr intern(Op op, uint32_t a, uint32_t b, double value);
  bool is_const(Expr e, double v) const;

  std::vector<Node> nodes_;
  std::unordered_map<Key, uint32_t, KeyHash> table_;
  std::unordered_map<uint64_t, Expr> diff_cache_;
  Expr zero_, one_;

  friend class EvalContext;
};

/// Per-point evaluation with memoization. One context per (point, thread);
/// contexts are never shared.
class EvalContext {
public:
  EvalContext(const ExprPool& pool, const Point& p);

  /// Value of e at the context's point. Each DAG node is computed at most
  /// once per context. Throws Error(Domain) on ln(x<=0), division by zero,
  /// or an invalid pow base.
  double eval(Expr e);

private:
  const ExprPool& pool_;
  Point point_;
  std::vector<double> val_;
  std::vector<uint8_t> done_;
};

/// Convenience one-shot evaluation.
double eval(const ExprPool& pool, Expr e, const Point& p);

}  // namespace gri

#endif
