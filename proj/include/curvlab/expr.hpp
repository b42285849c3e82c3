#pragma once
// Symbolic scalar expression kernel: immutable, hash-consed expression trees
// over named symbols, with exact differentiation and cached numeric evaluation.
//
// Expression grammar accepted by ExprPool::parse (EBNF):
//
//   expr    := term { ("+" | "-") term }
//   term    := unary { ("*" | "/") unary }
//   unary   := "-" unary | postfix
//   postfix := primary [ "^" [ "-" ] integer ]
//   primary := number | ident | ident "(" expr ")" | "(" expr ")"
//   number  := digits [ "." digits ]
//   ident   := letter { letter | digit | "_" }
//
// The only function identifiers are "sin" and "cos".  Every other identifier
// must name a symbol already registered in the pool.  Numeric literals are
// stored as exact rationals ("0.25" becomes 1/4).  Simplification is limited
// to constant folding, neutral-element elimination (x+0, x*1, x*0), double
// negation, and power flattening; there is no canonical form.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace curvlab {

// Thrown when numeric evaluation hits a pole (division by zero, 0^-k) or a
// non-finite intermediate value.
class singular_evaluation : public std::runtime_error {
public:
  explicit singular_evaluation(const std::string& what)
      : std::runtime_error(what) {}
};

class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, std::size_t pos)
      : std::runtime_error(what), position(pos) {}
  std::size_t position;
};

// Exact rational with 64-bit numerator/denominator.  Arithmetic is checked
// through 128-bit intermediates; on overflow the checked operations return
// nullopt and callers leave the expression unfolded instead of folding.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);
  static Rational integer(long long n) { return Rational(n, 1); }

  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
  bool is_zero() const { return num == 0; }
  bool is_one() const { return num == 1 && den == 1; }
  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  static std::optional<Rational> add(const Rational& a, const Rational& b);
  static std::optional<Rational> mul(const Rational& a, const Rational& b);
  static std::optional<Rational> div(const Rational& a, const Rational& b);
  static std::optional<Rational> pow(const Rational& a, int e);
  Rational negated() const { return Rational(-num, den); }
};

enum class ExprKind : std::uint8_t {
  Constant,
  Symbol,
  Add,  // n-ary
  Mul,  // n-ary
  Neg,
  Div,
  Pow,  // integer exponent
  Sin,
  Cos,
};

class ExprPool;
class ExprNode;
using Expr = const ExprNode*;

class ExprNode {
public:
  ExprKind kind;
  std::uint32_t id = 0;       // intern order, used for deterministic sorting
  Rational cval;              // Constant
  std::uint32_t sym = 0;      // Symbol: index into the pool's symbol table
  int expo = 0;               // Pow exponent
  std::vector<Expr> kids;

private:
  friend class ExprPool;
  friend class EvalContext;
  mutable std::uint64_t eval_epoch_ = 0;
  mutable double eval_val_ = 0.0;
};

// Total assignment of numeric values to pool symbols.
class Binding {
public:
  explicit Binding(std::size_t nsyms) : values_(nsyms, 0.0), set_(nsyms, false) {}
  void set(std::uint32_t sym, double v) {
    values_.at(sym) = v;
    set_.at(sym) = true;
  }
  bool has(std::uint32_t sym) const { return sym < set_.size() && set_[sym]; }
  double get(std::uint32_t sym) const { return values_.at(sym); }
  std::size_t size() const { return values_.size(); }

private:
  std::vector<double> values_;
  std::vector<bool> set_;
};

// Owns interned nodes, the symbol table, and the derivative cache.
// Expressions returned by a pool are valid for the pool's lifetime.
class ExprPool {
public:
  ExprPool();
  ExprPool(const ExprPool&) = delete;
  ExprPool& operator=(const ExprPool&) = delete;

  // --- symbols -----------------------------------------------------------
  Expr symbol(const std::string& name);               // registers on first use
  std::optional<std::uint32_t> find_symbol(const std::string& name) const;
  const std::string& symbol_name(std::uint32_t idx) const;
  std::size_t symbol_count() const { return sym_names_.size(); }

  Binding make_binding() const { return Binding(sym_names_.size()); }

  // --- constructors ------------------------------------------------------
  Expr constant(const Rational& r);
  Expr integer(long long n) { return constant(Rational::integer(n)); }
  Expr zero() { return integer(0); }
  Expr one() { return integer(1); }
  Expr add(std::vector<Expr> terms);
  Expr add(Expr a, Expr b) { return add(std::vector<Expr>{a, b}); }
  Expr sub(Expr a, Expr b) { return add(a, neg(b)); }
  Expr mul(std::vector<Expr> factors);
  Expr mul(Expr a, Expr b) { return mul(std::vector<Expr>{a, b}); }
  Expr neg(Expr e);
  Expr div(Expr a, Expr b);
  Expr pow(Expr base, int e);
  Expr sin(Expr e);
  Expr cos(Expr e);

  // --- calculus ----------------------------------------------------------
  // Exact partial derivative with respect to a registered symbol.  Symbols
  // other than `v` (parameters included) differentiate to zero.
  Expr differentiate(Expr e, std::uint32_t v);
  Expr differentiate(Expr e, Expr symbol_node);

  // --- parsing -----------------------------------------------------------
  // Identifiers must already be registered (or be sin/cos); throws
  // parse_error with position otherwise.
  Expr parse(const std::string& text);

  // --- introspection -----------------------------------------------------
  std::size_t node_count() const { return nodes_.size(); }
  std::string to_string(Expr e) const;

private:
  friend class EvalContext;

  struct NodeKey {
    ExprKind kind;
    long long a = 0, b = 0;  // cval num/den, or symbol index, or exponent
    std::vector<std::uint32_t> kid_ids;
    bool operator==(const NodeKey& o) const {
      return kind == o.kind && a == o.a && b == o.b && kid_ids == o.kid_ids;
    }
  };
  struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const;
  };

  Expr intern(ExprKind kind, NodeKey key, std::vector<Expr> kids,
              Rational cval = {}, std::uint32_t sym = 0, int expo = 0);

  std::vector<std::unique_ptr<ExprNode>> nodes_;
  std::unordered_map<NodeKey, Expr, NodeKeyHash> table_;
  std::vector<std::string> sym_names_;
  std::unordered_map<std::string, std::uint32_t> sym_index_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Expr> deriv_cache_;
  mutable std::uint64_t epoch_ = 0;
};

// One numeric evaluation pass at a fixed binding.  Values are memoised on the
// shared expression DAG, so evaluating many tensor components at the same
// point costs one visit per distinct node.  Construction is cheap.
class EvalContext {
public:
  EvalContext(const ExprPool& pool, const Binding& binding);
  double operator()(Expr e) const;

private:
  const ExprPool& pool_;
  const Binding& binding_;
  std::uint64_t epoch_;
  double eval(Expr e) const;
};

// Convenience single-shot evaluation (no cache sharing across calls).
double evaluate(const ExprPool& pool, Expr e, const Binding& b);

}  // namespace curvlab
