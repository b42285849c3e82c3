#include "curvlab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace curvlab {

// ---------------------------------------------------------------- Rational

namespace {

using i128 = __int128;

bool fits64(i128 v) {
  return v >= static_cast<i128>(INT64_MIN) && v <= static_cast<i128>(INT64_MAX);
}

std::optional<Rational> make_rational(i128 num, i128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a != 0) {
    num /= a;
    den /= a;
  }
  if (!fits64(num) || !fits64(den)) return std::nullopt;
  Rational r;
  r.num = static_cast<long long>(num);
  r.den = static_cast<long long>(den);
  return r;
}

}  // namespace

Rational::Rational(long long n, long long d) {
  auto r = make_rational(n, d);
  if (!r) throw std::invalid_argument("rational: zero denominator or overflow");
  num = r->num;
  den = r->den;
}

std::optional<Rational> Rational::add(const Rational& a, const Rational& b) {
  return make_rational(static_cast<i128>(a.num) * b.den +
                           static_cast<i128>(b.num) * a.den,
                       static_cast<i128>(a.den) * b.den);
}

std::optional<Rational> Rational::mul(const Rational& a, const Rational& b) {
  return make_rational(static_cast<i128>(a.num) * b.num,
                       static_cast<i128>(a.den) * b.den);
}

std::optional<Rational> Rational::div(const Rational& a, const Rational& b) {
  if (b.num == 0) return std::nullopt;
  return make_rational(static_cast<i128>(a.num) * b.den,
                       static_cast<i128>(a.den) * b.num);
}

std::optional<Rational> Rational::pow(const Rational& a, int e) {
  Rational acc = Rational::integer(1);
  Rational base = a;
  int k = e;
  if (k < 0) {
    if (a.num == 0) return std::nullopt;
    auto inv = div(Rational::integer(1), a);
    if (!inv) return std::nullopt;
    base = *inv;
    k = -k;
  }
  while (k > 0) {
    if (k & 1) {
      auto r = mul(acc, base);
      if (!r) return std::nullopt;
      acc = *r;
    }
    k >>= 1;
    if (k) {
      auto r = mul(base, base);
      if (!r) return std::nullopt;
      base = *r;
    }
  }
  return acc;
}

// ---------------------------------------------------------------- ExprPool

std::size_t ExprPool::NodeKeyHash::operator()(const NodeKey& k) const {
  std::size_t h = std::hash<int>()(static_cast<int>(k.kind));
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(std::hash<long long>()(k.a));
  mix(std::hash<long long>()(k.b));
  for (auto id : k.kid_ids) mix(std::hash<std::uint32_t>()(id));
  return h;
}

ExprPool::ExprPool() = default;

Expr ExprPool::intern(ExprKind kind, NodeKey key, std::vector<Expr> kids,
                      Rational cval, std::uint32_t sym, int expo) {
  auto it = table_.find(key);
  if (it != table_.end()) return it->second;
  auto node = std::make_unique<ExprNode>();
  node->kind = kind;
  node->id = static_cast<std::uint32_t>(nodes_.size());
  node->cval = cval;
  node->sym = sym;
  node->expo = expo;
  node->kids = std::move(kids);
  Expr e = node.get();
  nodes_.push_back(std::move(node));
  table_.emplace(std::move(key), e);
  return e;
}

Expr ExprPool::symbol(const std::string& name) {
  auto it = sym_index_.find(name);
  std::uint32_t idx;
  if (it != sym_index_.end()) {
    idx = it->second;
  } else {
    idx = static_cast<std::uint32_t>(sym_names_.size());
    sym_names_.push_back(name);
    sym_index_.emplace(name, idx);
  }
  NodeKey key{ExprKind::Symbol, idx, 0, {}};
  return intern(ExprKind::Symbol, std::move(key), {}, {}, idx);
}

std::optional<std::uint32_t> ExprPool::find_symbol(
    const std::string& name) const {
  auto it = sym_index_.find(name);
  if (it == sym_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& ExprPool::symbol_name(std::uint32_t idx) const {
  return sym_names_.at(idx);
}

Expr ExprPool::constant(const Rational& r) {
  NodeKey key{ExprKind::Constant, r.num, r.den, {}};
  return intern(ExprKind::Constant, std::move(key), {}, r);
}

// Splits a summand into (rational coefficient, symbolic core).  A null core
// means the term is a pure constant.
namespace {
struct Term {
  Rational coeff;
  Expr core;  // nullptr for pure constants
};
}  // namespace

Expr ExprPool::add(std::vector<Expr> terms) {
  // Collect like terms: flatten nested sums, strip signs and constant
  // factors, and sum the rational coefficients of identical cores.  On
  // rational overflow fall back to an unfolded (still correct) sum.
  std::vector<Term> split;
  bool overflow = false;
  auto decompose = [&](auto&& self, Expr t, Rational mult) -> void {
    if (overflow) return;
    switch (t->kind) {
      case ExprKind::Constant: {
        if (auto p = Rational::mul(mult, t->cval))
          split.push_back({*p, nullptr});
        else
          overflow = true;
        return;
      }
      case ExprKind::Neg:
        self(self, t->kids[0], mult.negated());
        return;
      case ExprKind::Add:
        for (Expr k : t->kids) self(self, k, mult);
        return;
      case ExprKind::Mul: {
        for (std::size_t i = 0; i < t->kids.size(); ++i) {
          if (t->kids[i]->kind != ExprKind::Constant) continue;
          auto p = Rational::mul(mult, t->kids[i]->cval);
          if (!p) {
            overflow = true;
            return;
          }
          std::vector<Expr> rest;
          rest.reserve(t->kids.size() - 1);
          for (std::size_t j = 0; j < t->kids.size(); ++j)
            if (j != i) rest.push_back(t->kids[j]);
          split.push_back({*p, mul(std::move(rest))});
          return;
        }
        split.push_back({mult, t});
        return;
      }
      default:
        split.push_back({mult, t});
        return;
    }
  };
  for (Expr t : terms) decompose(decompose, t, Rational::integer(1));

  std::vector<Expr> flat;
  if (!overflow) {
    Rational csum = Rational::integer(0);
    std::unordered_map<Expr, Rational> by_core;
    std::vector<Expr> order;  // first-seen cores, for stable iteration
    for (const auto& [coeff, core] : split) {
      if (overflow) break;
      if (core == nullptr) {
        if (auto s = Rational::add(csum, coeff))
          csum = *s;
        else
          overflow = true;
        continue;
      }
      auto [it, fresh] = by_core.try_emplace(core, coeff);
      if (fresh) {
        order.push_back(core);
      } else if (auto s = Rational::add(it->second, coeff)) {
        it->second = *s;
      } else {
        overflow = true;
      }
    }
    if (!overflow) {
      for (Expr core : order) {
        const Rational& c = by_core.at(core);
        if (c.is_zero()) continue;
        if (c.is_one())
          flat.push_back(core);
        else if (c.num == -1 && c.den == 1)
          flat.push_back(neg(core));
        else
          flat.push_back(mul({constant(c), core}));
      }
      if (!csum.is_zero() || flat.empty()) flat.push_back(constant(csum));
    }
  }
  if (overflow) {
    // Correct but unfolded: keep every summand as-is (nested sums still
    // flattened so evaluation stays simple).
    flat.clear();
    for (Expr t : terms) {
      if (t->kind == ExprKind::Add)
        flat.insert(flat.end(), t->kids.begin(), t->kids.end());
      else
        flat.push_back(t);
    }
    if (flat.empty()) flat.push_back(zero());
  }

  if (flat.size() == 1) return flat[0];
  std::sort(flat.begin(), flat.end(),
            [](Expr a, Expr b) { return a->id < b->id; });
  NodeKey key{ExprKind::Add, 0, 0, {}};
  key.kid_ids.reserve(flat.size());
  for (Expr t : flat) key.kid_ids.push_back(t->id);
  return intern(ExprKind::Add, std::move(key), std::move(flat));
}

Expr ExprPool::mul(std::vector<Expr> factors) {
  // Collect powers of a common base, fold the constant prefactor, and hoist
  // signs: sin(x)*sin(x) becomes sin(x)^2 and -x*-y becomes x*y.
  Rational cprod = Rational::integer(1);
  bool overflow = false;
  bool negate = false;
  std::unordered_map<Expr, long long> expo_by_base;
  std::vector<Expr> order;  // first-seen bases, for stable iteration
  auto record = [&](Expr base, long long e) {
    auto [it, fresh] = expo_by_base.try_emplace(base, e);
    if (fresh)
      order.push_back(base);
    else
      it->second += e;
  };
  auto decompose = [&](auto&& self, Expr f) -> void {
    switch (f->kind) {
      case ExprKind::Constant:
        if (!overflow) {
          if (auto p = Rational::mul(cprod, f->cval))
            cprod = *p;
          else
            overflow = true;
        }
        if (overflow) record(f, 1);
        return;
      case ExprKind::Neg:
        negate = !negate;
        self(self, f->kids[0]);
        return;
      case ExprKind::Mul:
        for (Expr k : f->kids) self(self, k);
        return;
      case ExprKind::Pow:
        record(f->kids[0], f->expo);
        return;
      default:
        record(f, 1);
        return;
    }
  };
  for (Expr f : factors) decompose(decompose, f);
  if (!overflow && cprod.is_zero()) return zero();

  std::vector<Expr> flat;
  for (Expr base : order) {
    long long e = expo_by_base.at(base);
    if (e == 0) continue;  // removable x^k * x^-k pair
    if (e < INT32_MIN || e > INT32_MAX) throw std::overflow_error("exponent");
    flat.push_back(pow(base, static_cast<int>(e)));
  }
  if (negate) cprod = cprod.negated();
  bool neg_out = false;
  if (!cprod.is_one() || flat.empty()) {
    if (cprod.num == -1 && cprod.den == 1 && !flat.empty())
      neg_out = true;  // prefer Neg(product) over a -1 factor
    else
      flat.push_back(constant(cprod));
  }

  Expr prod;
  if (flat.size() == 1) {
    prod = flat[0];
  } else {
    std::sort(flat.begin(), flat.end(),
              [](Expr a, Expr b) { return a->id < b->id; });
    NodeKey key{ExprKind::Mul, 0, 0, {}};
    key.kid_ids.reserve(flat.size());
    for (Expr f : flat) key.kid_ids.push_back(f->id);
    prod = intern(ExprKind::Mul, std::move(key), std::move(flat));
  }
  return neg_out ? neg(prod) : prod;
}

Expr ExprPool::neg(Expr e) {
  if (e->kind == ExprKind::Constant) return constant(e->cval.negated());
  if (e->kind == ExprKind::Neg) return e->kids[0];
  NodeKey key{ExprKind::Neg, 0, 0, {e->id}};
  return intern(ExprKind::Neg, std::move(key), {e});
}

Expr ExprPool::div(Expr a, Expr b) {
  if (a->kind == ExprKind::Constant && a->cval.is_zero()) return a;
  if (b->kind == ExprKind::Constant) {
    if (auto inv = Rational::div(Rational::integer(1), b->cval)) {
      if (inv->is_one()) return a;
      return mul(a, constant(*inv));
    }
  }
  NodeKey key{ExprKind::Div, 0, 0, {a->id, b->id}};
  return intern(ExprKind::Div, std::move(key), {a, b});
}

Expr ExprPool::pow(Expr base, int e) {
  if (e == 0) return one();
  if (e == 1) return base;
  if (base->kind == ExprKind::Constant) {
    if (auto p = Rational::pow(base->cval, e)) return constant(*p);
  }
  if (base->kind == ExprKind::Pow) {
    long long combined = static_cast<long long>(base->expo) * e;
    if (combined >= INT32_MIN && combined <= INT32_MAX)
      return pow(base->kids[0], static_cast<int>(combined));
  }
  NodeKey key{ExprKind::Pow, e, 0, {base->id}};
  return intern(ExprKind::Pow, std::move(key), {base}, {}, 0, e);
}

Expr ExprPool::sin(Expr e) {
  if (e->kind == ExprKind::Constant && e->cval.is_zero()) return zero();
  NodeKey key{ExprKind::Sin, 0, 0, {e->id}};
  return intern(ExprKind::Sin, std::move(key), {e});
}

Expr ExprPool::cos(Expr e) {
  if (e->kind == ExprKind::Constant && e->cval.is_zero()) return one();
  NodeKey key{ExprKind::Cos, 0, 0, {e->id}};
  return intern(ExprKind::Cos, std::move(key), {e});
}

// ---------------------------------------------------------------- calculus

Expr ExprPool::differentiate(Expr e, Expr symbol_node) {
  if (symbol_node->kind != ExprKind::Symbol)
    throw std::invalid_argument("differentiate: not a symbol");
  return differentiate(e, symbol_node->sym);
}

Expr ExprPool::differentiate(Expr e, std::uint32_t v) {
  auto ck = std::make_pair(e->id, v);
  if (auto it = deriv_cache_.find(ck); it != deriv_cache_.end())
    return it->second;
  Expr d = nullptr;
  switch (e->kind) {
    case ExprKind::Constant:
      d = zero();
      break;
    case ExprKind::Symbol:
      d = (e->sym == v) ? one() : zero();
      break;
    case ExprKind::Add: {
      std::vector<Expr> ds;
      ds.reserve(e->kids.size());
      for (Expr k : e->kids) ds.push_back(differentiate(k, v));
      d = add(std::move(ds));
      break;
    }
    case ExprKind::Mul: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        Expr dk = differentiate(e->kids[i], v);
        if (dk->kind == ExprKind::Constant && dk->cval.is_zero()) continue;
        std::vector<Expr> fs;
        fs.reserve(e->kids.size());
        for (std::size_t j = 0; j < e->kids.size(); ++j)
          fs.push_back(i == j ? dk : e->kids[j]);
        terms.push_back(mul(std::move(fs)));
      }
      d = add(std::move(terms));
      break;
    }
    case ExprKind::Neg:
      d = neg(differentiate(e->kids[0], v));
      break;
    case ExprKind::Div: {
      Expr a = e->kids[0], b = e->kids[1];
      Expr da = differentiate(a, v), db = differentiate(b, v);
      // (da*b - a*db) / b^2
      d = div(sub(mul(da, b), mul(a, db)), pow(b, 2));
      break;
    }
    case ExprKind::Pow: {
      Expr base = e->kids[0];
      Expr db = differentiate(base, v);
      d = mul({integer(e->expo), pow(base, e->expo - 1), db});
      break;
    }
    case ExprKind::Sin:
      d = mul(cos(e->kids[0]), differentiate(e->kids[0], v));
      break;
    case ExprKind::Cos:
      d = neg(mul(sin(e->kids[0]), differentiate(e->kids[0], v)));
      break;
  }
  deriv_cache_.emplace(ck, d);
  return d;
}

// ---------------------------------------------------------------- evaluation

EvalContext::EvalContext(const ExprPool& pool, const Binding& binding)
    : pool_(pool), binding_(binding), epoch_(++pool.epoch_) {}

double EvalContext::operator()(Expr e) const { return eval(e); }

double EvalContext::eval(Expr e) const {
  if (e->eval_epoch_ == epoch_) return e->eval_val_;
  double v = 0.0;
  switch (e->kind) {
    case ExprKind::Constant:
      v = e->cval.value();
      break;
    case ExprKind::Symbol:
      if (!binding_.has(e->sym))
        throw std::invalid_argument("evaluate: unbound symbol " +
                                    pool_.symbol_name(e->sym));
      v = binding_.get(e->sym);
      break;
    case ExprKind::Add:
      for (Expr k : e->kids) v += eval(k);
      break;
    case ExprKind::Mul:
      v = 1.0;
      for (Expr k : e->kids) v *= eval(k);
      break;
    case ExprKind::Neg:
      v = -eval(e->kids[0]);
      break;
    case ExprKind::Div: {
      double num = eval(e->kids[0]);
      double den = eval(e->kids[1]);
      if (den == 0.0)
        throw singular_evaluation("division by zero at evaluation point");
      v = num / den;
      break;
    }
    case ExprKind::Pow: {
      double b = eval(e->kids[0]);
      int k = e->expo;
      if (k < 0 && b == 0.0)
        throw singular_evaluation("zero raised to negative power");
      double acc = 1.0;
      double base = k < 0 ? 1.0 / b : b;
      for (int i = 0, kk = k < 0 ? -k : k; i < kk; ++i) acc *= base;
      v = acc;
      break;
    }
    case ExprKind::Sin:
      v = std::sin(eval(e->kids[0]));
      break;
    case ExprKind::Cos:
      v = std::cos(eval(e->kids[0]));
      break;
  }
  if (!std::isfinite(v))
    throw singular_evaluation("non-finite value at evaluation point");
  e->eval_epoch_ = epoch_;
  e->eval_val_ = v;
  return v;
}

double evaluate(const ExprPool& pool, Expr e, const Binding& b) {
  EvalContext ctx(pool, b);
  return ctx(e);
}

// ---------------------------------------------------------------- parsing

namespace {

struct Parser {
  ExprPool& pool;
  const std::string& s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool peek(char c) {
    skip_ws();
    return i < s.size() && s[i] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c))
      throw parse_error(std::string("expected '") + c + "'", i);
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = pool.add(e, parse_term());
      else if (accept('-'))
        e = pool.sub(e, parse_term());
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = pool.mul(e, parse_unary());
      else if (accept('/'))
        e = pool.div(e, parse_unary());
      else
        return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return pool.neg(parse_unary());
    return parse_postfix();
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    if (accept('^')) {
      bool negexp = accept('-');
      skip_ws();
      std::size_t start = i;
      long long v = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        v = v * 10 + (s[i] - '0');
        if (v > INT32_MAX) throw parse_error("exponent too large", start);
        ++i;
      }
      if (i == start) throw parse_error("expected integer exponent", i);
      e = pool.pow(e, static_cast<int>(negexp ? -v : v));
    }
    return e;
  }

  Expr parse_primary() {
    skip_ws();
    if (i >= s.size()) throw parse_error("unexpected end of expression", i);
    char c = s[i];
    if (c == '(') {
      ++i;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    throw parse_error(std::string("unexpected character '") + c + "'", i);
  }

  Expr parse_number() {
    std::size_t start = i;
    long long intpart = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      if (intpart > (INT64_MAX - 9) / 10)
        throw parse_error("numeric literal too large", start);
      intpart = intpart * 10 + (s[i] - '0');
      ++i;
    }
    long long num = intpart, den = 1;
    if (i < s.size() && s[i] == '.') {
      ++i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        if (num > (INT64_MAX - 9) / 10 || den > INT64_MAX / 10)
          throw parse_error("numeric literal too precise", start);
        num = num * 10 + (s[i] - '0');
        den *= 10;
        ++i;
      }
    }
    return pool.constant(Rational(num, den));
  }

  Expr parse_ident() {
    std::size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) ||
                            s[i] == '_'))
      ++i;
    std::string name = s.substr(start, i - start);
    if (peek('(')) {
      ++i;
      Expr arg = parse_expr();
      expect(')');
      if (name == "sin") return pool.sin(arg);
      if (name == "cos") return pool.cos(arg);
      throw parse_error("unknown function '" + name + "'", start);
    }
    if (!pool.find_symbol(name))
      throw parse_error("unknown symbol '" + name + "'", start);
    return pool.symbol(name);
  }
};

}  // namespace

Expr ExprPool::parse(const std::string& text) {
  Parser p{*this, text};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.i != text.size())
    throw parse_error("trailing characters after expression", p.i);
  return e;
}

// ---------------------------------------------------------------- printing

namespace {

void print_node(std::ostringstream& os, const ExprPool& pool, Expr e) {
  auto paren = [&os, &pool](Expr k, bool need) {
    if (need) os << '(';
    print_node(os, pool, k);
    if (need) os << ')';
  };
  switch (e->kind) {
    case ExprKind::Constant:
      if (e->cval.den == 1)
        os << e->cval.num;
      else
        os << e->cval.num << '/' << e->cval.den;
      break;
    case ExprKind::Symbol:
      os << pool.symbol_name(e->sym);
      break;
    case ExprKind::Add:
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << " + ";
        print_node(os, pool, e->kids[i]);
      }
      break;
    case ExprKind::Mul:
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << '*';
        paren(e->kids[i], e->kids[i]->kind == ExprKind::Add);
      }
      break;
    case ExprKind::Neg:
      os << '-';
      paren(e->kids[0], e->kids[0]->kind == ExprKind::Add ||
                            e->kids[0]->kind == ExprKind::Mul);
      break;
    case ExprKind::Div:
      paren(e->kids[0], e->kids[0]->kind == ExprKind::Add);
      os << '/';
      paren(e->kids[1], e->kids[1]->kind != ExprKind::Constant &&
                            e->kids[1]->kind != ExprKind::Symbol);
      break;
    case ExprKind::Pow:
      paren(e->kids[0], e->kids[0]->kind != ExprKind::Constant &&
                            e->kids[0]->kind != ExprKind::Symbol);
      os << '^' << e->expo;
      break;
    case ExprKind::Sin:
      os << "sin(";
      print_node(os, pool, e->kids[0]);
      os << ')';
      break;
    case ExprKind::Cos:
      os << "cos(";
      print_node(os, pool, e->kids[0]);
      os << ')';
      break;
  }
}

}  // namespace

std::string ExprPool::to_string(Expr e) const {
  std::ostringstream os;
  print_node(os, *this, e);
  return os.str();
}

}  // namespace curvlab
