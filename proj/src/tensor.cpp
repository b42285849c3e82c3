#include "curvlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace curvlab {

// ------------------------------------------------------------------ TensorN

double TensorN::norm_inf() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

TensorN& TensorN::operator+=(const TensorN& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

TensorN& TensorN::operator-=(const TensorN& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

TensorN& TensorN::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

const char* to_string(CurvKind k) {
  switch (k) {
    case CurvKind::R: return "R";
    case CurvKind::C: return "C";
    case CurvKind::W: return "W";
    case CurvKind::K: return "K";
    case CurvKind::P: return "P";
  }
  return "?";
}

// ---------------------------------------------------------- Kulkarni-Nomizu

TensorS kulkarni_nomizu(ExprPool& pool, const TensorS& A, const TensorS& U) {
  const int n = A.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (A(i, j) != A(j, i) || U(i, j) != U(j, i))
        throw std::invalid_argument(
            "kulkarni_nomizu: inputs must be symmetric");
  TensorS out(n, 4, pool.zero());
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
          out(p, q, mu, nu) =
              pool.add({pool.mul(A(p, nu), U(q, mu)),
                        pool.neg(pool.mul(A(p, mu), U(q, nu))),
                        pool.mul(A(q, mu), U(p, nu)),
                        pool.neg(pool.mul(A(q, nu), U(p, mu)))});
  return out;
}

TensorN kulkarni_nomizu(const TensorN& A, const TensorN& U) {
  const int n = A.dim();
  const double scale =
      std::max({A.norm_inf(), U.norm_inf(), 1.0});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(A(i, j) - A(j, i)) > 1e-12 * scale ||
          std::abs(U(i, j) - U(j, i)) > 1e-12 * scale)
        throw std::invalid_argument(
            "kulkarni_nomizu: inputs must be symmetric");
  TensorN out(n, 4);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
          out(p, q, mu, nu) = A(p, nu) * U(q, mu) - A(p, mu) * U(q, nu) +
                              A(q, mu) * U(p, nu) - A(q, nu) * U(p, mu);
  return out;
}

TensorN outer(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  TensorN out(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a[i] * b[j];
  return out;
}

TensorN sym_outer(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  TensorN out(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a[i] * b[j] + b[i] * a[j];
  return out;
}

// ------------------------------------------------------------ slot plumbing

TensorN contract_slot(const TensorN& T, int slot, const TensorN& metric2) {
  const int n = T.dim();
  if (slot < 0 || slot >= T.rank())
    throw std::out_of_range("contract_slot: slot out of range");
  TensorN out(n, T.rank(), 0.0, T.ncontra());
  std::vector<int> ix(T.rank(), 0);
  do {
    double acc = 0.0;
    std::vector<int> jx = ix;
    for (int e = 0; e < n; ++e) {
      jx[slot] = e;
      acc += metric2(ix[slot], e) * T.get(jx);
    }
    out.set(ix, acc);
  } while (advance_index(ix, n));
  return out;
}

TensorN raise_slot(const TensorN& T, int slot, const TensorN& ginv) {
  return contract_slot(T, slot, ginv);
}

TensorN lower_slot(const TensorN& T, int slot, const TensorN& g) {
  return contract_slot(T, slot, g);
}

TensorN trace_slots(const TensorN& T, int s1, int s2, const TensorN* ginv) {
  const int n = T.dim();
  const int r = T.rank();
  if (s1 == s2 || s1 < 0 || s2 < 0 || s1 >= r || s2 >= r)
    throw std::out_of_range("trace_slots: bad slots");
  TensorN out(n, r - 2);
  std::vector<int> ox(std::max(r - 2, 0), 0);
  std::vector<int> ix(r, 0);
  do {
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double w = ginv ? (*ginv)(a, b) : (a == b ? 1.0 : 0.0);
        if (w == 0.0) continue;
        int k = 0;
        for (int s = 0; s < r; ++s) {
          if (s == s1) {
            ix[s] = a;
          } else if (s == s2) {
            ix[s] = b;
          } else {
            ix[s] = ox[k++];
          }
        }
        acc += w * T.get(ix);
      }
    out.set(ox, acc);
  } while (!ox.empty() && advance_index(ox, n));
  return out;
}

// ------------------------------------------------------------------- Tower

Tower::Tower(MetricSpec spec) : spec_(std::move(spec)) {}

const TensorS& Tower::metric() {
  if (!g_) {
    const int n = this->n();
    TensorS g(n, 2, pool().zero());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = spec_.g[i][j];
    g_ = std::move(g);
  }
  return *g_;
}

Expr Tower::det_g() {
  if (!det_) {
    // Cofactor expansion over the first row, recursively on index subsets.
    const int n = this->n();
    const TensorS& g = metric();
    std::vector<int> rows(n), cols(n);
    for (int i = 0; i < n; ++i) rows[i] = cols[i] = i;
    auto rec = [&](auto&& self, std::vector<int> rs,
                   std::vector<int> cs) -> Expr {
      if (rs.size() == 1) return g(rs[0], cs[0]);
      std::vector<Expr> terms;
      std::vector<int> sub_rs(rs.begin() + 1, rs.end());
      for (std::size_t j = 0; j < cs.size(); ++j) {
        Expr gij = g(rs[0], cs[j]);
        if (gij->kind == ExprKind::Constant && gij->cval.is_zero()) continue;
        std::vector<int> sub_cs;
        for (std::size_t k = 0; k < cs.size(); ++k)
          if (k != j) sub_cs.push_back(cs[k]);
        Expr minor = self(self, sub_rs, sub_cs);
        Expr term = pool().mul(gij, minor);
        terms.push_back(j % 2 == 0 ? term : pool().neg(term));
      }
      return pool().add(std::move(terms));
    };
    det_ = rec(rec, rows, cols);
  }
  return det_;
}

const TensorS& Tower::inverse_metric() {
  if (!gi_) {
    const int n = this->n();
    const TensorS& g = metric();
    Expr det = det_g();
    TensorS gi(n, 2, pool().zero(), 2);
    // adj(g)_{ji} / det: cofactor C_{ij} = (-1)^{i+j} det(minor_ij).  g is
    // symmetric, so the adjugate is too; mirror the upper triangle.
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        std::vector<int> rs, cs;
        for (int k = 0; k < n; ++k) {
          if (k != i) rs.push_back(k);
          if (k != j) cs.push_back(k);
        }
        auto rec = [&](auto&& self, std::vector<int> rrs,
                       std::vector<int> rcs) -> Expr {
          if (rrs.empty()) return pool().one();
          if (rrs.size() == 1) return g(rrs[0], rcs[0]);
          std::vector<Expr> terms;
          std::vector<int> sub_rs(rrs.begin() + 1, rrs.end());
          for (std::size_t c = 0; c < rcs.size(); ++c) {
            Expr gij = g(rrs[0], rcs[c]);
            if (gij->kind == ExprKind::Constant && gij->cval.is_zero())
              continue;
            std::vector<int> sub_cs;
            for (std::size_t k = 0; k < rcs.size(); ++k)
              if (k != c) sub_cs.push_back(rcs[k]);
            Expr term = pool().mul(gij, self(self, sub_rs, sub_cs));
            terms.push_back(c % 2 == 0 ? term : pool().neg(term));
          }
          return pool().add(std::move(terms));
        };
        Expr minor = rec(rec, rs, cs);
        Expr cof = ((i + j) % 2 == 0) ? minor : pool().neg(minor);
        Expr entry = pool().div(cof, det);
        gi(i, j) = entry;
        gi(j, i) = entry;
      }
    gi_ = std::move(gi);
  }
  return *gi_;
}

const TensorS& Tower::christoffel() {
  if (!gamma_) {
    const int n = this->n();
    const TensorS& g = metric();
    const TensorS& gi = inverse_metric();
    // dg(k, i, j) = d_k g_{ij}
    TensorS dg(n, 3, pool().zero());
    for (int k = 0; k < n; ++k) {
      std::uint32_t xk = spec_.coord_sym(k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dg(k, i, j) = pool().differentiate(g(i, j), xk);
    }
    TensorS gamma(n, 3, pool().zero(), 1);
    Expr half = pool().constant(Rational(1, 2));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          std::vector<Expr> terms;
          for (int d = 0; d < n; ++d) {
            Expr s = pool().add({dg(b, d, c), dg(c, b, d),
                                 pool().neg(dg(d, b, c))});
            terms.push_back(pool().mul(gi(a, d), s));
          }
          gamma(a, b, c) = pool().mul(half, pool().add(std::move(terms)));
        }
    gamma_ = std::move(gamma);
  }
  return *gamma_;
}

const TensorS& Tower::riemann13() {
  if (!r13_) {
    const int n = this->n();
    const TensorS& G = christoffel();
    // dG(mu, a, q, nu) = d_mu G^a_{q nu}
    TensorS dG(n, 4, pool().zero());
    for (int mu = 0; mu < n; ++mu) {
      std::uint32_t x = spec_.coord_sym(mu);
      for (int a = 0; a < n; ++a)
        for (int q = 0; q < n; ++q)
          for (int nu = 0; nu < n; ++nu)
            dG(mu, a, q, nu) = pool().differentiate(G(a, q, nu), x);
    }
    TensorS rt(n, 4, pool().zero(), 1);
    for (int a = 0; a < n; ++a)
      for (int q = 0; q < n; ++q)
        for (int mu = 0; mu < n; ++mu)
          for (int nu = 0; nu < n; ++nu) {
            std::vector<Expr> terms = {dG(mu, a, q, nu),
                                       pool().neg(dG(nu, a, q, mu))};
            for (int b = 0; b < n; ++b) {
              terms.push_back(pool().mul(G(b, q, nu), G(a, b, mu)));
              terms.push_back(
                  pool().neg(pool().mul(G(b, q, mu), G(a, b, nu))));
            }
            rt(a, q, mu, nu) = pool().add(std::move(terms));
          }
    r13_ = std::move(rt);
  }
  return *r13_;
}

const TensorS& Tower::ricci() {
  if (!ricci_) {
    const int n = this->n();
    const TensorS& rt = riemann13();
    // Ricci is symmetric; build the upper triangle and mirror the same node
    // so the tensor is symmetric structurally (not just numerically).
    TensorS s(n, 2, pool().zero());
    for (int q = 0; q < n; ++q)
      for (int nu = q; nu < n; ++nu) {
        std::vector<Expr> terms;
        for (int a = 0; a < n; ++a) terms.push_back(rt(a, q, nu, a));
        Expr e = pool().add(std::move(terms));
        s(q, nu) = e;
        s(nu, q) = e;
      }
    ricci_ = std::move(s);
  }
  return *ricci_;
}

Expr Tower::scalar_curvature() {
  if (!kappa_) {
    const int n = this->n();
    const TensorS& s = ricci();
    const TensorS& gi = inverse_metric();
    std::vector<Expr> terms;
    for (int q = 0; q < n; ++q)
      for (int nu = 0; nu < n; ++nu)
        terms.push_back(pool().mul(gi(q, nu), s(q, nu)));
    kappa_ = pool().add(std::move(terms));
  }
  return kappa_;
}

const TensorS& Tower::ricci_operator() {
  if (!jop_) {
    const int n = this->n();
    const TensorS& s = ricci();
    const TensorS& gi = inverse_metric();
    TensorS j(n, 2, pool().zero(), 1);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        std::vector<Expr> terms;
        for (int c = 0; c < n; ++c)
          terms.push_back(pool().mul(gi(a, c), s(c, b)));
        j(a, b) = pool().add(std::move(terms));
      }
    jop_ = std::move(j);
  }
  return *jop_;
}

const TensorS& Tower::kn_gg() {
  if (!kn_gg_) kn_gg_ = kulkarni_nomizu(pool(), metric(), metric());
  return *kn_gg_;
}

const TensorS& Tower::kn_gs() {
  if (!kn_gs_) kn_gs_ = kulkarni_nomizu(pool(), metric(), ricci());
  return *kn_gs_;
}

const TensorS& Tower::kn_ss() {
  if (!kn_ss_) kn_ss_ = kulkarni_nomizu(pool(), ricci(), ricci());
  return *kn_ss_;
}

const TensorS& Tower::riemann() {
  if (!r04_) {
    const int n = this->n();
    const TensorS& rt = riemann13();
    const TensorS& g = metric();
    TensorS r(n, 4, pool().zero());
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int mu = 0; mu < n; ++mu)
          for (int nu = 0; nu < n; ++nu) {
            std::vector<Expr> terms;
            for (int a = 0; a < n; ++a)
              terms.push_back(pool().mul(g(p, a), rt(a, q, mu, nu)));
            r(p, q, mu, nu) = pool().add(std::move(terms));
          }
    r04_ = std::move(r);
  }
  return *r04_;
}

const TensorS& Tower::curvature(CurvKind kind) {
  if (kind == CurvKind::R) return riemann();
  const int n = this->n();
  auto scaled = [&](Expr coeff, const TensorS& T) {
    TensorS out(n, 4, pool().zero());
    std::vector<int> ix(4, 0);
    do {
      out.set(ix, pool().mul(coeff, T.get(ix)));
    } while (advance_index(ix, n));
    return out;
  };
  auto sum4 = [&](const TensorS& A, const TensorS& B) {
    TensorS out(n, 4, pool().zero());
    std::vector<int> ix(4, 0);
    do {
      out.set(ix, pool().add(A.get(ix), B.get(ix)));
    } while (advance_index(ix, n));
    return out;
  };
  switch (kind) {
    case CurvKind::C:
      if (!c_) {
        Expr cg = pool().mul(scalar_curvature(),
                             pool().constant(Rational(1, 2LL * (n - 1) *
                                                             (n - 2))));
        Expr cs = pool().constant(Rational(-1, n - 2));
        c_ = sum4(riemann(),
                  sum4(scaled(cg, kn_gg()), scaled(cs, kn_gs())));
      }
      return *c_;
    case CurvKind::W:
      if (!w_) {
        Expr cw = pool().neg(pool().mul(
            scalar_curvature(),
            pool().constant(Rational(1, 2LL * n * (n - 1)))));
        w_ = sum4(riemann(), scaled(cw, kn_gg()));
      }
      return *w_;
    case CurvKind::K:
      if (!k_) {
        Expr ck = pool().constant(Rational(-1, n - 2));
        k_ = sum4(riemann(), scaled(ck, kn_gs()));
      }
      return *k_;
    case CurvKind::P:
      if (!p_) {
        const TensorS& g = metric();
        const TensorS& s = ricci();
        Expr cp = pool().constant(Rational(1, n - 1));
        TensorS out(n, 4, pool().zero());
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            for (int mu = 0; mu < n; ++mu)
              for (int nu = 0; nu < n; ++nu) {
                Expr corr = pool().sub(pool().mul(g(p, nu), s(q, mu)),
                                       pool().mul(g(q, nu), s(p, mu)));
                out(p, q, mu, nu) = pool().sub(riemann()(p, q, mu, nu),
                                               pool().mul(cp, corr));
              }
        p_ = std::move(out);
      }
      return *p_;
    default:
      return riemann();
  }
}

TensorS Tower::covariant_derivative(const TensorS& T) {
  const int n = this->n();
  const int r = T.rank();
  const int nc = T.ncontra();
  const TensorS& G = christoffel();
  TensorS out(n, r + 1, pool().zero(), nc);
  std::vector<int> ix(r, 0);
  do {
    for (int f = 0; f < n; ++f) {
      std::vector<Expr> terms;
      terms.push_back(pool().differentiate(T.get(ix), spec_.coord_sym(f)));
      std::vector<int> jx = ix;
      for (int s = 0; s < r; ++s) {
        for (int e = 0; e < n; ++e) {
          jx[s] = e;
          Expr prod;
          if (s < nc)  // contravariant slot: + G^{a_s}_{f e} T^{..e..}
            prod = pool().mul(G(ix[s], f, e), T.get(jx));
          else  // covariant slot: - G^{e}_{f b_s} T_{..e..}
            prod = pool().neg(pool().mul(G(e, f, ix[s]), T.get(jx)));
          terms.push_back(prod);
        }
        jx[s] = ix[s];
      }
      std::vector<int> ox = ix;
      ox.push_back(f);
      out.set(ox, pool().add(std::move(terms)));
    }
  } while (advance_index(ix, n));
  return out;
}

const TensorS& Tower::grad_curvature(CurvKind kind) {
  auto it = grads_.find(kind);
  if (it == grads_.end())
    it = grads_.emplace(kind, covariant_derivative(curvature(kind))).first;
  return it->second;
}

const TensorS& Tower::grad_ricci() {
  if (!grad_s_) grad_s_ = covariant_derivative(ricci());
  return *grad_s_;
}

// ------------------------------------------------------------------ TowerAt

TowerAt::TowerAt(Tower& tower, const Binding& at)
    : tower_(tower), binding_(at), ctx_(tower.pool(), binding_) {}

TensorN TowerAt::eval(const TensorS& T) {
  TensorN out(T.dim(), T.rank(), 0.0, T.ncontra());
  const auto& src = T.flat();
  for (std::size_t i = 0; i < src.size(); ++i) out.fat(i) = ctx_(src[i]);
  return out;
}

const TensorN& TowerAt::memo(const TensorS& sym) {
  auto it = cache_.find(&sym);
  if (it == cache_.end()) it = cache_.emplace(&sym, eval(sym)).first;
  return it->second;
}

const TensorN& TowerAt::metric() { return memo(tower_.metric()); }
const TensorN& TowerAt::inverse_metric() {
  return memo(tower_.inverse_metric());
}
const TensorN& TowerAt::christoffel() { return memo(tower_.christoffel()); }
const TensorN& TowerAt::riemann13() { return memo(tower_.riemann13()); }
const TensorN& TowerAt::ricci() { return memo(tower_.ricci()); }
double TowerAt::scalar_curvature() { return ctx_(tower_.scalar_curvature()); }
const TensorN& TowerAt::kn_gg() { return memo(tower_.kn_gg()); }
const TensorN& TowerAt::kn_gs() { return memo(tower_.kn_gs()); }
const TensorN& TowerAt::kn_ss() { return memo(tower_.kn_ss()); }
const TensorN& TowerAt::curvature(CurvKind kind) {
  return memo(tower_.curvature(kind));
}
const TensorN& TowerAt::grad_curvature(CurvKind kind) {
  return memo(tower_.grad_curvature(kind));
}
const TensorN& TowerAt::grad_ricci() { return memo(tower_.grad_ricci()); }

const TensorN& TowerAt::ricci_power(int k) {
  if (k < 1) throw std::invalid_argument("ricci_power: k >= 1 required");
  auto it = spower_.find(k);
  if (it != spower_.end()) return it->second;
  if (k == 1) return spower_.emplace(1, ricci()).first->second;
  const TensorN& prev = ricci_power(k - 1);
  const TensorN& s = ricci();
  const TensorN& gi = inverse_metric();
  const int n = this->n();
  TensorN out(n, 2);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double acc = 0.0;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          acc += prev(a, c) * gi(c, d) * s(d, b);
      out(a, b) = acc;
    }
  return spower_.emplace(k, std::move(out)).first->second;
}

}  // namespace curvlab
