#pragma once
// Dense coordinate tensors (symbolic and numeric), the curvature pipeline
// from a metric spec (Christoffel -> Riemann -> Ricci -> derived tensors ->
// covariant derivatives), Kulkarni-Nomizu products, and per-point numeric
// snapshots.
//
// Conventions (fixed; the golden tables are only reproducible under these):
//   Riemann (1,3):  Rt^a_{q mu nu} = d_mu G^a_{q nu} - d_nu G^a_{q mu}
//                                  + G^b_{q nu} G^a_{b mu}
//                                  - G^b_{q mu} G^a_{b nu}
//   Riemann (0,4):  R_{p q mu nu} = g_{p a} Rt^a_{q mu nu}
//   Ricci:          S_{q nu} = sum_a Rt^a_{q nu a}      (note the slot order;
//                   this is the opposite sign of the d_a G^a_{q nu} - ...
//                   convention used by some textbooks)
//   Scalar:         kappa = g^{q nu} S_{q nu}
//   Kulkarni-Nomizu: (A ^ U)_{pqmn} = A_{pn} U_{qm} - A_{pm} U_{qn}
//                                   + A_{qm} U_{pn} - A_{qn} U_{pm}
//   Derived (dimension n):
//     conformal   C = R + kappa/(2(n-1)(n-2)) g^g - 1/(n-2) g^S
//     concircular W = R - kappa/(2n(n-1)) g^g
//     conharmonic K = R - 1/(n-2) g^S
//     projective  P_{pqmn} = R_{pqmn} - 1/(n-1) (g_{pn} S_{qm} - g_{qn} S_{pm})
//   Covariant derivative: the new slot is LAST, (grad T)_{a...z,f} = D_f T_{a...z}.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "curvlab/chart.hpp"
#include "curvlab/expr.hpp"

namespace curvlab {

// Odometer over rank-many indices in [0, n).  Returns false after the last
// combination.  Start from an all-zero vector.
inline bool advance_index(std::vector<int>& ix, int n) {
  for (int k = static_cast<int>(ix.size()) - 1; k >= 0; --k) {
    if (++ix[k] < n) return true;
    ix[k] = 0;
  }
  return false;
}

namespace detail {
template <class... I>
std::size_t flat_index(int dim, I... idx) {
  std::size_t f = 0;
  ((f = f * static_cast<std::size_t>(dim) + static_cast<std::size_t>(idx)),
   ...);
  return f;
}
inline std::size_t flat_index_v(int dim, const std::vector<int>& ix) {
  std::size_t f = 0;
  for (int i : ix) f = f * static_cast<std::size_t>(dim) + i;
  return f;
}
}  // namespace detail

// Dense symbolic tensor.  `ncontra` leading slots are contravariant; the
// rest are covariant.  The valence is advisory metadata: verification code
// re-checks symmetries numerically instead of trusting tags.
class TensorS {
public:
  TensorS() = default;
  TensorS(int dim, int rank, Expr fill, int ncontra = 0)
      : dim_(dim), rank_(rank), ncontra_(ncontra) {
    std::size_t sz = 1;
    for (int k = 0; k < rank; ++k) sz *= dim;
    c_.assign(sz, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  int ncontra() const { return ncontra_; }
  std::size_t size() const { return c_.size(); }

  template <class... I>
  Expr& operator()(I... idx) {
    static_assert((std::is_convertible_v<I, int> && ...));
    return c_[detail::flat_index(dim_, idx...)];
  }
  template <class... I>
  Expr operator()(I... idx) const {
    return c_[detail::flat_index(dim_, idx...)];
  }
  Expr get(const std::vector<int>& ix) const {
    return c_[detail::flat_index_v(dim_, ix)];
  }
  void set(const std::vector<int>& ix, Expr e) {
    c_[detail::flat_index_v(dim_, ix)] = e;
  }
  const std::vector<Expr>& flat() const { return c_; }

private:
  int dim_ = 0, rank_ = 0, ncontra_ = 0;
  std::vector<Expr> c_;
};

// Dense numeric tensor with the same layout.
class TensorN {
public:
  TensorN() = default;
  TensorN(int dim, int rank, double fill = 0.0, int ncontra = 0)
      : dim_(dim), rank_(rank), ncontra_(ncontra) {
    std::size_t sz = 1;
    for (int k = 0; k < rank; ++k) sz *= dim;
    c_.assign(sz, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  int ncontra() const { return ncontra_; }
  std::size_t size() const { return c_.size(); }

  template <class... I>
  double& operator()(I... idx) {
    return c_[detail::flat_index(dim_, idx...)];
  }
  template <class... I>
  double operator()(I... idx) const {
    return c_[detail::flat_index(dim_, idx...)];
  }
  double get(const std::vector<int>& ix) const {
    return c_[detail::flat_index_v(dim_, ix)];
  }
  void set(const std::vector<int>& ix, double v) {
    c_[detail::flat_index_v(dim_, ix)] = v;
  }
  double& fat(std::size_t f) { return c_[f]; }
  double fat(std::size_t f) const { return c_[f]; }
  const std::vector<double>& flat() const { return c_; }

  double norm_inf() const;

  TensorN& operator+=(const TensorN& o);
  TensorN& operator-=(const TensorN& o);
  TensorN& operator*=(double s);
  friend TensorN operator+(TensorN a, const TensorN& b) { return a += b; }
  friend TensorN operator-(TensorN a, const TensorN& b) { return a -= b; }
  friend TensorN operator*(double s, TensorN a) { return a *= s; }

private:
  int dim_ = 0, rank_ = 0, ncontra_ = 0;
  std::vector<double> c_;
};

enum class CurvKind { R, C, W, K, P };
const char* to_string(CurvKind k);

// Lazily materialized symbolic curvature pipeline for one metric.  Every
// stage is computed once and cached; expressions live in the spec's pool.
class Tower {
public:
  explicit Tower(MetricSpec spec);

  const MetricSpec& spec() const { return spec_; }
  ExprPool& pool() { return *spec_.pool; }
  int n() const { return spec_.chart.n; }

  const TensorS& metric();           // (0,2)
  const TensorS& inverse_metric();   // (2,0), adjugate/determinant
  Expr det_g();                      // symbolic determinant
  const TensorS& christoffel();      // (1,2): G(a,b,c) = G^a_{bc}
  const TensorS& riemann13();        // (1,3): Rt(a,q,mu,nu)
  const TensorS& riemann();          // (0,4)
  const TensorS& ricci();            // (0,2)
  Expr scalar_curvature();
  const TensorS& ricci_operator();   // (1,1): J(a,b) = g^{ac} S_{cb}
  const TensorS& kn_gg();            // g ^ g
  const TensorS& kn_gs();            // g ^ S
  const TensorS& kn_ss();            // S ^ S
  const TensorS& curvature(CurvKind kind);       // R, C, W, K, or P  (0,4)
  const TensorS& grad_curvature(CurvKind kind);  // (0,5), last slot = D
  const TensorS& grad_ricci();                   // (0,3), last slot = D

  // General covariant derivative; `ncontra` leading slots of T are
  // contravariant.  The derivative slot is appended last.
  TensorS covariant_derivative(const TensorS& T);

private:
  MetricSpec spec_;
  std::optional<TensorS> g_, gi_, gamma_, r13_, r04_, ricci_, jop_;
  std::optional<TensorS> kn_gg_, kn_gs_, kn_ss_;
  std::optional<TensorS> c_, w_, k_, p_;
  std::optional<TensorS> grad_s_;
  std::map<CurvKind, TensorS> grads_;
  Expr det_ = nullptr;
  Expr kappa_ = nullptr;
};

// Symbolic Kulkarni-Nomizu product of two symmetric (0,2) tensors.
// Throws std::invalid_argument when either input is not symmetric.
TensorS kulkarni_nomizu(ExprPool& pool, const TensorS& A, const TensorS& U);

// Numeric Kulkarni-Nomizu product (inputs checked for symmetry up to 1e-12
// relative).
TensorN kulkarni_nomizu(const TensorN& A, const TensorN& U);

// Numeric outer products of 1-forms: (a x b)_{ij} = a_i b_j, and the
// symmetrized a x b + b x a.
TensorN outer(const std::vector<double>& a, const std::vector<double>& b);
TensorN sym_outer(const std::vector<double>& a, const std::vector<double>& b);

// Numeric slot plumbing.  `metric2` is g for lowering or g^{-1} for raising;
// the named wrappers exist for call-site clarity.
TensorN contract_slot(const TensorN& T, int slot, const TensorN& metric2);
TensorN raise_slot(const TensorN& T, int slot, const TensorN& ginv);
TensorN lower_slot(const TensorN& T, int slot, const TensorN& g);
// Trace over two slots against g^{-1} (both covariant) or directly (one up,
// one down: pass nullptr for ginv).
TensorN trace_slots(const TensorN& T, int s1, int s2, const TensorN* ginv);

// Numeric snapshot of a Tower at one chart point.  All evaluations share a
// single EvalContext, so common subexpressions across tensors are evaluated
// once per point.
class TowerAt {
public:
  TowerAt(Tower& tower, const Binding& at);

  Tower& tower() { return tower_; }
  int n() const { return tower_.n(); }
  double operator()(Expr e) { return ctx_(e); }
  TensorN eval(const TensorS& T);

  const TensorN& metric();
  const TensorN& inverse_metric();
  const TensorN& christoffel();
  const TensorN& riemann13();
  const TensorN& riemann() { return curvature(CurvKind::R); }
  const TensorN& ricci();
  double scalar_curvature();
  const TensorN& ricci_power(int k);  // (0,2): S^1 = S, S^k = S^{k-1} g^{-1} S
  const TensorN& kn_gg();
  const TensorN& kn_gs();
  const TensorN& kn_ss();
  const TensorN& curvature(CurvKind kind);
  const TensorN& grad_curvature(CurvKind kind);
  const TensorN& grad_ricci();

private:
  const TensorN& memo(const TensorS& sym);

  Tower& tower_;
  Binding binding_;  // owned copy; ctx_ refers into it
  EvalContext ctx_;
  std::map<const void*, TensorN> cache_;  // keyed by Tower-owned TensorS
  std::map<int, TensorN> spower_;
};

}  // namespace curvlab
