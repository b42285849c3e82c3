#include "curvlab/classify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace curvlab {

namespace {

// Rank with the shared relative singular-value threshold; a numerically zero
// matrix has rank 0 regardless of threshold scaling.
int matrix_rank(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  if (svd.singularValues()(0) <= 1e-300) return 0;
  svd.setThreshold(1e-8);
  return static_cast<int>(svd.rank());
}

double max_abs(const Eigen::MatrixXd& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

}  // namespace

const PropertyRecord* ClassificationReport::find(
    const std::string& name) const {
  for (const auto& p : properties)
    if (p.name == name) return &p;
  return nullptr;
}

EinsteinLevel einstein_level(TowerAt& at, const Tolerances& tol) {
  EinsteinLevel out;
  const TensorN& g = at.metric();
  for (int k = 1; k <= 4; ++k) {
    TensorN lhs = -1.0 * TensorN(at.ricci_power(k));
    std::vector<const TensorN*> basis = {&g};
    for (int j = 1; j < k; ++j) basis.push_back(&at.ricci_power(j));
    FitResult fr = fit_combo(lhs, basis, tol);
    if (fr.verdict == Verdict::holds) {
      out.level = k;
      out.coeffs = fr.coeffs;
      out.residual = fr.residual;
      return out;
    }
    if (k == 4) out.residual = fr.residual;
  }
  return out;  // level 0: no vanishing combination up to S^4
}

QuasiEinstein quasi_einstein(TowerAt& at, const Tolerances& tol) {
  const int n = at.n();
  TensorN J = at.eval(at.tower().ricci_operator());
  Eigen::MatrixXd Jm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Jm(i, j) = J(i, j);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Jm);
  std::vector<double> eigs;
  for (int i = 0; i < n; ++i) eigs.push_back(es.eigenvalues()(i).real());
  std::sort(eigs.begin(), eigs.end());

  const double scale = std::max(max_abs(Jm), 1.0);
  QuasiEinstein best;
  best.rank = n + 1;
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (double alpha : eigs) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jm - alpha * I);
    int rank = 0;
    for (int i = 0; i < n; ++i)
      if (svd.singularValues()(i) > 1e-7 * scale) ++rank;
    // prefer the smallest rank; break ties toward the smaller alpha, which
    // is well-defined because candidates are scanned in ascending order
    if (rank < best.rank) {
      best.rank = rank;
      best.alpha = alpha;
    }
  }
  if (std::abs(best.alpha) < tol.zero_floor) best.alpha = 0.0;
  return best;
}

FitResult gqe_verify(TowerAt& at, Expr alpha, Expr beta, Expr gamma,
                     const std::vector<Expr>& Pi, const std::vector<Expr>& phi,
                     const Tolerances& tol) {
  const int n = at.n();
  double a = at(alpha), b = at(beta), c = at(gamma);
  std::vector<double> piv(n), phiv(n);
  for (int i = 0; i < n; ++i) {
    piv[i] = at(Pi.at(i));
    phiv[i] = at(phi.at(i));
  }
  TensorN model = a * TensorN(at.metric()) + b * outer(piv, piv) +
                  c * sym_outer(piv, phiv);
  const TensorN& S = at.ricci();
  FitResult fr;
  fr.coeffs = {a, b, c};
  double denom = std::max({S.norm_inf(), model.norm_inf(), tol.zero_floor});
  fr.residual = (S - model).norm_inf() / denom;
  if (fr.residual <= tol.dep)
    fr.verdict = Verdict::holds;
  else if (fr.residual >= tol.indep)
    fr.verdict = Verdict::fails;
  else
    fr.verdict = Verdict::inconclusive;
  return fr;
}

FitResult roter_fit(TowerAt& at, const Tolerances& tol) {
  return fit_combo(at.riemann(), {&at.kn_gg(), &at.kn_gs(), &at.kn_ss()},
                   tol);
}

FitResult generalized_roter_fit(TowerAt& at, const Tolerances& tol) {
  const TensorN& g = at.metric();
  const TensorN& S = at.ricci();
  const TensorN& S2 = at.ricci_power(2);
  TensorN gs2 = kulkarni_nomizu(g, S2);
  TensorN ss2 = kulkarni_nomizu(S, S2);
  TensorN s2s2 = kulkarni_nomizu(S2, S2);
  return fit_combo(at.riemann(),
                   {&at.kn_gg(), &at.kn_gs(), &gs2, &at.kn_ss(), &ss2, &s2s2},
                   tol);
}

namespace {

// 256 x 10 coefficient matrix of the T-compatibility system over the
// symmetric-Z unknowns (kSymSlots order).
Eigen::MatrixXd compat_matrix(TowerAt& at, const TensorN& T) {
  const int n = at.n();
  if (n != 4)
    throw std::invalid_argument("compatible_space: dimension 4 required");
  const TensorN& gi = at.inverse_metric();
  // pre-contract: TG(x, u, v, w) = sum_e g^{e x} T(u, v, e, w)
  TensorN TG(n, 4);
  for (int x = 0; x < n; ++x)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w) {
          double acc = 0.0;
          for (int e = 0; e < n; ++e) acc += gi(e, x) * T(u, v, e, w);
          TG(x, u, v, w) = acc;
        }
  Eigen::MatrixXd A(256, 10);
  A.setZero();
  for (int a = 0; a < n; ++a)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w) {
          const int row = ((a * n + u) * n + v) * n + w;
          for (int col = 0; col < 10; ++col) {
            auto [i, j] = kSymSlots[col];
            // contribution of unknown Z_{ij} to  sum_e Z^e_{lower} T(...)
            auto piece = [&](int lower, int p, int q) {
              double c = 0.0;
              if (j == lower) c += TG(i, p, q, w);
              if (i != j && i == lower) c += TG(j, p, q, w);
              return c;
            };
            A(row, col) =
                piece(a, u, v) + piece(u, v, a) + piece(v, a, u);
          }
        }
  return A;
}

Eigen::VectorXd sym_to_vec(const TensorN& Z) {
  Eigen::VectorXd v(10);
  for (int col = 0; col < 10; ++col) {
    auto [i, j] = kSymSlots[col];
    v(col) = Z(i, j);
  }
  return v;
}

}  // namespace

CompatResult compatible_space(TowerAt& at, const TensorN& T,
                              const Tolerances& tol) {
  Eigen::MatrixXd A = compat_matrix(at, T);
  const double scale = std::max(max_abs(A), 1.0);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  svd.setThreshold(1e-8);
  int rank = svd.singularValues()(0) <= tol.zero_floor
                 ? 0
                 : static_cast<int>(svd.rank());
  CompatResult out;
  out.dim = 10 - rank;
  for (int k = rank; k < 10; ++k) {
    std::array<double, 10> b{};
    for (int i = 0; i < 10; ++i) b[i] = svd.matrixV()(i, k);
    out.basis.push_back(b);
  }

  if (out.dim == 6) {
    // the block pattern means exactly {Z00, Z01, Z11, Z22, Z23, Z33} free
    static constexpr int kBlockCols[6] = {0, 1, 4, 7, 8, 9};
    bool ok = true;
    for (int col : kBlockCols) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(10);
      z(col) = 1.0;
      ok = ok && (A * z).cwiseAbs().maxCoeff() <= tol.dep * scale;
    }
    out.block_pattern = ok;
  }
  return out;
}

double compat_residual(TowerAt& at, const TensorN& T, const TensorN& Z,
                       const Tolerances& tol) {
  // A candidate that is zero up to roundoff sits in every nullspace.
  if (Z.norm_inf() <= tol.zero_floor) return 0.0;
  Eigen::MatrixXd A = compat_matrix(at, T);
  Eigen::VectorXd z = sym_to_vec(Z);
  double denom = std::max(max_abs(A) * z.cwiseAbs().maxCoeff(),
                          tol.zero_floor);
  return (A * z).cwiseAbs().maxCoeff() / denom;
}

OneFormFit recurrence_fit(TowerAt& at, CurvKind kind, const Tolerances& tol) {
  const int n = at.n();
  const TensorN& T = at.curvature(kind);
  const TensorN& DT = at.grad_curvature(kind);
  OneFormFit out;
  if (T.norm_inf() <= tol.zero_floor && DT.norm_inf() <= tol.zero_floor) {
    out.verdict = Verdict::holds;  // flat input: recurrent with Pi = 0
    return out;
  }
  if (DT.norm_inf() <= tol.zero_floor * std::max(1.0, T.norm_inf())) {
    out.verdict = Verdict::holds;  // parallel tensor: recurrent with Pi = 0
    return out;
  }
  double tt = 0.0;
  for (double v : T.flat()) tt += v * v;
  if (tt > tol.zero_floor * tol.zero_floor) {
    std::vector<int> ix(4, 0);
    std::array<double, 4> dot{};
    do {
      double tv = T.get(ix);
      if (tv == 0.0) continue;
      std::vector<int> jx = ix;
      jx.push_back(0);
      for (int f = 0; f < n; ++f) {
        jx[4] = f;
        dot[f] += DT.get(jx) * tv;
      }
    } while (advance_index(ix, n));
    for (int f = 0; f < n; ++f) out.one_form[f] = dot[f] / tt;
  }
  // residual of grad T - Pi (x) T
  double num = 0.0, model = 0.0;
  std::vector<int> jx(5, 0);
  do {
    std::vector<int> ix(jx.begin(), jx.begin() + 4);
    double m = out.one_form[jx[4]] * T.get(ix);
    num = std::max(num, std::abs(DT.get(jx) - m));
    model = std::max(model, std::abs(m));
  } while (advance_index(jx, n));
  out.residual = num / std::max({DT.norm_inf(), model, tol.zero_floor});
  double pn = 0.0;
  for (double v : out.one_form) pn = std::max(pn, std::abs(v));
  out.nontrivial = pn > tol.indep;
  if (out.residual <= tol.dep)
    out.verdict = Verdict::holds;
  else if (out.residual >= tol.indep)
    out.verdict = Verdict::fails;
  else
    out.verdict = Verdict::inconclusive;
  return out;
}

OneFormFit two_form_recurrence(TowerAt& at, CurvKind kind,
                               const Tolerances& tol) {
  const int n = at.n();
  const TensorN& T = at.curvature(kind);
  const TensorN& DT = at.grad_curvature(kind);
  if (DT.norm_inf() <= tol.zero_floor * std::max(1.0, T.norm_inf())) {
    OneFormFit out;
    // Flat or parallel input: only the trivial Sigma satisfies the cyclic
    // relation, and that does not count as 2-form recurrence.
    out.verdict = Verdict::fails;
    return out;
  }
  const int rows = 1024;
  Eigen::MatrixXd A(rows, 4);
  Eigen::VectorXd y(rows);
  A.setZero();
  int row = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e) {
            y(row) = DT(b, c, d, e, a) + DT(c, a, d, e, b) +
                     DT(a, b, d, e, c);
            A(row, a) += T(b, c, d, e);
            A(row, b) += T(c, a, d, e);
            A(row, c) += T(a, b, d, e);
            ++row;
          }

  OneFormFit out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  if (max_abs(A) > tol.zero_floor) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU |
                                                 Eigen::ComputeThinV);
    svd.setThreshold(1e-8);
    x = svd.solve(y);
  }
  for (int i = 0; i < 4; ++i) out.one_form[i] = x(i);
  // scale by grad T, not by y: the cyclic sum may cancel to roundoff (for R
  // it vanishes identically) and must still count as a clean fit
  double denom = std::max({DT.norm_inf(),
                           T.norm_inf() * x.cwiseAbs().maxCoeff(),
                           tol.zero_floor});
  out.residual = (A * x - y).cwiseAbs().maxCoeff() / denom;
  out.nontrivial = x.cwiseAbs().maxCoeff() > tol.indep;
  // "recurrent 2-forms" requires a genuine nonzero Sigma: the zero solution
  // (cyclic derivative sum identically zero) does not count.
  if (out.residual <= tol.dep)
    out.verdict = out.nontrivial ? Verdict::holds : Verdict::fails;
  else if (out.residual >= tol.indep)
    out.verdict = Verdict::fails;
  else
    out.verdict = Verdict::inconclusive;
  return out;
}

RicciDerivativeFlags ricci_derivative_flags(TowerAt& at,
                                            const Tolerances& tol) {
  const int n = at.n();
  const TensorN& DS = at.grad_ricci();  // (b, c, f): grad_f S_{bc}
  if (DS.norm_inf() <= tol.zero_floor) {
    RicciDerivativeFlags out;
    out.codazzi = out.cyclic_parallel = true;  // parallel Ricci
    return out;
  }
  double codazzi = 0.0, cyclic = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        codazzi = std::max(codazzi, std::abs(DS(b, c, a) - DS(a, c, b)));
        cyclic = std::max(
            cyclic, std::abs(DS(b, c, a) + DS(c, a, b) + DS(a, b, c)));
      }
  double denom = std::max(DS.norm_inf(), tol.zero_floor);
  RicciDerivativeFlags out;
  out.codazzi_residual = codazzi / denom;
  out.cyclic_residual = cyclic / denom;
  out.codazzi = out.codazzi_residual <= tol.dep;
  out.cyclic_parallel = out.cyclic_residual <= tol.dep;
  return out;
}

int venzi_dim(TowerAt& at, const TensorN& T, const Tolerances& tol) {
  const int n = at.n();
  Eigen::MatrixXd A(1024, 4);
  A.setZero();
  int row = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e) {
            A(row, a) += T(b, c, d, e);
            A(row, b) += T(c, a, d, e);
            A(row, c) += T(a, b, d, e);
            ++row;
          }
  if (max_abs(A) <= tol.zero_floor) return 4;
  return 4 - matrix_rank(A);
}

double venzi_residual(TowerAt& at, const TensorN& T, const Tolerances& tol) {
  const int n = at.n();
  const int rows = n * n * n * n * n;
  Eigen::MatrixXd A(rows, 4);
  A.setZero();
  int row = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e) {
            A(row, a) += T(b, c, d, e);
            A(row, b) += T(c, a, d, e);
            A(row, c) += T(a, b, d, e);
            ++row;
          }
  if (max_abs(A) <= tol.zero_floor) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

WeakSymmetryFit weak_symmetry_fit(TowerAt& at, CurvKind kind,
                                  const Tolerances& tol) {
  const int n = at.n();
  const TensorN& T = at.curvature(kind);
  const TensorN& DT = at.grad_curvature(kind);
  if (DT.norm_inf() <= tol.zero_floor * std::max(1.0, T.norm_inf())) {
    WeakSymmetryFit out;
    // Flat or parallel input: the zero 1-forms already transport grad T.
    out.verdict = out.chaki_verdict = Verdict::holds;
    return out;
  }
  const int rows = 1024;
  Eigen::MatrixXd A(rows, 12), Ac(rows, 4);
  Eigen::VectorXd y(rows);
  A.setZero();
  Ac.setZero();
  int row = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e) {
            y(row) = DT(a, b, c, d, e);
            const double t0 = T(a, b, c, d);
            const double ta = T(e, b, c, d);
            const double tb = T(a, e, c, d);
            const double tc = T(a, b, e, d);
            const double td = T(a, b, c, e);
            A(row, e) += t0;        // Pi_e
            A(row, 4 + a) += ta;    // O1_a
            A(row, 4 + b) += tb;    // O1_b
            A(row, 8 + c) += tc;    // O2_c
            A(row, 8 + d) += td;    // O2_d
            Ac(row, e) += t0;       // Chaki: O1 = O2 = Pi/2
            Ac(row, a) += 0.5 * ta;
            Ac(row, b) += 0.5 * tb;
            Ac(row, c) += 0.5 * tc;
            Ac(row, d) += 0.5 * td;
            ++row;
          }

  WeakSymmetryFit out;
  auto solve = [&](const Eigen::MatrixXd& M) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(M.cols());
    if (max_abs(M) > tol.zero_floor) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU |
                                                   Eigen::ComputeThinV);
      svd.setThreshold(1e-8);
      x = svd.solve(y);
    }
    double denom = std::max({y.cwiseAbs().maxCoeff(),
                             T.norm_inf() * x.cwiseAbs().maxCoeff(),
                             tol.zero_floor});
    double resid = (M * x - y).cwiseAbs().maxCoeff() / denom;
    return std::make_pair(x, resid);
  };
  auto [x, resid] = solve(A);
  for (int i = 0; i < 4; ++i) {
    out.Pi[i] = x(i);
    out.O1[i] = x(4 + i);
    out.O2[i] = x(8 + i);
  }
  out.residual = resid;
  auto verdict_of = [&](double r) {
    if (r <= tol.dep) return Verdict::holds;
    if (r >= tol.indep) return Verdict::fails;
    return Verdict::inconclusive;
  };
  out.verdict = verdict_of(out.residual);
  auto [xc, residc] = solve(Ac);
  out.chaki_residual = residc;
  out.chaki_verdict = verdict_of(residc);
  return out;
}

}  // namespace curvlab
