#include "curvlab/pseudo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace curvlab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

TensorN dot_action(const TensorN& T, const TensorN& H, const TensorN& ginv) {
  const int n = T.dim();
  const int k = H.rank();
  if (k != 2 && k != 4)
    throw std::invalid_argument("dot_action: H must be (0,2) or (0,4)");
  TensorN out(n, k + 2);
  std::vector<int> q(k, 0);
  std::vector<int> h(k, 0);
  std::vector<int> ox(k + 2, 0);
  do {
    std::copy(q.begin(), q.end(), ox.begin());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double acc = 0.0;
        h = q;
        for (int s = 0; s < k; ++s) {
          for (int p = 0; p < n; ++p) {
            h[s] = p;
            double hv = H.get(h);
            if (hv == 0.0) continue;
            for (int r = 0; r < n; ++r) {
              double w = ginv(p, r);
              if (w != 0.0) acc -= w * T(a, b, q[s], r) * hv;
            }
          }
          h[s] = q[s];
        }
        ox[k] = a;
        ox[k + 1] = b;
        out.set(ox, acc);
      }
  } while (advance_index(q, n));
  return out;
}

TensorN tachibana(const TensorN& Z, const TensorN& H) {
  const int n = Z.dim();
  const int k = H.rank();
  if (k != 2 && k != 4)
    throw std::invalid_argument("tachibana: H must be (0,2) or (0,4)");
  const double zs = std::max(Z.norm_inf(), 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(Z(i, j) - Z(j, i)) > 1e-12 * zs)
        throw std::invalid_argument("tachibana: Z must be symmetric");
  TensorN out(n, k + 2);
  std::vector<int> q(k, 0);
  std::vector<int> h(k, 0);
  std::vector<int> ox(k + 2, 0);
  do {
    std::copy(q.begin(), q.end(), ox.begin());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double acc = 0.0;
        h = q;
        for (int s = 0; s < k; ++s) {
          h[s] = b;
          acc += Z(a, q[s]) * H.get(h);
          h[s] = a;
          acc -= Z(b, q[s]) * H.get(h);
          h[s] = q[s];
        }
        ox[k] = a;
        ox[k + 1] = b;
        out.set(ox, acc);
      }
  } while (advance_index(q, n));
  return out;
}

FitResult fit_combo(const TensorN& lhs,
                    const std::vector<const TensorN*>& basis,
                    const Tolerances& tol) {
  if (basis.empty()) throw std::invalid_argument("fit_combo: empty basis");
  const std::size_t rows = lhs.size();
  for (const TensorN* b : basis)
    if (b->size() != rows || b->rank() != lhs.rank())
      throw std::invalid_argument("fit_combo: valence mismatch");

  FitResult fr;
  fr.coeffs.assign(basis.size(), 0.0);

  double norm_all = lhs.norm_inf();
  for (const TensorN* b : basis) norm_all = std::max(norm_all, b->norm_inf());
  if (norm_all <= tol.zero_floor) {
    fr.trivial = true;
    fr.verdict = Verdict::holds;
    return fr;
  }

  Eigen::MatrixXd A(rows, basis.size());
  Eigen::VectorXd y(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    y(i) = lhs.flat()[i];
    for (std::size_t j = 0; j < basis.size(); ++j)
      A(i, j) = basis[j]->flat()[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  svd.setThreshold(1e-8);
  fr.rank = static_cast<int>(svd.rank());
  Eigen::VectorXd x = svd.solve(y);  // minimum-norm least squares
  for (std::size_t j = 0; j < basis.size(); ++j) fr.coeffs[j] = x(j);

  double resid_inf = (A * x - y).lpNorm<Eigen::Infinity>();
  fr.residual = resid_inf / std::max(norm_all, tol.zero_floor);
  if (fr.residual <= tol.dep)
    fr.verdict = Verdict::holds;
  else if (fr.residual >= tol.indep)
    fr.verdict = Verdict::fails;
  else
    fr.verdict = Verdict::inconclusive;
  return fr;
}

FitResult fit_scalar(const TensorN& lhs, const TensorN& rhs,
                     const Tolerances& tol) {
  return fit_combo(lhs, {&rhs}, tol);
}

}  // namespace curvlab
