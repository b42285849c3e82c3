#pragma once
// Higher-order derived tensors and linear-dependence fitting.
//
// Conventions (fixed):
//   Dot action of a (0,4) tensor T on a (0,k) tensor H, k in {2,4}:
//     (T.H)(q_1..q_k, a, b) =
//         - sum_s sum_{p,r} g^{pr} T(a, b, q_s, r) H(q_1,..,p@s,..,q_k)
//   Tachibana tensor of a symmetric (0,2) Z and a (0,k) H:
//     Q(Z,H)(q_1..q_k, a, b) =
//         sum_s [ Z(a, q_s) H(..b@s..) - Z(b, q_s) H(..a@s..) ]
//   Both append the antisymmetric pair (a, b) as the LAST two slots; the
//   printed label T.H_{q1..qk, ab} reads off in exactly that order.

#include <vector>

#include "curvlab/tensor.hpp"

namespace curvlab {

enum class Verdict { holds, fails, inconclusive };
const char* to_string(Verdict v);

// Shared numeric thresholds.  A fit is dependent when the relative residual
// is <= dep, independent when >= indep; the gap in between is reported as
// inconclusive rather than forced into a verdict.
struct Tolerances {
  double dep = 1e-8;
  double indep = 1e-4;
  // Inputs whose norms all sit below this floor are treated as identically
  // zero (trivially dependent), so flat metrics do not produce noise-driven
  // "independent" verdicts.
  double zero_floor = 1e-12;
};

struct FitResult {
  std::vector<double> coeffs;
  double residual = 0.0;  // ||LHS - sum c_i B_i||_inf / max(norms, floor)
  int rank = 0;           // numerical rank of the basis (SVD, 1e-8*sigma_max)
  bool trivial = false;   // all inputs below the zero floor
  Verdict verdict = Verdict::inconclusive;

  bool dependent() const { return verdict == Verdict::holds; }
};

// g^{pr} is taken from `ginv`; H must be (0,2) or (0,4).
TensorN dot_action(const TensorN& T, const TensorN& H, const TensorN& ginv);

// Z must be symmetric; H must be (0,2) or (0,4).
TensorN tachibana(const TensorN& Z, const TensorN& H);

// Least-squares c minimizing ||lhs - c*rhs|| over all components; see
// FitResult for the residual normalization.  lhs ~ 0 ~ rhs yields a trivial
// dependent result with an indeterminate (zero) coefficient.
FitResult fit_scalar(const TensorN& lhs, const TensorN& rhs,
                     const Tolerances& tol = {});

// Minimum-norm least-squares coefficients against a basis of equal-valence
// tensors; rank-deficiency is reported, not an error.
FitResult fit_combo(const TensorN& lhs, const std::vector<const TensorN*>& basis,
                    const Tolerances& tol = {});

}  // namespace curvlab
