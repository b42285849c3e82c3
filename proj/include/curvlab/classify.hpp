#pragma once
// Structure detectors for one metric: Einstein level, quasi-Einstein rank,
// generalized quasi-Einstein verification, Roter fits, T-compatibility
// nullspaces, recurrence (plain and 2-form), Venzi dimension, Ricci
// derivative flags, weak-symmetry fits, and the consolidated
// classification report.
//
// All detectors work numerically at a single TowerAt point; "holds over the
// region" aggregation lives in the report assembly, which requires a
// property to hold at every sampled point.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "curvlab/pseudo.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

// Symmetric (0,2) unknowns are flattened in this fixed order.
inline constexpr std::array<std::pair<int, int>, 10> kSymSlots = {{{0, 0},
                                                                   {0, 1},
                                                                   {0, 2},
                                                                   {0, 3},
                                                                   {1, 1},
                                                                   {1, 2},
                                                                   {1, 3},
                                                                   {2, 2},
                                                                   {2, 3},
                                                                   {3, 3}}};

struct EinsteinLevel {
  // Smallest k in 1..4 with S^k + c_{k-1} S^{k-1} + ... + c_1 S + c_0 g = 0
  // within tolerance; 0 when no level up to 4 fits.  coeffs holds
  // (c_0, ..., c_{k-1}) in that (ascending power) order.
  int level = 0;
  std::vector<double> coeffs;
  double residual = 0.0;
};
EinsteinLevel einstein_level(TowerAt& at, const Tolerances& tol = {});

struct QuasiEinstein {
  int rank = 0;  // minimal rank of S - alpha g over eigenvalue candidates
  double alpha = 0.0;
};
QuasiEinstein quasi_einstein(TowerAt& at, const Tolerances& tol = {});

// Residual of S - [alpha g + beta Pi (x) Pi + gamma (Pi (x) phi + phi (x) Pi)]
// with all five inputs given symbolically (1-forms componentwise).
FitResult gqe_verify(TowerAt& at, Expr alpha, Expr beta, Expr gamma,
                     const std::vector<Expr>& Pi, const std::vector<Expr>& phi,
                     const Tolerances& tol = {});

// R against {g^g, g^S, S^S}; coefficients in that order.
FitResult roter_fit(TowerAt& at, const Tolerances& tol = {});
// R against {g^g, g^S, g^S2, S^S, S^S2, S2^S2}; coefficients in that order.
FitResult generalized_roter_fit(TowerAt& at, const Tolerances& tol = {});

struct CompatResult {
  int dim = 0;  // nullspace dimension over the 10 symmetric-Z unknowns
  // true iff the nullspace is exactly the span of the block pattern
  // {Z00, Z01, Z11, Z22, Z23, Z33} (0-based slot names).
  bool block_pattern = false;
  std::vector<std::array<double, 10>> basis;  // kSymSlots component order
};
// T must have Riemann-type antisymmetry in its first two slots.  The linear
// system runs over all (a, u, v, w):
//   sum_e [ Z^e_a T(u,v,e,w) + Z^e_u T(v,a,e,w) + Z^e_v T(a,u,e,w) ] = 0,
// Z^e_x = g^{ec} Z_{cx}, with Z symmetric.
CompatResult compatible_space(TowerAt& at, const TensorN& T,
                              const Tolerances& tol = {});
// Residual of one candidate Z against the same system (membership test).
double compat_residual(TowerAt& at, const TensorN& T, const TensorN& Z,
                       const Tolerances& tol = {});

struct OneFormFit {
  std::array<double, 4> one_form{};  // Pi (recurrence) or Sigma (2-forms)
  double residual = 0.0;
  bool nontrivial = false;  // ||one_form||_inf above tol.indep
  Verdict verdict = Verdict::inconclusive;
};
// grad T = Pi (x) T, i.e. (grad T)(ix, f) = Pi_f T(ix); verdict "holds"
// means recurrent (a zero Pi with flat grad T counts as holds + trivial Pi).
OneFormFit recurrence_fit(TowerAt& at, CurvKind kind,
                          const Tolerances& tol = {});
// Cyclic 2-form recurrence: for all (a,b,c,d,e)
//   S_{(a,b,c)} (grad_a T)(b,c,d,e) = S_{(a,b,c)} Sigma_a T(b,c,d,e).
// "holds" additionally requires a nontrivial Sigma: when the cyclic
// derivative sum vanishes identically the zero solution is not counted as
// recurrence.
OneFormFit two_form_recurrence(TowerAt& at, CurvKind kind,
                               const Tolerances& tol = {});

struct RicciDerivativeFlags {
  bool codazzi = false;
  bool cyclic_parallel = false;
  double codazzi_residual = 0.0;
  double cyclic_residual = 0.0;
};
RicciDerivativeFlags ricci_derivative_flags(TowerAt& at,
                                            const Tolerances& tol = {});

// Dimension of { Pi : S_{(a,b,c)} Pi_a T(b,c,d,e) = 0 }; 4 for T = 0.
int venzi_dim(TowerAt& at, const TensorN& T, const Tolerances& tol = {});
// Relative distance of that system from admitting a nonzero 1-form:
// sigma_min / sigma_max of the cyclic system matrix (0 for T = 0).
double venzi_residual(TowerAt& at, const TensorN& T,
                      const Tolerances& tol = {});

struct WeakSymmetryFit {
  // grad_e T_abcd = Pi_e T_abcd + O1_a T_ebcd + O1_b T_aecd
  //               + O2_c T_abed + O2_d T_abce
  std::array<double, 4> Pi{}, O1{}, O2{};
  double residual = 0.0;
  double chaki_residual = 0.0;  // constrained O1 = O2 = Pi/2
  Verdict verdict = Verdict::inconclusive;
  Verdict chaki_verdict = Verdict::inconclusive;
};
WeakSymmetryFit weak_symmetry_fit(TowerAt& at, CurvKind kind,
                                  const Tolerances& tol = {});

struct PropertyRecord {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  std::string witness;          // human-readable summary (first point)
  std::vector<double> values;   // machine-readable witness numbers
  double residual = 0.0;        // worst across points
  int points = 0;
  std::string note;
};

struct ClassificationReport {
  std::string metric;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  int count = 0;
  double tol = 0.0;
  std::vector<PropertyRecord> properties;

  const PropertyRecord* find(const std::string& name) const;
};

// Runs the full detector battery over sampled points; deterministic under
// the plan's seed.  Singular evaluations at a point are recorded as notes,
// never a crash.
ClassificationReport classification_report(const MetricSpec& spec,
                                           const SamplePlan& plan,
                                           const Tolerances& tol = {});

}  // namespace curvlab
