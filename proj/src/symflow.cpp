#include "curvlab/symflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace curvlab {

namespace {

// Continued-fraction convergent; CLI scalars arrive as short decimals, so
// the exact rational is recovered well before the denominator cap.
Rational rationalize(double x, const char* what) {
  if (!std::isfinite(x))
    throw std::invalid_argument(std::string(what) + ": not finite");
  const double ax = std::abs(x);
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double f = ax;
  for (int it = 0; it < 40; ++it) {
    double fl = std::floor(f);
    if (fl > 9.0e17) break;
    long long ai = static_cast<long long>(fl);
    long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > 1000000000LL || p2 < 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - ax) <=
        1e-14 * std::max(1.0, ax))
      break;
    double frac = f - fl;
    if (frac <= 1e-14) break;
    f = 1.0 / frac;
  }
  if (q1 == 0 ||
      std::abs(static_cast<double>(p1) / static_cast<double>(q1) - ax) >
          1e-9 * std::max(1.0, ax))
    throw std::invalid_argument(std::string(what) +
                                ": no small rational representation");
  return Rational(x < 0 ? -p1 : p1, q1);
}

std::vector<Expr> parse_components(const MetricSpec& spec,
                                   const std::string& text, const char* what) {
  std::vector<Expr> out;
  std::string piece;
  std::stringstream ss(text);
  while (std::getline(ss, piece, ',')) out.push_back(spec.pool->parse(piece));
  if (static_cast<int>(out.size()) != spec.chart.n)
    throw std::invalid_argument(
        std::string(what) + ": expected " + std::to_string(spec.chart.n) +
        " comma-separated components, got " + std::to_string(out.size()));
  return out;
}

// The fitted ansatz claims are universally quantified over the chart, so one
// point that clearly misses refutes them; "holds" still needs every point.
Verdict aggregate_verdict(int holds, int fails, int total) {
  if (total == 0) return Verdict::inconclusive;
  if (holds == total) return Verdict::holds;
  if (fails > 0) return Verdict::fails;
  return Verdict::inconclusive;
}

}  // namespace

const char* to_string(InheritKind k) {
  switch (k) {
    case InheritKind::S: return "S";
    case InheritKind::R13: return "R13";
    case InheritKind::R04: return "R04";
  }
  return "?";
}

const char* to_string(SolitonKind k) {
  switch (k) {
    case SolitonKind::ricci: return "ricci";
    case SolitonKind::eta_ricci: return "eta_ricci";
    case SolitonKind::ricci_yamabe: return "ricci_yamabe";
    case SolitonKind::eta_ricci_yamabe: return "eta_ricci_yamabe";
  }
  return "?";
}

VectorFieldSpec coordinate_field(const MetricSpec& spec, int axis) {
  if (axis < 0 || axis >= spec.chart.n)
    throw std::invalid_argument("coordinate_field: axis out of range");
  VectorFieldSpec xi;
  xi.comp.assign(spec.chart.n, spec.pool->zero());
  xi.comp[axis] = spec.pool->one();
  return xi;
}

VectorFieldSpec parse_vector_field(const MetricSpec& spec,
                                   const std::string& text) {
  VectorFieldSpec xi;
  xi.comp = parse_components(spec, text, "vector field");
  return xi;
}

std::vector<Expr> parse_one_form(const MetricSpec& spec,
                                 const std::string& text) {
  return parse_components(spec, text, "one-form");
}

TensorS lie_derivative(const MetricSpec& spec, const TensorS& T,
                       const VectorFieldSpec& xi) {
  ExprPool& pool = *spec.pool;
  const int n = T.dim();
  if (static_cast<int>(xi.comp.size()) != n)
    throw std::invalid_argument(
        "lie_derivative: xi needs one component per coordinate");
  const bool v02 = T.rank() == 2 && T.ncontra() == 0;
  const bool v04 = T.rank() == 4 && T.ncontra() == 0;
  const bool v13 = T.rank() == 4 && T.ncontra() == 1;
  if (!v02 && !v04 && !v13)
    throw std::invalid_argument(
        "lie_derivative: valence must be (0,2), (0,4) or (1,3)");

  std::vector<std::uint32_t> csym(n);
  for (int i = 0; i < n; ++i) csym[i] = spec.coord_sym(i);
  // dxi[w][a] = d_w xi^a
  std::vector<std::vector<Expr>> dxi(n, std::vector<Expr>(n, pool.zero()));
  for (int w = 0; w < n; ++w)
    for (int a = 0; a < n; ++a)
      dxi[w][a] = pool.differentiate(xi.comp[a], csym[w]);

  TensorS out(n, T.rank(), pool.zero(), T.ncontra());
  std::vector<int> ix(T.rank(), 0);
  do {
    std::vector<Expr> terms;
    Expr tc = T.get(ix);
    for (int w = 0; w < n; ++w)
      terms.push_back(pool.mul(xi.comp[w], pool.differentiate(tc, csym[w])));
    for (int s = 0; s < T.rank(); ++s) {
      std::vector<int> jx = ix;
      if (s < T.ncontra()) {
        for (int w = 0; w < n; ++w) {
          jx[s] = w;
          terms.push_back(pool.neg(pool.mul(T.get(jx), dxi[w][ix[s]])));
        }
      } else {
        for (int w = 0; w < n; ++w) {
          jx[s] = w;
          terms.push_back(pool.mul(T.get(jx), dxi[ix[s]][w]));
        }
      }
    }
    out.set(ix, pool.add(std::move(terms)));
  } while (advance_index(ix, n));
  return out;
}

KillingResult killing_check(Tower& tower, const VectorFieldSpec& xi,
                            const std::vector<Binding>& points, double tol) {
  TensorS Lg = lie_derivative(tower.spec(), tower.metric(), xi);
  KillingResult out;
  for (const Binding& b : points) {
    TowerAt at(tower, b);
    out.max_abs = std::max(out.max_abs, at.eval(Lg).norm_inf());
  }
  out.killing = !points.empty() && out.max_abs <= tol;
  return out;
}

InheritanceFit inheritance_fit(Tower& tower, InheritKind kind,
                               const VectorFieldSpec& xi,
                               const std::vector<Binding>& points,
                               bool generalized, const Tolerances& tol) {
  if (generalized && kind != InheritKind::R04)
    throw std::invalid_argument(
        "inheritance_fit: the generalized basis is defined for R04 only");
  const TensorS* sym = nullptr;
  switch (kind) {
    case InheritKind::S: sym = &tower.ricci(); break;
    case InheritKind::R13: sym = &tower.riemann13(); break;
    case InheritKind::R04: sym = &tower.riemann(); break;
  }
  TensorS LT = lie_derivative(tower.spec(), *sym, xi);

  InheritanceFit out;
  out.kind = kind;
  out.generalized = generalized;
  bool coll = !points.empty();
  int holds = 0, fails = 0;
  for (const Binding& b : points) {
    TowerAt at(tower, b);
    TensorN LTn = at.eval(LT);
    const TensorN& Tn = kind == InheritKind::S     ? at.ricci()
                        : kind == InheritKind::R13 ? at.riemann13()
                                                   : at.riemann();
    // Both norms under the floor means a roundoff tensor of a flat metric;
    // the ratio would only amplify noise.
    double rel = LTn.norm_inf() <= tol.zero_floor &&
                         Tn.norm_inf() <= tol.zero_floor
                     ? 0.0
                     : LTn.norm_inf() /
                           std::max(Tn.norm_inf(), tol.zero_floor);
    out.lie_rel.push_back(rel);
    if (rel > tol.dep) coll = false;

    FitResult f;
    if (generalized) {
      std::vector<const TensorN*> basis{&Tn, &at.kn_gg(), &at.kn_gs(),
                                        &at.kn_ss()};
      f = fit_combo(LTn, basis, tol);
    } else {
      std::vector<const TensorN*> basis{&Tn};
      f = fit_combo(LTn, basis, tol);
    }
    out.worst_residual = std::max(out.worst_residual, f.residual);
    if (f.verdict == Verdict::holds) ++holds;
    if (f.verdict == Verdict::fails) ++fails;
    out.fits.push_back(std::move(f));
  }
  out.collineation = coll;
  out.verdict = aggregate_verdict(holds, fails, static_cast<int>(points.size()));
  return out;
}

namespace {

// Order samples along the first coordinate that varies and report sign
// changes of fitted coefficient functions between neighbours.  An exact fit
// sampled from a smooth function may legitimately change sign (the zero
// crossing can sit in a guard-excluded gap), so this is advisory: it feeds
// the report note, never the verdict.
std::string smoothness_note(const MetricSpec& spec,
                            const std::vector<Binding>& points,
                            const std::vector<std::vector<double>>& coeffs,
                            const std::vector<std::string>& names,
                            double indep) {
  if (points.size() < 3) return {};
  // Prefer a coordinate the metric actually depends on: flips ordered along
  // an ignorable coordinate would only reflect the sampler's shuffle.
  ExprPool& pool = *spec.pool;
  int axis = -1, fallback = -1;
  for (int i = 0; i < spec.chart.n && axis < 0; ++i) {
    double v0 = points.front().get(spec.coord_sym(i));
    bool varies = false;
    for (const Binding& b : points)
      if (std::abs(b.get(spec.coord_sym(i)) - v0) > 1e-12) {
        varies = true;
        break;
      }
    if (!varies) continue;
    if (fallback < 0) fallback = i;
    for (int p = 0; p < spec.chart.n && axis < 0; ++p)
      for (int q = p; q < spec.chart.n && axis < 0; ++q)
        if (pool.differentiate(spec.g[p][q], spec.coord_sym(i)) !=
            pool.zero())
          axis = i;
  }
  if (axis < 0) axis = fallback;
  if (axis < 0) return {};
  std::vector<std::size_t> ord(points.size());
  std::iota(ord.begin(), ord.end(), std::size_t{0});
  std::uint32_t s = spec.coord_sym(axis);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
    return points[a].get(s) < points[b].get(s);
  });
  std::string note;
  for (std::size_t c = 0; c < names.size(); ++c) {
    int flips = 0;
    for (std::size_t k = 1; k < ord.size(); ++k) {
      double a = coeffs[ord[k - 1]][c], b = coeffs[ord[k]][c];
      if (a * b < 0.0 && std::min(std::abs(a), std::abs(b)) > indep) ++flips;
    }
    if (flips > 0) {
      if (!note.empty()) note += ", ";
      note += names[c];
    }
  }
  if (note.empty()) return {};
  return "coefficient sign change along " + spec.chart.coords[axis] + ": " +
         note + " (zero crossing between samples)";
}

}  // namespace

SolitonFit soliton_fit(Tower& tower, SolitonKind kind,
                       const VectorFieldSpec& xi, const std::vector<Expr>& eta,
                       const std::vector<Binding>& points,
                       const Tolerances& tol, double alpha2) {
  const int n = tower.n();
  const bool eta_kind =
      kind == SolitonKind::eta_ricci || kind == SolitonKind::eta_ricci_yamabe;
  if (eta_kind && static_cast<int>(eta.size()) != n)
    throw std::invalid_argument(
        "soliton_fit: the eta ansatz needs a one-form with one component per "
        "coordinate");

  SolitonFit out;
  out.kind = kind;
  out.alpha2 = alpha2;
  switch (kind) {
    case SolitonKind::ricci: out.names = {"mu"}; break;
    case SolitonKind::eta_ricci: out.names = {"mu", "lambda"}; break;
    case SolitonKind::ricci_yamabe: out.names = {"alpha1", "mu"}; break;
    case SolitonKind::eta_ricci_yamabe:
      out.names = {"sigma1", "sigma2", "sigma3"};
      break;
  }

  TensorS Lg = lie_derivative(tower.spec(), tower.metric(), xi);
  int holds = 0, fails = 0;
  double min_eta = std::numeric_limits<double>::infinity();
  for (const Binding& b : points) {
    TowerAt at(tower, b);
    TensorN Lgn = at.eval(Lg);
    const TensorN& gn = at.metric();
    const TensorN& Sn = at.ricci();
    TensorN ee;
    if (eta_kind) {
      std::vector<double> ev(n);
      for (int i = 0; i < n; ++i) ev[i] = at(eta[i]);
      ee = outer(ev, ev);
    }

    FitResult f;
    std::vector<double> cs;
    double eta_coeff = 0.0, sigma1 = 0.0;
    switch (kind) {
      case SolitonKind::ricci: {
        TensorN lhs = 0.5 * Lgn + Sn;
        std::vector<const TensorN*> basis{&gn};
        f = fit_combo(lhs, basis, tol);
        cs = {f.coeffs[0]};
        break;
      }
      case SolitonKind::eta_ricci: {
        TensorN lhs = 0.5 * Lgn + Sn;
        std::vector<const TensorN*> basis{&gn, &ee};
        f = fit_combo(lhs, basis, tol);
        cs = {f.coeffs[0], -f.coeffs[1]};
        eta_coeff = cs[1];
        std::vector<const TensorN*> side{&Sn, &gn, &ee};
        FitResult ry = fit_combo(Lgn, side, tol);
        sigma1 = -ry.coeffs[0] / 2.0;
        break;
      }
      case SolitonKind::ricci_yamabe: {
        TensorN lhs = 0.5 * Lgn;
        std::vector<const TensorN*> basis{&Sn, &gn};
        f = fit_combo(lhs, basis, tol);
        cs = {-f.coeffs[0],
              -f.coeffs[1] + 0.5 * alpha2 * at.scalar_curvature()};
        break;
      }
      case SolitonKind::eta_ricci_yamabe: {
        std::vector<const TensorN*> basis{&Sn, &gn, &ee};
        f = fit_combo(Lgn, basis, tol);
        cs = {-f.coeffs[0] / 2.0, -f.coeffs[1] / 2.0, f.coeffs[2] / 2.0};
        eta_coeff = cs[2];
        sigma1 = cs[0];
        break;
      }
    }
    out.coeffs.push_back(std::move(cs));
    out.residuals.push_back(f.residual);
    out.worst_residual = std::max(out.worst_residual, f.residual);
    if (f.verdict == Verdict::holds) ++holds;
    if (f.verdict == Verdict::fails) ++fails;
    if (eta_kind) {
      min_eta = std::min(min_eta, std::abs(eta_coeff));
      out.sigma1_is_one.push_back(std::abs(sigma1 - 1.0) <= 1e-6 ? 1 : 0);
    }
  }

  out.essential_eta =
      !eta_kind || (!points.empty() && min_eta > tol.indep);
  out.verdict = aggregate_verdict(holds, fails, static_cast<int>(points.size()));
  if (eta_kind && out.verdict == Verdict::holds && !out.essential_eta) {
    out.verdict = Verdict::fails;
    out.note =
        "exact fit, but the eta coefficient vanishes: the ansatz degenerates "
        "to its eta-free form";
  }
  std::string smooth = smoothness_note(tower.spec(), points, out.coeffs,
                                       out.names, tol.indep);
  if (!smooth.empty()) {
    if (!out.note.empty()) out.note += "; ";
    out.note += smooth;
  }
  return out;
}

EMTensor energy_momentum(Tower& tower, double lambda, double nu) {
  if (nu == 0.0)
    throw std::invalid_argument("energy_momentum: nu must be nonzero");
  ExprPool& pool = tower.pool();
  const int n = tower.n();
  const TensorS& S = tower.ricci();
  const TensorS& g = tower.metric();
  Expr kap = tower.scalar_curvature();

  Rational nur = rationalize(nu, "energy_momentum nu");
  auto inv = Rational::div(Rational::integer(1), nur);
  if (!inv)
    throw std::invalid_argument("energy_momentum: nu must be nonzero");
  Expr inv_nu = pool.constant(*inv);
  Expr lam = pool.constant(rationalize(lambda, "energy_momentum lambda"));
  Expr half = pool.constant(Rational(1, 2));
  // Lambda - kappa/2, the g-coefficient inside the bracket
  Expr gc = pool.sub(lam, pool.mul(half, kap));

  EMTensor out;
  out.lambda = lambda;
  out.nu = nu;
  out.tensor = TensorS(n, 2, pool.zero(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.tensor(i, j) =
          pool.mul(inv_nu, pool.add(S(i, j), pool.mul(gc, g(i, j))));
  return out;
}

EMSuite em_pseudosymmetry_suite(Tower& tower,
                                const std::vector<Binding>& points,
                                double lambda, double nu,
                                const Tolerances& tol) {
  EMTensor em = energy_momentum(tower, lambda, nu);
  const CurvKind dots[4] = {CurvKind::R, CurvKind::C, CurvKind::W,
                            CurvKind::K};
  const CurvKind all[5] = {CurvKind::R, CurvKind::C, CurvKind::W, CurvKind::K,
                           CurvKind::P};
  EMSuite out;
  int holds = 0, fails = 0, total = 0;
  bool first = true;
  for (const Binding& b : points) {
    TowerAt at(tower, b);
    TensorN Tn = at.eval(em.tensor);
    TensorN qg = tachibana(at.metric(), Tn);
    for (int i = 0; i < 4; ++i) {
      TensorN dx = dot_action(at.curvature(dots[i]), Tn, at.inverse_metric());
      FitResult f = fit_scalar(dx, qg, tol);
      out.dot_worst[i] = std::max(out.dot_worst[i], f.residual);
      out.worst_residual = std::max(out.worst_residual, f.residual);
      ++total;
      if (f.verdict == Verdict::holds) ++holds;
      if (f.verdict == Verdict::fails) ++fails;
      if (first) out.dot_fits[i] = std::move(f);
    }
    for (int i = 0; i < 5; ++i) {
      const TensorN& X = at.curvature(all[i]);
      // flat curvature: every symmetric (0,2) tensor is compatible
      double r = X.norm_inf() <= tol.zero_floor
                     ? 0.0
                     : compat_residual(at, X, Tn, tol);
      out.compat_residual[i] = std::max(out.compat_residual[i], r);
      out.worst_residual = std::max(out.worst_residual, r);
    }
    first = false;
  }
  double worst_compat =
      *std::max_element(out.compat_residual.begin(), out.compat_residual.end());
  out.verdict = aggregate_verdict(holds, fails, total);
  if (out.verdict == Verdict::holds && worst_compat > tol.dep)
    out.verdict = worst_compat >= tol.indep ? Verdict::fails
                                            : Verdict::inconclusive;
  return out;
}

}  // namespace curvlab
