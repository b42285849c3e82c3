#include "curvlab/report.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvlab/symflow.hpp"
#include "json.hpp"

namespace curvlab {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string vec_str(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + ")";
}

void append_note(PropertyRecord& rec, const std::string& text) {
  if (text.empty()) return;
  if (!rec.note.empty()) rec.note += "; ";
  rec.note += text;
}

// Per-row aggregation over sampled points.  The row claims are universally
// quantified over the chart region, so one point that clearly misses refutes
// them; "holds" still requires every point to pass.  Points that evaluate to
// non-finite numbers are dropped and counted, never fatal.
struct Acc {
  int holds = 0, fails = 0, total = 0, skipped = 0;
  std::vector<double> resid;

  void add(Verdict v, double r) {
    if (!std::isfinite(r)) {
      ++skipped;
      return;
    }
    ++total;
    resid.push_back(r);
    if (v == Verdict::holds)
      ++holds;
    else if (v == Verdict::fails)
      ++fails;
  }
  // Claim "r ~ 0" under the shared thresholds.
  void add_zero_claim(double r, const Tolerances& tol) {
    Verdict v = Verdict::inconclusive;
    if (std::isfinite(r)) {
      if (r <= tol.dep)
        v = Verdict::holds;
      else if (r >= tol.indep)
        v = Verdict::fails;
    }
    add(v, r);
  }
  Verdict verdict() const {
    if (total == 0) return Verdict::inconclusive;
    if (holds == total) return Verdict::holds;
    if (fails > 0) return Verdict::fails;
    return Verdict::inconclusive;
  }
  // Worst residual when the row holds; when it fails, the 10%-order
  // statistic, so at least 90% of the points sit at or above the reported
  // value.
  double residual() const {
    if (resid.empty()) return 0.0;
    std::vector<double> r = resid;
    std::sort(r.begin(), r.end());
    if (verdict() == Verdict::fails) return r[r.size() / 10];
    return r.back();
  }
};

PropertyRecord make_record(const std::string& name, const Acc& acc) {
  PropertyRecord rec;
  rec.name = name;
  rec.verdict = acc.verdict();
  rec.residual = acc.residual();
  rec.points = acc.total;
  if (acc.skipped > 0)
    append_note(rec, std::to_string(acc.skipped) +
                         " point(s) skipped (non-finite evaluation)");
  return rec;
}

const TensorN& target_tensor(TowerAt& at, char y) {
  switch (y) {
    case 'S': return at.ricci();
    case 'R': return at.curvature(CurvKind::R);
    case 'C': return at.curvature(CurvKind::C);
    case 'P': return at.curvature(CurvKind::P);
    case 'W': return at.curvature(CurvKind::W);
    case 'K': return at.curvature(CurvKind::K);
  }
  throw std::logic_error("unknown dot target");
}

// sigma_{k+1} / sigma_1 of S - alpha g: relative distance from rank <= k.
double rank_excess(TowerAt& at, double alpha, int k, const Tolerances& tol) {
  const int n = at.n();
  const TensorN& S = at.ricci();
  const TensorN& g = at.metric();
  Eigen::MatrixXd D(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D(i, j) = S(i, j) - alpha * g(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const auto& s = svd.singularValues();
  if (k >= s.size()) return 0.0;
  return s(k) / std::max(s(0), tol.zero_floor);
}

}  // namespace

ClassificationReport classification_report(const MetricSpec& spec,
                                           const SamplePlan& plan,
                                           const Tolerances& tol) {
  if (spec.chart.n != 4)
    throw std::invalid_argument(
        "classification report requires a 4-dimensional chart");

  ClassificationReport rep;
  rep.metric = spec.name;
  rep.params = spec.param_values;
  rep.seed = plan.seed;
  rep.count = plan.count;
  rep.tol = tol.dep;

  Tower tower(spec);
  const std::vector<Binding> pts = sample_points(spec, plan);
  std::vector<std::unique_ptr<TowerAt>> ats;
  ats.reserve(pts.size());
  for (const Binding& b : pts)
    ats.push_back(std::make_unique<TowerAt>(tower, b));
  const int n = tower.n();
  std::vector<PropertyRecord>& rows = rep.properties;

  // --- scalar curvature --------------------------------------------------
  {
    Acc acc;
    double first = 0.0;
    bool have = false;
    for (auto& at : ats) {
      double k = at->scalar_curvature();
      if (!have && std::isfinite(k)) {
        first = k;
        have = true;
      }
      Verdict v = Verdict::inconclusive;
      if (std::isfinite(k)) {
        if (std::abs(k) >= tol.indep)
          v = Verdict::holds;
        else if (std::abs(k) <= tol.dep)
          v = Verdict::fails;
      }
      acc.add(v, std::abs(k));
    }
    PropertyRecord rec = make_record("scalar_curvature_nonzero", acc);
    // For a nonzero claim the worst case is the smallest magnitude.
    if (!acc.resid.empty())
      rec.residual = *std::min_element(acc.resid.begin(), acc.resid.end());
    rec.witness = "kappa = " + fmt(first) + " at first point";
    rec.values = {first};
    if (rec.verdict == Verdict::fails)
      append_note(rec, "scalar curvature vanishes on the sampled region");
    rows.push_back(std::move(rec));
  }
  {
    std::vector<double> ks;
    int skipped = 0;
    for (auto& at : ats) {
      double k = at->scalar_curvature();
      if (std::isfinite(k))
        ks.push_back(k);
      else
        ++skipped;
    }
    PropertyRecord rec;
    rec.name = "scalar_curvature_constant";
    rec.points = static_cast<int>(ks.size());
    if (!ks.empty()) {
      auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
      double scale = std::max(std::abs(*lo), std::abs(*hi));
      double spread = (*hi - *lo) / std::max(scale, tol.zero_floor);
      rec.residual = spread;
      rec.values = {spread};
      rec.witness = "relative spread " + fmt(spread) + " across points";
      if (spread <= tol.dep)
        rec.verdict = Verdict::holds;
      else if (spread >= tol.indep)
        rec.verdict = Verdict::fails;
      if (scale <= tol.zero_floor)
        append_note(rec, "kappa = 0 everywhere");
    }
    if (skipped > 0)
      append_note(rec, std::to_string(skipped) +
                           " point(s) skipped (non-finite evaluation)");
    rows.push_back(std::move(rec));
  }

  // --- Einstein hierarchy ------------------------------------------------
  {
    Acc acc;
    double c0 = 0.0;
    bool have = false;
    for (auto& at : ats) {
      FitResult f = fit_scalar(at->ricci(), at->metric(), tol);
      acc.add(f.verdict, f.residual);
      if (!have && !f.coeffs.empty()) {
        c0 = f.coeffs[0];
        have = true;
      }
    }
    PropertyRecord rec = make_record("einstein", acc);
    rec.witness = "S = c g with c = " + fmt(c0);
    rec.values = {c0};
    rows.push_back(std::move(rec));
  }
  {
    Acc acc;
    EinsteinLevel first;
    int lev0 = -1;
    bool mixed = false;
    for (auto& at : ats) {
      EinsteinLevel lv = einstein_level(*at, tol);
      acc.add(lv.level > 0 ? Verdict::holds : Verdict::fails, lv.residual);
      if (lev0 < 0) {
        lev0 = lv.level;
        first = lv;
      } else if (lv.level != lev0) {
        mixed = true;
      }
    }
    PropertyRecord rec = make_record("einstein_level", acc);
    rec.witness = "level " + std::to_string(lev0) +
                  ", ascending coeffs " + vec_str(first.coeffs);
    rec.values = {static_cast<double>(lev0)};
    rec.values.insert(rec.values.end(), first.coeffs.begin(),
                      first.coeffs.end());
    if (mixed) {
      rec.verdict = Verdict::inconclusive;
      append_note(rec, "level varies across points");
    }
    rows.push_back(std::move(rec));
  }
  QuasiEinstein qe_first;
  {
    Acc acc1, acc2;
    bool have = false;
    for (auto& at : ats) {
      QuasiEinstein q = quasi_einstein(*at, tol);
      if (!have) {
        qe_first = q;
        have = true;
      }
      acc1.add_zero_claim(rank_excess(*at, q.alpha, 1, tol), tol);
      acc2.add_zero_claim(rank_excess(*at, q.alpha, 2, tol), tol);
    }
    PropertyRecord rec1 = make_record("quasi_einstein", acc1);
    rec1.witness = "rank(S - alpha g) = " + std::to_string(qe_first.rank) +
                   " at alpha = " + fmt(qe_first.alpha);
    rec1.values = {static_cast<double>(qe_first.rank), qe_first.alpha};
    rows.push_back(std::move(rec1));
    PropertyRecord rec2 = make_record("two_quasi_einstein", acc2);
    rec2.witness = "rank(S - alpha g) = " + std::to_string(qe_first.rank) +
                   " at alpha = " + fmt(qe_first.alpha);
    rec2.values = {static_cast<double>(qe_first.rank), qe_first.alpha};
    rows.push_back(std::move(rec2));
  }
  {
    PropertyRecord rec;
    rec.name = "generalized_quasi_einstein_chaki";
    if (spec.name == "hayward") {
      ExprPool& pool = tower.pool();
      auto E = [&pool](const char* s) { return pool.parse(s); };
      Expr alpha = E("-12*b^2*m^2/(2*b^2*m + r^3)^2");
      Expr beta = pool.one();
      Expr gamma = pool.one();
      std::vector<Expr> Pi = {
          E("-(2*b^2*m + r^2*(r - 2*m))/(2*b^2*m + r^3)"), pool.one(),
          pool.zero(), pool.zero()};
      std::vector<Expr> phi = {
          E("(36*b^2*m^2*r^3 + (2*b^2*m + r^3)^2*(2*b^2*m + r^2*(r - 2*m)))"
            "/(2*(2*b^2*m + r^3)^3)"),
          E("18*b^2*m^2*r^3/((2*b^2*m + r^3)^2*(2*b^2*m + r^2*(r - 2*m))) "
            "- 1/2"),
          pool.zero(), pool.zero()};
      Acc acc;
      double a0 = 0.0;
      bool have = false;
      for (auto& at : ats) {
        FitResult f = gqe_verify(*at, alpha, beta, gamma, Pi, phi, tol);
        acc.add(f.verdict, f.residual);
        if (!have) {
          a0 = (*at)(alpha);
          have = true;
        }
      }
      rec = make_record(rec.name, acc);
      rec.witness = "generator pair closes with alpha = " + fmt(a0) +
                    ", beta = gamma = 1";
      rec.values = {a0};
      if (rec.verdict != Verdict::holds)
        append_note(rec,
                    "registered generator pair does not close; the "
                    "discrepancy is reported, not adjusted");
    } else {
      rec.points = static_cast<int>(ats.size());
      append_note(rec,
                  "no generator ansatz registered for this metric; "
                  "existence was not searched");
    }
    rows.push_back(std::move(rec));
  }

  // --- Roter fits ---------------------------------------------------------
  {
    Acc acc;
    std::vector<double> c0;
    for (auto& at : ats) {
      FitResult f = roter_fit(*at, tol);
      acc.add(f.verdict, f.residual);
      if (c0.empty()) c0 = f.coeffs;
    }
    PropertyRecord rec = make_record("roter_type", acc);
    rec.witness = "R = c1 g^g + c2 g^S + c3 S^S, c = " + vec_str(c0);
    rec.values = c0;
    rows.push_back(std::move(rec));
  }
  {
    Acc acc;
    int rank0 = 0, plain_holds = 0;
    bool have = false;
    for (auto& at : ats) {
      FitResult fg = generalized_roter_fit(*at, tol);
      FitResult fp = roter_fit(*at, tol);
      if (fp.verdict == Verdict::holds) ++plain_holds;
      Verdict v = Verdict::inconclusive;
      if (fg.verdict == Verdict::holds && fp.verdict == Verdict::fails)
        v = Verdict::holds;
      else if (fg.verdict == Verdict::fails || fp.verdict == Verdict::holds)
        v = Verdict::fails;
      acc.add(v, fg.residual);
      if (!have) {
        rank0 = fg.rank;
        have = true;
      }
    }
    PropertyRecord rec = make_record("generalized_roter_proper", acc);
    rec.witness = "six-term basis rank " + std::to_string(rank0);
    rec.values = {static_cast<double>(rank0)};
    if (plain_holds == acc.total && acc.total > 0)
      append_note(rec, "already of Roter type; the six-term family is not "
                       "needed");
    rows.push_back(std::move(rec));
  }

  // --- semisymmetry-type vanishing claims --------------------------------
  {
    const struct {
      const char* row;
      char y;
    } semis[] = {{"semisymmetric", 'R'},
                 {"ricci_semisymmetric", 'S'},
                 {"weyl_semisymmetric", 'C'},
                 {"projective_semisymmetric", 'P'},
                 {"concircular_semisymmetric", 'W'},
                 {"conharmonic_semisymmetric", 'K'}};
    for (const auto& s : semis) {
      Acc acc;
      double first = 0.0;
      bool have = false;
      for (auto& at : ats) {
        const TensorN& R04 = at->curvature(CurvKind::R);
        const TensorN& H = target_tensor(*at, s.y);
        TensorN d = dot_action(R04, H, at->inverse_metric());
        double denom =
            std::max(R04.norm_inf() * H.norm_inf(), tol.zero_floor);
        double r = d.norm_inf() / denom;
        acc.add_zero_claim(r, tol);
        if (!have && std::isfinite(r)) {
          first = r;
          have = true;
        }
      }
      PropertyRecord rec = make_record(s.row, acc);
      rec.witness = std::string("||R.") + s.y + "|| / (||R|| ||" + s.y +
                    "||) = " + fmt(first);
      rec.values = {first};
      rows.push_back(std::move(rec));
    }
  }

  // --- pseudosymmetry dot fits -------------------------------------------
  {
    const struct {
      const char* row;
      CurvKind x;
      char y;
    } dots[] = {{"pseudosymmetric", CurvKind::R, 'R'},
                {"dot_R_S", CurvKind::R, 'S'},
                {"dot_R_C", CurvKind::R, 'C'},
                {"dot_R_P", CurvKind::R, 'P'},
                {"dot_R_W", CurvKind::R, 'W'},
                {"dot_R_K", CurvKind::R, 'K'},
                {"dot_C_R", CurvKind::C, 'R'},
                {"dot_C_S", CurvKind::C, 'S'},
                {"dot_C_C", CurvKind::C, 'C'},
                {"dot_C_P", CurvKind::C, 'P'},
                {"dot_C_W", CurvKind::C, 'W'},
                {"dot_C_K", CurvKind::C, 'K'},
                {"dot_W_R", CurvKind::W, 'R'},
                {"dot_W_S", CurvKind::W, 'S'},
                {"dot_W_C", CurvKind::W, 'C'},
                {"dot_W_P", CurvKind::W, 'P'},
                {"dot_W_W", CurvKind::W, 'W'},
                {"dot_W_K", CurvKind::W, 'K'},
                {"dot_K_R", CurvKind::K, 'R'},
                {"dot_K_S", CurvKind::K, 'S'},
                {"dot_K_C", CurvKind::K, 'C'},
                {"dot_K_P", CurvKind::K, 'P'},
                {"dot_K_W", CurvKind::K, 'W'},
                {"dot_K_K", CurvKind::K, 'K'},
                {"dot_P_S", CurvKind::P, 'S'},
                {"dot_P_R", CurvKind::P, 'R'},
                {"dot_P_C", CurvKind::P, 'C'},
                {"dot_P_W", CurvKind::P, 'W'},
                {"dot_P_K", CurvKind::P, 'K'}};
    for (const auto& d : dots) {
      Acc acc;
      double L0 = 0.0;
      bool have = false;
      for (auto& at : ats) {
        const TensorN& X = at->curvature(d.x);
        const TensorN& H = target_tensor(*at, d.y);
        TensorN lhs = dot_action(X, H, at->inverse_metric());
        TensorN rhs = tachibana(at->metric(), H);
        FitResult f = fit_scalar(lhs, rhs, tol);
        acc.add(f.verdict, f.residual);
        if (!have && !f.coeffs.empty()) {
          L0 = f.coeffs[0];
          have = true;
        }
      }
      PropertyRecord rec = make_record(d.row, acc);
      rec.witness = std::string(to_string(d.x)) + "." + d.y + " = L Q(g," +
                    d.y + ") with L = " + fmt(L0);
      rec.values = {L0};
      rows.push_back(std::move(rec));
    }
  }
  {
    Acc acc;
    double L0 = 0.0;
    bool have = false;
    for (auto& at : ats) {
      const TensorN& R04 = at->curvature(CurvKind::R);
      TensorN lhs = dot_action(R04, R04, at->inverse_metric());
      TensorN rhs = tachibana(at->ricci(), R04);
      FitResult f = fit_scalar(lhs, rhs, tol);
      acc.add(f.verdict, f.residual);
      if (!have && !f.coeffs.empty()) {
        L0 = f.coeffs[0];
        have = true;
      }
    }
    PropertyRecord rec = make_record("ricci_generalized_pseudosymmetric", acc);
    rec.witness = "R.R = L Q(S,R) with L = " + fmt(L0);
    rec.values = {L0};
    rows.push_back(std::move(rec));
  }
  {
    Acc acc;
    std::vector<double> c0;
    for (auto& at : ats) {
      const TensorN& R04 = at->curvature(CurvKind::R);
      TensorN lhs = dot_action(R04, R04, at->inverse_metric());
      TensorN b1 = tachibana(at->metric(), at->curvature(CurvKind::C));
      TensorN b2 = tachibana(at->ricci(), R04);
      FitResult f = fit_combo(lhs, {&b1, &b2}, tol);
      acc.add(f.verdict, f.residual);
      if (c0.empty()) c0 = f.coeffs;
    }
    PropertyRecord rec = make_record("span_RR_QgC_QSR", acc);
    rec.witness = "R.R = L Q(g,C) + c Q(S,R) with (L, c) = " + vec_str(c0);
    rec.values = c0;
    if (rec.verdict == Verdict::holds && c0.size() == 2 &&
        std::abs(c0[1] - 1.0) > 1e-6)
      append_note(rec, "second coefficient is not 1");
    rows.push_back(std::move(rec));
  }
  {
    Acc acc;
    std::vector<double> c0;
    for (auto& at : ats) {
      const TensorN& R04 = at->curvature(CurvKind::R);
      const TensorN& C04 = at->curvature(CurvKind::C);
      const TensorN& gi = at->inverse_metric();
      TensorN lhs = dot_action(C04, R04, gi) - dot_action(R04, C04, gi);
      TensorN b1 = tachibana(at->metric(), R04);
      TensorN b2 = tachibana(at->ricci(), R04);
      FitResult f = fit_combo(lhs, {&b1, &b2}, tol);
      acc.add(f.verdict, f.residual);
      if (c0.empty()) c0 = f.coeffs;
    }
    PropertyRecord rec = make_record("span_CR_minus_RC", acc);
    rec.witness =
        "C.R - R.C = L1 Q(g,R) + L2 Q(S,R) with (L1, L2) = " + vec_str(c0);
    rec.values = c0;
    rows.push_back(std::move(rec));
  }

  // --- compatibility nullspaces ------------------------------------------
  {
    const struct {
      const char* row;
      CurvKind k;
    } kinds[] = {{"riemann_compatible_block", CurvKind::R},
                 {"weyl_compatible_block", CurvKind::C},
                 {"concircular_compatible_block", CurvKind::W},
                 {"conharmonic_compatible_block", CurvKind::K},
                 {"projective_compatible_block", CurvKind::P}};
    for (const auto& kk : kinds) {
      Acc acc;
      int dim0 = -1, max_dim = 0;
      bool blk0 = false;
      for (auto& at : ats) {
        CompatResult c = compatible_space(*at, at->curvature(kk.k), tol);
        acc.add((c.dim == 6 && c.block_pattern) ? Verdict::holds
                                                : Verdict::fails,
                0.0);
        if (dim0 < 0) {
          dim0 = c.dim;
          blk0 = c.block_pattern;
        }
        max_dim = std::max(max_dim, c.dim);
      }
      PropertyRecord rec = make_record(kk.row, acc);
      rec.witness = "nullspace dim " + std::to_string(dim0) +
                    (blk0 ? ", pair-diagonal block" : ", not the block");
      rec.values = {static_cast<double>(dim0), blk0 ? 1.0 : 0.0};
      if (rec.verdict == Verdict::fails && max_dim > 6)
        append_note(rec, "nullspace strictly larger than the "
                         "six-dimensional block");
      rows.push_back(std::move(rec));
    }
  }
  {
    Acc acc;
    double first = 0.0;
    bool have = false;
    for (auto& at : ats) {
      double worst = 0.0;
      for (CurvKind k : {CurvKind::R, CurvKind::C, CurvKind::W, CurvKind::K,
                         CurvKind::P})
        worst = std::max(
            worst, compat_residual(*at, at->curvature(k), at->ricci(), tol));
      acc.add_zero_claim(worst, tol);
      if (!have && std::isfinite(worst)) {
        first = worst;
        have = true;
      }
    }
    PropertyRecord rec = make_record("ricci_compatible", acc);
    rec.witness =
        "worst membership residual over (R,C,W,K,P) = " + fmt(first);
    rec.values = {first};
    rows.push_back(std::move(rec));
  }

  // --- derivative-level structure ----------------------------------------
  {
    const struct {
      const char* row;
      CurvKind k;
    } kinds[] = {{"parallel_R", CurvKind::R},
                 {"parallel_C", CurvKind::C},
                 {"parallel_W", CurvKind::W},
                 {"parallel_K", CurvKind::K},
                 {"parallel_P", CurvKind::P}};
    for (const auto& kk : kinds) {
      Acc acc;
      int trivial = 0;
      for (auto& at : ats) {
        const TensorN& T = at->curvature(kk.k);
        const TensorN& DT = at->grad_curvature(kk.k);
        if (T.norm_inf() <= tol.zero_floor &&
            DT.norm_inf() <= tol.zero_floor) {
          acc.add(Verdict::holds, 0.0);
          ++trivial;
          continue;
        }
        acc.add_zero_claim(
            DT.norm_inf() / std::max(T.norm_inf(), tol.zero_floor), tol);
      }
      PropertyRecord rec = make_record(kk.row, acc);
      rec.witness = "||grad T|| / ||T||, worst-case reported";
      if (trivial == acc.total && acc.total > 0)
        append_note(rec, "tensor vanishes; parallel trivially");
      rows.push_back(std::move(rec));
    }
  }
  {
    Acc acc;
    int trivial = 0;
    for (auto& at : ats) {
      const TensorN& S = at->ricci();
      const TensorN& DS = at->grad_ricci();
      if (S.norm_inf() <= tol.zero_floor &&
          DS.norm_inf() <= tol.zero_floor) {
        acc.add(Verdict::holds, 0.0);
        ++trivial;
        continue;
      }
      acc.add_zero_claim(
          DS.norm_inf() / std::max(S.norm_inf(), tol.zero_floor), tol);
    }
    PropertyRecord rec = make_record("parallel_ricci", acc);
    rec.witness = "||grad S|| / ||S||, worst-case reported";
    if (trivial == acc.total && acc.total > 0)
      append_note(rec, "Ricci tensor vanishes; parallel trivially");
    rows.push_back(std::move(rec));
  }
  {
    const struct {
      const char* row;
      CurvKind k;
    } kinds[] = {{"recurrent_R", CurvKind::R},
                 {"recurrent_C", CurvKind::C},
                 {"recurrent_W", CurvKind::W},
                 {"recurrent_K", CurvKind::K},
                 {"recurrent_P", CurvKind::P}};
    for (const auto& kk : kinds) {
      Acc acc;
      std::array<double, 4> pi0{};
      bool have = false;
      for (auto& at : ats) {
        OneFormFit f = recurrence_fit(*at, kk.k, tol);
        acc.add(f.verdict, f.residual);
        if (!have) {
          pi0 = f.one_form;
          have = true;
        }
      }
      PropertyRecord rec = make_record(kk.row, acc);
      rec.witness = "best Pi = " +
                    vec_str({pi0[0], pi0[1], pi0[2], pi0[3]}) +
                    " at first point";
      rec.values.assign(pi0.begin(), pi0.end());
      rows.push_back(std::move(rec));
    }
  }
  {
    const struct {
      const char* row;
      CurvKind k;
    } kinds[] = {{"two_form_recurrent_R", CurvKind::R},
                 {"two_form_recurrent_C", CurvKind::C},
                 {"two_form_recurrent_W", CurvKind::W},
                 {"two_form_recurrent_K", CurvKind::K},
                 {"two_form_recurrent_P", CurvKind::P}};
    for (const auto& kk : kinds) {
      Acc acc;
      std::array<double, 4> s0{};
      bool have = false;
      int trivial = 0;
      for (auto& at : ats) {
        OneFormFit f = two_form_recurrence(*at, kk.k, tol);
        acc.add(f.verdict, f.residual);
        if (f.verdict == Verdict::fails && f.residual <= tol.dep) ++trivial;
        if (!have) {
          s0 = f.one_form;
          have = true;
        }
      }
      PropertyRecord rec = make_record(kk.row, acc);
      rec.witness = "Sigma = " + vec_str({s0[0], s0[1], s0[2], s0[3]}) +
                    " at first point";
      rec.values.assign(s0.begin(), s0.end());
      if (trivial == acc.total && acc.total > 0)
        append_note(rec, "only the trivial one-form fits: the cyclic "
                         "derivative sum vanishes identically");
      rows.push_back(std::move(rec));
    }
  }
  {
    const struct {
      const char* row;
      CurvKind k;
    } kinds[] = {{"venzi_R", CurvKind::R},
                 {"venzi_C", CurvKind::C},
                 {"venzi_W", CurvKind::W},
                 {"venzi_K", CurvKind::K},
                 {"venzi_P", CurvKind::P}};
    for (const auto& kk : kinds) {
      Acc acc;
      int dim0 = -1;
      int trivial = 0;
      for (auto& at : ats) {
        const TensorN& T = at->curvature(kk.k);
        int d = venzi_dim(*at, T, tol);
        double r = venzi_residual(*at, T, tol);
        if (T.norm_inf() <= tol.zero_floor) ++trivial;
        acc.add(d >= 1 ? Verdict::holds : Verdict::fails, r);
        if (dim0 < 0) dim0 = d;
      }
      PropertyRecord rec = make_record(kk.row, acc);
      rec.witness = "one-form nullspace dim " + std::to_string(dim0);
      rec.values = {static_cast<double>(dim0)};
      if (trivial == acc.total && acc.total > 0)
        append_note(rec, "tensor vanishes; holds trivially");
      rows.push_back(std::move(rec));
    }
  }
  {
    const struct {
      const char* wrow;
      const char* crow;
      CurvKind k;
    } kinds[] = {
        {"weakly_symmetric_R", "chaki_pseudosymmetric_R", CurvKind::R},
        {"weakly_symmetric_C", "chaki_pseudosymmetric_C", CurvKind::C},
        {"weakly_symmetric_W", "chaki_pseudosymmetric_W", CurvKind::W},
        {"weakly_symmetric_K", "chaki_pseudosymmetric_K", CurvKind::K},
        {"weakly_symmetric_P", "chaki_pseudosymmetric_P", CurvKind::P}};
    for (const auto& kk : kinds) {
      Acc accW, accC;
      for (auto& at : ats) {
        WeakSymmetryFit f = weak_symmetry_fit(*at, kk.k, tol);
        accW.add(f.verdict, f.residual);
        accC.add(f.chaki_verdict, f.chaki_residual);
      }
      PropertyRecord recW = make_record(kk.wrow, accW);
      recW.witness = "grad T vs (Pi, O1, O2) transport fit";
      rows.push_back(std::move(recW));
      PropertyRecord recC = make_record(kk.crow, accC);
      recC.witness = "grad T vs Chaki-constrained transport fit";
      rows.push_back(std::move(recC));
    }
  }
  {
    Acc accCod, accCyc;
    double cod0 = 0.0, cyc0 = 0.0;
    bool have = false;
    for (auto& at : ats) {
      RicciDerivativeFlags f = ricci_derivative_flags(*at, tol);
      accCod.add_zero_claim(f.codazzi_residual, tol);
      accCyc.add_zero_claim(f.cyclic_residual, tol);
      if (!have) {
        cod0 = f.codazzi_residual;
        cyc0 = f.cyclic_residual;
        have = true;
      }
    }
    PropertyRecord recCod = make_record("ricci_codazzi", accCod);
    recCod.witness = "||grad_a S_bc - grad_b S_ac|| / ||grad S|| = " +
                     fmt(cod0) + " at first point";
    rows.push_back(std::move(recCod));
    PropertyRecord recCyc = make_record("ricci_cyclic_parallel", accCyc);
    recCyc.witness = "cyclic grad S sum, relative " + fmt(cyc0) +
                     " at first point";
    rows.push_back(std::move(recCyc));
  }

  // --- symmetry flows ----------------------------------------------------
  for (int a = 0; a < n; ++a) {
    VectorFieldSpec xi = coordinate_field(spec, a);
    KillingResult kr = killing_check(tower, xi, pts, 1e-12);
    PropertyRecord rec;
    rec.name = "killing_d" + spec.chart.coords[a];
    rec.points = static_cast<int>(pts.size());
    rec.residual = kr.max_abs;
    rec.values = {kr.max_abs};
    rec.witness = "max |L_xi g| = " + fmt(kr.max_abs);
    if (kr.killing)
      rec.verdict = Verdict::holds;
    else if (kr.max_abs >= tol.indep)
      rec.verdict = Verdict::fails;
    rows.push_back(std::move(rec));
  }
  {
    const std::string c1 = spec.chart.coords[1];
    VectorFieldSpec xr = coordinate_field(spec, 1);
    auto lie_rows = [&](InheritKind kind, const std::string& coll_name,
                        const std::string& fit_name, bool generalized) {
      InheritanceFit f =
          inheritance_fit(tower, kind, xr, pts, generalized, tol);
      if (!coll_name.empty()) {
        Acc acc;
        for (double r : f.lie_rel) acc.add_zero_claim(r, tol);
        PropertyRecord rec = make_record(coll_name, acc);
        rec.witness = "||L_xi T|| / ||T||, worst-case reported";
        rows.push_back(std::move(rec));
      }
      Acc acc;
      for (const FitResult& fr : f.fits) acc.add(fr.verdict, fr.residual);
      PropertyRecord rec = make_record(fit_name, acc);
      double c0 = f.fits.empty() || f.fits.front().coeffs.empty()
                      ? 0.0
                      : f.fits.front().coeffs[0];
      rec.witness = "L_xi T = c1 T with c1 = " + fmt(c0) + " at first point";
      rec.values = {c0};
      if (f.collineation)
        append_note(rec, "Lie derivative vanishes (collineation); the "
                         "factor is indeterminate");
      rows.push_back(std::move(rec));
    };
    lie_rows(InheritKind::S, "ricci_collineation_d" + c1,
             "ricci_inheritance_d" + c1, false);
    lie_rows(InheritKind::R13, "curvature_collineation_13_d" + c1,
             "curvature_inheritance_13_d" + c1, false);
    lie_rows(InheritKind::R04, "curvature_collineation_04_d" + c1,
             "curvature_inheritance_04_d" + c1, false);
    lie_rows(InheritKind::R04, "",
             "generalized_curvature_inheritance_04_d" + c1, true);

    std::vector<Expr> eta(n, tower.pool().zero());
    eta[1] = tower.pool().one();
    for (SolitonKind kind :
         {SolitonKind::ricci, SolitonKind::eta_ricci,
          SolitonKind::ricci_yamabe, SolitonKind::eta_ricci_yamabe}) {
      SolitonFit f = soliton_fit(tower, kind, xr, eta, pts, tol, 2.0);
      Acc acc;
      for (double r : f.residuals) acc.add_zero_claim(r, tol);
      PropertyRecord rec = make_record(std::string("soliton_") +
                                           to_string(kind),
                                       acc);
      rec.verdict = f.verdict;  // includes the essential-eta rejection
      std::string w;
      if (!f.coeffs.empty()) {
        for (std::size_t i = 0; i < f.names.size(); ++i) {
          if (i) w += ", ";
          w += f.names[i] + " = " + fmt(f.coeffs.front()[i]);
        }
        rec.values = f.coeffs.front();
      }
      rec.witness = w + " (first point; xi = d" + c1 + ")";
      append_note(rec, f.note);
      if (kind == SolitonKind::eta_ricci ||
          kind == SolitonKind::eta_ricci_yamabe) {
        int locus = 0;
        for (int s : f.sigma1_is_one) locus += s;
        if (locus > 0)
          append_note(rec, "sigma1 = 1 at " + std::to_string(locus) + "/" +
                               std::to_string(f.sigma1_is_one.size()) +
                               " points");
      }
      rows.push_back(std::move(rec));
    }
  }
  {
    EMSuite s = em_pseudosymmetry_suite(tower, pts, 0.0, 8.0, tol);
    {
      PropertyRecord rec;
      rec.name = "em_pseudosymmetric";
      rec.points = static_cast<int>(pts.size());
      double worst = *std::max_element(s.dot_worst.begin(), s.dot_worst.end());
      rec.residual = worst;
      if (worst <= tol.dep)
        rec.verdict = Verdict::holds;
      else if (worst >= tol.indep)
        rec.verdict = Verdict::fails;
      std::vector<double> L;
      for (const FitResult& f : s.dot_fits)
        L.push_back(f.coeffs.empty() ? 0.0 : f.coeffs[0]);
      rec.values = L;
      rec.witness = "X.T = L Q(g,T) for X in (R,C,W,K), L = " + vec_str(L);
      append_note(rec, "Lambda = 0, nu = 8");
      rows.push_back(std::move(rec));
    }
    {
      PropertyRecord rec;
      rec.name = "em_compatible";
      rec.points = static_cast<int>(pts.size());
      double worst = *std::max_element(s.compat_residual.begin(),
                                       s.compat_residual.end());
      rec.residual = worst;
      if (worst <= tol.dep)
        rec.verdict = Verdict::holds;
      else if (worst >= tol.indep)
        rec.verdict = Verdict::fails;
      rec.values.assign(s.compat_residual.begin(), s.compat_residual.end());
      rec.witness =
          "membership residual in the (R,C,W,K,P) compatibility "
          "nullspaces, worst = " +
          fmt(worst);
      rows.push_back(std::move(rec));
    }
  }

  return rep;
}

// --- rendering ------------------------------------------------------------

std::string report_json(const ClassificationReport& rep) {
  nlohmann::ordered_json j;
  j["metric"] = rep.metric;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rep.params) j["params"][k] = v;
  j["seed"] = rep.seed;
  j["points"] = rep.count;
  j["tol"] = rep.tol;
  j["properties"] = nlohmann::ordered_json::array();
  for (const PropertyRecord& p : rep.properties) {
    nlohmann::ordered_json o;
    o["name"] = p.name;
    o["verdict"] = to_string(p.verdict);
    o["witness"] = p.witness;
    o["residual"] = p.residual;
    o["points"] = p.points;
    if (!p.values.empty()) o["values"] = p.values;
    if (!p.note.empty()) o["note"] = p.note;
    j["properties"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

std::string report_markdown(const ClassificationReport& rep) {
  std::string out = "# curvlab report: " + rep.metric + "\n\n";
  out += "- params:";
  if (rep.params.empty()) out += " (none)";
  bool first = true;
  for (const auto& [k, v] : rep.params) {
    out += first ? " " : ", ";
    out += k + " = " + fmt(v);
    first = false;
  }
  out += "\n- seed " + std::to_string(rep.seed) + ", " +
         std::to_string(rep.count) + " points, tol " + fmt(rep.tol) + "\n\n";
  out += "| property | verdict | witness | residual | pts | note |\n";
  out += "|---|---|---|---|---|---|\n";
  for (const PropertyRecord& p : rep.properties) {
    out += "| " + p.name + " | " + to_string(p.verdict) + " | " + p.witness +
           " | " + fmt(p.residual) + " | " + std::to_string(p.points) +
           " | " + p.note + " |\n";
  }
  return out;
}

namespace {

std::vector<std::string> column_labels(
    const std::vector<ClassificationReport>& reps) {
  std::vector<std::string> labels;
  for (const ClassificationReport& r : reps) {
    std::string base = r.metric.empty() ? "metric" : r.metric;
    std::string label = base;
    int k = 2;
    while (std::find(labels.begin(), labels.end(), label) != labels.end())
      label = base + "#" + std::to_string(k++);
    labels.push_back(label);
  }
  return labels;
}

std::vector<std::string> row_names(
    const std::vector<ClassificationReport>& reps) {
  std::vector<std::string> names;
  for (const ClassificationReport& r : reps)
    for (const PropertyRecord& p : r.properties)
      if (std::find(names.begin(), names.end(), p.name) == names.end())
        names.push_back(p.name);
  return names;
}

}  // namespace

std::string comparison_json(const std::vector<ClassificationReport>& reps) {
  nlohmann::ordered_json j;
  j["metrics"] = nlohmann::ordered_json::array();
  std::vector<std::string> labels = column_labels(reps);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    nlohmann::ordered_json m;
    m["label"] = labels[i];
    m["metric"] = reps[i].metric;
    m["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : reps[i].params) m["params"][k] = v;
    j["metrics"].push_back(std::move(m));
  }
  j["properties"] = nlohmann::ordered_json::array();
  for (const std::string& name : row_names(reps)) {
    nlohmann::ordered_json o;
    o["name"] = name;
    o["verdicts"] = nlohmann::ordered_json::array();
    for (const ClassificationReport& r : reps) {
      const PropertyRecord* p = r.find(name);
      if (!p) {
        o["verdicts"].push_back(nullptr);
        continue;
      }
      nlohmann::ordered_json v;
      v["verdict"] = to_string(p->verdict);
      v["residual"] = p->residual;
      v["witness"] = p->witness;
      o["verdicts"].push_back(std::move(v));
    }
    j["properties"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

std::string comparison_markdown(
    const std::vector<ClassificationReport>& reps) {
  std::vector<std::string> labels = column_labels(reps);
  std::string out = "# curvlab comparison\n\n| property |";
  for (const std::string& l : labels) out += " " + l + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < labels.size(); ++i) out += "---|";
  out += "\n";
  for (const std::string& name : row_names(reps)) {
    out += "| " + name + " |";
    for (const ClassificationReport& r : reps) {
      const PropertyRecord* p = r.find(name);
      if (!p)
        out += " - |";
      else
        out += std::string(" ") + to_string(p->verdict) + " (" +
               fmt(p->residual) + ") |";
    }
    out += "\n";
  }
  return out;
}

}  // namespace curvlab
