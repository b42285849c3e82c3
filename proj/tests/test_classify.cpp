#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "curvlab/classify.hpp"

using namespace curvlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

TowerAt at_ref(Tower& tw) {
  Binding b = tw.spec().binding_at({0.0, 2.0, kPi / 2, 0.0});
  return TowerAt(tw, b);
}

}  // namespace

TEST_CASE("einstein level two with golden coefficients") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  EinsteinLevel lvl = einstein_level(pt);
  REQUIRE(lvl.level == 2);
  REQUIRE(lvl.coeffs.size() == 2);
  // S^2 + c_1 S + c_0 g = 0 with (c_0, c_1) ascending in power
  CHECK(lvl.coeffs[0] == doctest::Approx(-0.02016).epsilon(1e-9));
  CHECK(lvl.coeffs[1] == doctest::Approx(-0.048).epsilon(1e-9));
  CHECK(lvl.residual <= 1e-9);

  Binding b2 = tw.spec().binding_at({0.3, 1.7, 1.1, 2.0});
  TowerAt pt2(tw, b2);
  CHECK(einstein_level(pt2).level == 2);
}

TEST_CASE("quasi einstein rank two with alpha") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  QuasiEinstein qe = quasi_einstein(pt);
  CHECK(qe.rank == 2);
  CHECK(qe.alpha == doctest::Approx(-0.12).epsilon(1e-8));

  Tower sch(builtin_metric("schwarzschild"));
  Binding b = sch.spec().binding_at({0.0, 3.0, 1.0, 0.5});
  TowerAt sp(sch, b);
  QuasiEinstein flat = quasi_einstein(sp);
  CHECK(flat.rank == 0);
  CHECK(std::abs(flat.alpha) <= 1e-10);
}

TEST_CASE("generalized quasi einstein closed forms hold at every point") {
  MetricSpec spec = builtin_metric("hayward");
  Tower tw(spec);
  ExprPool& pool = *spec.pool;
  Expr alpha = pool.parse("-12*b^2*m^2/(r^3 + 2*b^2*m)^2");
  Expr one = pool.one();
  std::vector<Expr> Pi = {
      pool.parse("-(r^3 - 2*m*r^2 + 2*b^2*m)/(r^3 + 2*b^2*m)"), pool.one(),
      pool.zero(), pool.zero()};
  std::vector<Expr> phi = {
      pool.parse("(36*b^2*m^2*r^3 + (r^3 + 2*b^2*m)^2*(r^3 - 2*m*r^2 + "
                 "2*b^2*m))/(2*(r^3 + 2*b^2*m)^3)"),
      pool.parse("18*b^2*m^2*r^3/((r^3 + 2*b^2*m)^2*(r^3 - 2*m*r^2 + "
                 "2*b^2*m)) - 1/2"),
      pool.zero(), pool.zero()};

  TowerAt ref = at_ref(tw);
  CHECK(ref(alpha) == doctest::Approx(-0.12).epsilon(1e-12));
  CHECK(ref(Pi[0]) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(ref(phi[0]) == doctest::Approx(0.244).epsilon(1e-12));
  CHECK(ref(phi[1]) == doctest::Approx(0.22).epsilon(1e-12));

  SamplePlan plan;
  plan.count = 8;
  for (const Binding& b : sample_points(spec, plan)) {
    TowerAt pt(tw, b);
    FitResult fr = gqe_verify(pt, alpha, one, one, Pi, phi);
    CHECK(fr.verdict == Verdict::holds);
    CHECK(fr.residual <= 1e-9);
  }

  // perturbed beta must break the decomposition
  Expr bad = spec.pool->parse("101/100");
  FitResult broken = gqe_verify(ref, alpha, bad, one, Pi, phi);
  CHECK(broken.verdict == Verdict::fails);
}

TEST_CASE("roter coefficients at the reference point") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  FitResult fr = roter_fit(pt);
  REQUIRE(fr.verdict == Verdict::holds);
  CHECK(fr.coeffs[0] == doctest::Approx(-1.0 / 60).epsilon(1e-8));
  CHECK(fr.coeffs[1] == doctest::Approx(5.0 / 9).epsilon(1e-8));
  CHECK(fr.coeffs[2] == doctest::Approx(-125.0 / 108).epsilon(1e-8));
  CHECK(fr.residual <= 1e-9);
}

TEST_CASE("generalized roter basis degenerates to rank three") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  FitResult fr = generalized_roter_fit(pt);
  CHECK(fr.rank == 3);  // S^2 lies in span{g, S}, so no proper extension
  CHECK(fr.verdict == Verdict::holds);
}

TEST_CASE("compatibility nullspaces are six dimensional block form") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  for (CurvKind kind : {CurvKind::R, CurvKind::C, CurvKind::W, CurvKind::K,
                        CurvKind::P}) {
    CAPTURE(to_string(kind));
    CompatResult cr = compatible_space(pt, pt.curvature(kind));
    CHECK(cr.dim == 6);
    CHECK(cr.block_pattern);
  }
  // Ricci and metric are members; an off-block candidate is not
  CHECK(compat_residual(pt, pt.riemann(), pt.ricci()) <= 1e-8);
  CHECK(compat_residual(pt, pt.riemann(), pt.metric()) <= 1e-8);
  TensorN off(4, 2);
  off(0, 2) = off(2, 0) = 1.0;
  CHECK(compat_residual(pt, pt.riemann(), off) >= 1e-4);

  Binding b2 = tw.spec().binding_at({0.1, 2.1, 0.8, 1.3});
  TowerAt pt2(tw, b2);
  CompatResult cr2 = compatible_space(pt2, pt2.curvature(CurvKind::C));
  CHECK(cr2.dim == 6);
  CHECK(cr2.block_pattern);
}

TEST_CASE("conformal two forms are recurrent, riemann two forms are not") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  OneFormFit c = two_form_recurrence(pt, CurvKind::C);
  CHECK(c.verdict == Verdict::holds);
  CHECK(c.nontrivial);
  CHECK(c.one_form[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(c.one_form[1] == doctest::Approx(2.4).epsilon(1e-8));
  CHECK(std::abs(c.one_form[2]) <= 1e-9);
  CHECK(std::abs(c.one_form[3]) <= 1e-9);

  // the cyclic derivative sum of R vanishes identically, so only the
  // trivial one-form fits and that does not count as recurrence
  OneFormFit r = two_form_recurrence(pt, CurvKind::R);
  CHECK(r.verdict == Verdict::fails);
  CHECK_FALSE(r.nontrivial);
  CHECK(r.residual <= 1e-10);

  OneFormFit w = two_form_recurrence(pt, CurvKind::W);
  CHECK(w.verdict == Verdict::fails);
  CHECK(w.residual >= 1e-4);
}

TEST_CASE("recurrence fails for hayward and holds trivially when flat") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  for (CurvKind kind : {CurvKind::R, CurvKind::P}) {
    OneFormFit fit = recurrence_fit(pt, kind);
    CHECK(fit.verdict == Verdict::fails);
    CHECK(fit.residual >= 1e-4);
  }

  Tower mink(builtin_metric("minkowski_spherical"));
  Binding b = mink.spec().binding_at({0.0, 1.5, 1.2, 0.4});
  TowerAt mp(mink, b);
  OneFormFit flat = recurrence_fit(mp, CurvKind::R);
  CHECK(flat.verdict == Verdict::holds);
  CHECK_FALSE(flat.nontrivial);
}

TEST_CASE("venzi dimension is zero for curvature, four for the zero tensor") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  CHECK(venzi_dim(pt, pt.riemann()) == 0);
  CHECK(venzi_dim(pt, pt.curvature(CurvKind::C)) == 0);
  TensorN zero(4, 4);
  CHECK(venzi_dim(pt, zero) == 4);
}

TEST_CASE("weak symmetry and chaki fits fail for hayward") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  WeakSymmetryFit ws = weak_symmetry_fit(pt, CurvKind::R);
  CHECK(ws.verdict == Verdict::fails);
  CHECK(ws.residual >= 1e-4);
  CHECK(ws.chaki_verdict == Verdict::fails);
  CHECK(ws.chaki_residual >= 1e-4);

  Tower mink(builtin_metric("minkowski_spherical"));
  Binding b = mink.spec().binding_at({0.0, 2.0, 0.9, 0.2});
  TowerAt mp(mink, b);
  WeakSymmetryFit flat = weak_symmetry_fit(mp, CurvKind::R);
  CHECK(flat.verdict == Verdict::holds);
  CHECK(flat.chaki_verdict == Verdict::holds);
}

TEST_CASE("ricci derivative flags") {
  Tower tw(builtin_metric("hayward"));
  TowerAt pt = at_ref(tw);
  RicciDerivativeFlags hf = ricci_derivative_flags(pt);
  CHECK_FALSE(hf.codazzi);
  CHECK_FALSE(hf.cyclic_parallel);
  CHECK(hf.codazzi_residual >= 1e-4);
  CHECK(hf.cyclic_residual >= 1e-4);

  Tower sch(builtin_metric("schwarzschild"));
  Binding sb = sch.spec().binding_at({0.0, 3.2, 1.0, 0.3});
  TowerAt sp(sch, sb);
  RicciDerivativeFlags sf = ricci_derivative_flags(sp);
  CHECK(sf.codazzi);
  CHECK(sf.cyclic_parallel);
}

TEST_CASE("a constant curvature metric classifies as einstein") {
  Tower tw(load_metric(std::string(CURVLAB_TEST_DATA) + "/de_sitter.json"));
  Binding b = tw.spec().binding_at({0.0, 1.5, 1.3, 0.2});
  TowerAt pt(tw, b);

  EinsteinLevel lvl = einstein_level(pt);
  REQUIRE(lvl.level == 1);
  CHECK(lvl.coeffs[0] == doctest::Approx(0.3).epsilon(1e-9));  // S = -3/10 g

  QuasiEinstein qe = quasi_einstein(pt);
  CHECK(qe.rank == 0);
  CHECK(qe.alpha == doctest::Approx(-0.3).epsilon(1e-8));

  // with R proportional to g ^ g every symmetric Z is compatible
  CompatResult cr = compatible_space(pt, pt.riemann());
  CHECK(cr.dim == 10);
  CHECK_FALSE(cr.block_pattern);

  CHECK(roter_fit(pt).verdict == Verdict::holds);
}
