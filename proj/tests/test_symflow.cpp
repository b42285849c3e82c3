#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvlab/symflow.hpp"

using namespace curvlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Binding pstar(const MetricSpec& spec) {
  return spec.binding_at({0.0, 2.0, kPi / 2, 0.0});
}

// Hayward blocks, m = b = 1
double hB(double r) { return 2.0 + r * r * (r - 2.0); }
double hB1(double r) { return 2.0 + r * r * r; }
double hB2(double r) { return 4.0 - r * r * r; }

}  // namespace

TEST_CASE("lie derivative of g along d_r matches closed forms") {
  Tower tw(builtin_metric("hayward"));
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);
  TensorS A = lie_derivative(tw.spec(), tw.metric(), dr);

  for (double r : {2.0, 1.7}) {
    Binding b = tw.spec().binding_at({0.0, r, kPi / 2, 0.0});
    TowerAt at(tw, b);
    TensorN An = at.eval(A);
    double a11 = 2.0 * r * hB2(r) / (hB1(r) * hB1(r));
    double a22 = 2.0 * r * hB2(r) / (hB(r) * hB(r));
    CHECK(An(0, 0) == doctest::Approx(a11).epsilon(1e-12));
    CHECK(An(1, 1) == doctest::Approx(a22).epsilon(1e-12));
    CHECK(An(2, 2) == doctest::Approx(2.0 * r).epsilon(1e-12));
    CHECK(An(3, 3) == doctest::Approx(2.0 * r).epsilon(1e-12));  // sin = 1
    CHECK(std::abs(An(0, 1)) <= 1e-14);
  }
  // spot values at the reference point
  Binding b = pstar(tw.spec());
  TowerAt at(tw, b);
  TensorN An = at.eval(A);
  CHECK(An(0, 0) == doctest::Approx(-0.16).epsilon(1e-12));
  CHECK(An(1, 1) == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(An(2, 2) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("lie derivative of R along d_theta matches closed forms") {
  Tower tw(builtin_metric("hayward"));
  VectorFieldSpec dth = coordinate_field(tw.spec(), 2);
  TensorS O = lie_derivative(tw.spec(), tw.riemann(), dth);

  double r = 2.0, th = kPi / 3;
  Binding b = tw.spec().binding_at({0.0, r, th, 0.0});
  TowerAt at(tw, b);
  TensorN On = at.eval(O);
  double s2 = std::sin(2.0 * th);
  // R_3434 = 2 m r^4 sin^2(theta) / B1, so d_theta gives sin(2 theta)
  CHECK(On(2, 3, 2, 3) ==
        doctest::Approx(2.0 * std::pow(r, 4) * s2 / hB1(r)).epsilon(1e-12));
  CHECK(On(2, 3, 2, 3) == doctest::Approx(2.7712813).epsilon(1e-7));
  // d_theta of R_1414 = -m r^2 B B2 sin^2(theta) / B1^3
  double o1414 = -r * r * hB(r) * hB2(r) * s2 / std::pow(hB1(r), 3);
  CHECK(On(0, 3, 0, 3) == doctest::Approx(o1414).epsilon(1e-12));
  // purely radial components have no theta dependence
  CHECK(std::abs(On(0, 1, 0, 1)) <= 1e-14);
}

TEST_CASE("lie derivative valence guards") {
  Tower tw(builtin_metric("hayward"));
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);
  CHECK_THROWS_AS(lie_derivative(tw.spec(), tw.grad_ricci(), dr),
                  std::invalid_argument);
  VectorFieldSpec bad;
  bad.comp = {tw.pool().one()};
  CHECK_THROWS_AS(lie_derivative(tw.spec(), tw.metric(), bad),
                  std::invalid_argument);
  CHECK_THROWS_AS(coordinate_field(tw.spec(), 7), std::invalid_argument);
}

TEST_CASE("lie derivatives of (1,3) and (0,4) curvature are linked by g") {
  Tower tw(builtin_metric("hayward"));
  VectorFieldSpec xi =
      parse_vector_field(tw.spec(), "0.2*r, 0.1*r^2, 0.3*theta, 0");
  TensorS L04 = lie_derivative(tw.spec(), tw.riemann(), xi);
  TensorS L13 = lie_derivative(tw.spec(), tw.riemann13(), xi);
  TensorS Lg = lie_derivative(tw.spec(), tw.metric(), xi);

  Binding b = pstar(tw.spec());
  TowerAt at(tw, b);
  TensorN l04 = at.eval(L04), l13 = at.eval(L13), lg = at.eval(Lg);
  const TensorN& g = at.metric();
  const TensorN& rt = at.riemann13();
  double worst = 0.0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
          double rhs = 0.0;
          for (int e = 0; e < 4; ++e)
            rhs += lg(p, e) * rt(e, q, mu, nu) + g(p, e) * l13(e, q, mu, nu);
          worst = std::max(worst, std::abs(l04(p, q, mu, nu) - rhs));
        }
  CHECK(worst <= 1e-10 * std::max(1.0, l04.norm_inf()));
}

TEST_CASE("killing fields of the static spherical metric") {
  Tower tw(builtin_metric("hayward"));
  SamplePlan plan;
  plan.count = 6;
  plan.seed = 11;
  std::vector<Binding> pts = sample_points(tw.spec(), plan);

  CHECK(killing_check(tw, coordinate_field(tw.spec(), 0), pts).killing);
  CHECK(killing_check(tw, coordinate_field(tw.spec(), 3), pts).killing);
  VectorFieldSpec combo = parse_vector_field(tw.spec(), "0.5, 0, 0, 2");
  KillingResult kc = killing_check(tw, combo, pts);
  CHECK(kc.killing);
  CHECK(kc.max_abs <= 1e-12);
  CHECK_FALSE(killing_check(tw, coordinate_field(tw.spec(), 1), pts).killing);
}

TEST_CASE("global monopole collineations and R04 inheritance along d_r") {
  Tower tw(builtin_metric("global_monopole"));
  SamplePlan plan;
  plan.count = 6;
  plan.seed = 5;
  std::vector<Binding> pts = sample_points(tw.spec(), plan);
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);

  InheritanceFit fs = inheritance_fit(tw, InheritKind::S, dr, pts);
  CHECK(fs.collineation);
  CHECK(fs.verdict == Verdict::holds);

  InheritanceFit f13 = inheritance_fit(tw, InheritKind::R13, dr, pts);
  CHECK(f13.collineation);

  InheritanceFit f04 = inheritance_fit(tw, InheritKind::R04, dr, pts);
  CHECK_FALSE(f04.collineation);
  CHECK(f04.verdict == Verdict::holds);
  std::uint32_t rs = tw.spec().coord_sym(1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r = pts[i].get(rs);
    CHECK(f04.fits[i].coeffs[0] == doctest::Approx(2.0 / r).epsilon(1e-9));
  }
}

TEST_CASE("hayward admits no inheritance for d_r, d_theta, or a mix") {
  Tower tw(builtin_metric("hayward"));
  SamplePlan plan;
  plan.count = 5;
  plan.seed = 3;
  std::vector<Binding> pts = sample_points(tw.spec(), plan);

  std::vector<VectorFieldSpec> fields = {
      coordinate_field(tw.spec(), 1), coordinate_field(tw.spec(), 2),
      parse_vector_field(tw.spec(), "0, 0.7, 0.3, 0")};
  for (const VectorFieldSpec& xi : fields) {
    for (InheritKind kind :
         {InheritKind::S, InheritKind::R13, InheritKind::R04}) {
      InheritanceFit f = inheritance_fit(tw, kind, xi, pts);
      CHECK_FALSE(f.collineation);
      CHECK(f.verdict == Verdict::fails);
      CHECK(f.worst_residual >= 1e-4);
    }
    InheritanceFit fg = inheritance_fit(tw, InheritKind::R04, xi, pts, true);
    CHECK(fg.verdict == Verdict::fails);
    CHECK(fg.worst_residual >= 1e-4);
  }
  CHECK_THROWS_AS(inheritance_fit(tw, InheritKind::S,
                                  coordinate_field(tw.spec(), 1), pts, true),
                  std::invalid_argument);
}

TEST_CASE("eta ricci yamabe fit on hayward recovers the coefficient trio") {
  Tower tw(builtin_metric("hayward"));
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);
  std::vector<Expr> eta = parse_one_form(tw.spec(), "0, 1, 0, 0");

  std::vector<Binding> pts = {pstar(tw.spec())};
  SamplePlan plan;
  plan.count = 10;
  plan.seed = 7;
  for (Binding& b : sample_points(tw.spec(), plan)) pts.push_back(b);

  SolitonFit fit =
      soliton_fit(tw, SolitonKind::eta_ricci_yamabe, dr, eta, pts);
  REQUIRE(fit.verdict == Verdict::holds);
  CHECK(fit.essential_eta);
  CHECK(fit.worst_residual <= 1e-10);
  CHECK(fit.coeffs[0][0] == doctest::Approx(25.0 / 72.0).epsilon(1e-9));
  CHECK(fit.coeffs[0][1] == doctest::Approx(-11.0 / 24.0).epsilon(1e-9));
  CHECK(fit.coeffs[0][2] == doctest::Approx(-4.0).epsilon(1e-9));

  std::uint32_t rs = tw.spec().coord_sym(1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r = pts[i].get(rs);
    double B = hB(r), B1 = hB1(r), B2 = hB2(r);
    double s1 = B1 * B1 * (4.0 + 4.0 * r * r * r - 3.0 * std::pow(r, 5) +
                           std::pow(r, 6)) /
                (36.0 * std::pow(r, 4) * B);
    double s2 = (4.0 - 2.0 * r * r * r + 3.0 * std::pow(r, 5) -
                 2.0 * std::pow(r, 6)) /
                (3.0 * std::pow(r, 4) * B);
    double s3 = 2.0 * r * B2 / (B * B);
    CHECK(fit.coeffs[i][0] == doctest::Approx(s1).epsilon(1e-8));
    CHECK(fit.coeffs[i][1] == doctest::Approx(s2).epsilon(1e-8));
    CHECK(fit.coeffs[i][2] == doctest::Approx(s3).epsilon(1e-8));
  }
}

TEST_CASE("plain soliton ansatz variants on hayward fail") {
  Tower tw(builtin_metric("hayward"));
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);
  std::vector<Expr> eta = parse_one_form(tw.spec(), "0, 1, 0, 0");
  SamplePlan plan;
  plan.count = 6;
  plan.seed = 9;
  std::vector<Binding> pts = sample_points(tw.spec(), plan);

  SolitonFit ricci = soliton_fit(tw, SolitonKind::ricci, dr, {}, pts);
  CHECK(ricci.verdict == Verdict::fails);
  CHECK(ricci.worst_residual >= 1e-4);

  SolitonFit er = soliton_fit(tw, SolitonKind::eta_ricci, dr, eta, pts);
  CHECK(er.verdict == Verdict::fails);
  CHECK(er.worst_residual >= 1e-4);
  REQUIRE(er.sigma1_is_one.size() == pts.size());
  for (int flag : er.sigma1_is_one) CHECK(flag == 0);

  CHECK_THROWS_AS(soliton_fit(tw, SolitonKind::eta_ricci, dr, {}, pts),
                  std::invalid_argument);
}

TEST_CASE("global monopole rejects both eta ansatz forms") {
  Tower tw(builtin_metric("global_monopole"));
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);
  std::vector<Expr> eta = parse_one_form(tw.spec(), "0, 1, 0, 0");
  SamplePlan plan;
  plan.count = 8;
  plan.seed = 13;
  std::vector<Binding> pts = sample_points(tw.spec(), plan);

  SolitonFit er = soliton_fit(tw, SolitonKind::eta_ricci, dr, eta, pts);
  CHECK(er.verdict == Verdict::fails);
  CHECK(er.worst_residual >= 1e-4);

  // The eta-Ricci-Yamabe system closes exactly, but only with sigma3 = 0:
  // the eta term is inessential and the ansatz is rejected.
  SolitonFit ry = soliton_fit(tw, SolitonKind::eta_ricci_yamabe, dr, eta, pts);
  CHECK(ry.verdict == Verdict::fails);
  CHECK_FALSE(ry.essential_eta);
  CHECK(ry.worst_residual <= 1e-10);
  std::uint32_t rs = tw.spec().coord_sym(1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r = pts[i].get(rs);
    CHECK(ry.coeffs[i][0] == doctest::Approx(r / 0.2).epsilon(1e-8));
    CHECK(std::abs(ry.coeffs[i][2]) <= 1e-10);
  }
}

TEST_CASE("ricci yamabe fit reports alpha1 and mu") {
  Tower tw(builtin_metric("global_monopole"));
  VectorFieldSpec dr = coordinate_field(tw.spec(), 1);
  SamplePlan plan;
  plan.count = 4;
  plan.seed = 2;
  std::vector<Binding> pts = sample_points(tw.spec(), plan);
  SolitonFit ry = soliton_fit(tw, SolitonKind::ricci_yamabe, dr, {}, pts,
                              Tolerances{}, 2.0);
  REQUIRE(ry.names.size() == 2);
  CHECK(ry.names[0] == "alpha1");
  CHECK(ry.alpha2 == doctest::Approx(2.0));
  // exact solution: (1/2) L g = -(r/k) S + 0 g, so alpha1 = r/k and
  // mu = alpha2 kappa / 2 with kappa = -2k/r^2
  std::uint32_t rs = tw.spec().coord_sym(1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r = pts[i].get(rs);
    CHECK(ry.residuals[i] <= 1e-10);
    CHECK(ry.coeffs[i][0] == doctest::Approx(r / 0.2).epsilon(1e-8));
    CHECK(ry.coeffs[i][1] ==
          doctest::Approx(-0.2 / (r * r) * 2.0).epsilon(1e-8));
  }
}

TEST_CASE("energy momentum tensor components and guards") {
  Tower tw(builtin_metric("hayward"));
  EMTensor em = energy_momentum(tw);
  Binding b = pstar(tw.spec());
  TowerAt at(tw, b);
  TensorN Tn = at.eval(em.tensor);
  CHECK(Tn(0, 0) == doctest::Approx(-0.003).epsilon(1e-10));
  // symmetric, diagonal in this chart
  CHECK(std::abs(Tn(0, 1)) <= 1e-15);

  EMTensor em2 = energy_momentum(tw, 2.0, 8.0);
  TensorN Tn2 = at.eval(em2.tensor);
  CHECK(Tn2(0, 0) == doctest::Approx(-0.003 + 0.25 * -0.2).epsilon(1e-10));

  CHECK_THROWS_AS(energy_momentum(tw, 0.0, 0.0), std::invalid_argument);

  Tower mink(builtin_metric("minkowski_spherical"));
  EMTensor flat = energy_momentum(mink, 4.0, 8.0);
  Binding mb = mink.spec().binding_at({0.0, 2.0, kPi / 2, 0.0});
  TowerAt mat(mink, mb);
  TensorN Fn = mat.eval(flat.tensor);
  CHECK(Fn(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(Fn(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("energy momentum pseudosymmetry suite on hayward") {
  Tower tw(builtin_metric("hayward"));
  std::vector<Binding> pts = {pstar(tw.spec()),
                              tw.spec().binding_at({0.1, 1.8, 1.2, 0.4})};
  EMSuite suite = em_pseudosymmetry_suite(tw, pts);
  CHECK(suite.verdict == Verdict::holds);
  CHECK(suite.worst_residual <= 1e-9);
  // R . T^EM = L Q(g, T^EM) with L = -m B2 / B1^2 at the reference point
  CHECK(suite.dot_fits[0].coeffs[0] == doctest::Approx(0.04).epsilon(1e-8));
  for (double r : suite.compat_residual) CHECK(r <= 1e-9);

  // the suite does not depend on Lambda: Q(g, g) = 0 and X . g = 0
  EMSuite shifted = em_pseudosymmetry_suite(tw, pts, 3.0, 8.0);
  for (int i = 0; i < 4; ++i)
    CHECK(shifted.dot_fits[i].coeffs[0] ==
          doctest::Approx(suite.dot_fits[i].coeffs[0]).epsilon(1e-10));
}
