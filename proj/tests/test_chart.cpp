#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "curvlab/chart.hpp"

using namespace curvlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

double g_at(const MetricSpec& spec, const Binding& b, int i, int j) {
  EvalContext ctx(*spec.pool, b);
  return ctx(spec.g[i][j]);
}

}  // namespace

TEST_CASE("hayward catalog entry evaluates at the reference point") {
  MetricSpec spec = builtin_metric("hayward");
  Binding b = spec.binding_at({0.0, 2.0, kPi / 2, 0.0});
  // B = 2 b^2 m + r^2 (r - 2 m) = 2, B1 = 2 b^2 m + r^3 = 10 at r=2,m=b=1.
  CHECK(g_at(spec, b, 0, 0) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(g_at(spec, b, 1, 1) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(g_at(spec, b, 2, 2) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(g_at(spec, b, 3, 3) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(g_at(spec, b, 0, 1) == 0.0);
  CHECK(signature_matches(spec, b));
}

TEST_CASE("parameter overrides are applied and validated") {
  MetricSpec spec = builtin_metric("hayward", {{"m", 2.0}, {"b", 0.5}});
  CHECK(spec.param_values.at("m") == 2.0);
  CHECK(spec.param_values.at("b") == 0.5);
  Binding b = spec.binding_at({0.0, 3.0, 1.0, 0.0});
  // g_tt = -(1 - 2 m r^2 / (r^3 + 2 m b^2)) with m=2, b=1/2, r=3.
  double expect = -(1.0 - 2.0 * 2.0 * 9.0 / (27.0 + 1.0));
  CHECK(g_at(spec, b, 0, 0) == doctest::Approx(expect).epsilon(1e-14));

  CHECK_THROWS_AS(builtin_metric("hayward", {{"m", 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(builtin_metric("hayward", {{"b", -0.1}}), std::invalid_argument);
  CHECK_NOTHROW(builtin_metric("hayward", {{"b", 0.0}}));  // closed bound
  CHECK_THROWS_AS(builtin_metric("hayward", {{"zz", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(builtin_metric("global_monopole", {{"k", 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(builtin_metric("no_such_metric"), std::invalid_argument);
}

TEST_CASE("all catalog metrics sample cleanly with matching signature") {
  for (const std::string name :
       {"hayward", "schwarzschild", "reissner_nordstrom", "global_monopole",
        "minkowski_spherical"}) {
    MetricSpec spec = builtin_metric(name);
    SamplePlan plan;
    plan.count = 10;
    auto pts = sample_points(spec, plan);
    REQUIRE(pts.size() == 10);
    for (const auto& b : pts) {
      CHECK(signature_matches(spec, b));
      EvalContext ctx(*spec.pool, b);
      for (const auto& gd : spec.guards)
        CHECK(std::abs(ctx(gd.expr)) > gd.min_abs);
    }
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  MetricSpec spec = builtin_metric("hayward");
  SamplePlan plan;
  plan.seed = 123;
  plan.count = 5;
  auto p1 = sample_points(spec, plan);
  auto p2 = sample_points(spec, plan);
  for (int k = 0; k < 5; ++k)
    for (int i = 0; i < 4; ++i)
      CHECK(p1[k].get(spec.coord_sym(i)) == p2[k].get(spec.coord_sym(i)));
  plan.seed = 124;
  auto p3 = sample_points(spec, plan);
  bool any_diff = false;
  for (int k = 0; k < 5; ++k)
    for (int i = 0; i < 4; ++i)
      any_diff = any_diff ||
                 p1[k].get(spec.coord_sym(i)) != p3[k].get(spec.coord_sym(i));
  CHECK(any_diff);
}

TEST_CASE("custom ranges override defaults; infeasible ranges throw") {
  MetricSpec spec = builtin_metric("schwarzschild");
  SamplePlan plan;
  plan.count = 8;
  plan.ranges = {{"t", {0.0, 1.0}},
                 {"r", {5.0, 6.0}},
                 {"theta", {1.0, 1.5}},
                 {"phi", {0.0, 1.0}}};
  for (const auto& b : sample_points(spec, plan)) {
    double r = b.get(spec.coord_sym(1));
    CHECK(r >= 5.0);
    CHECK(r <= 6.0);
  }
  plan.ranges["r"] = {6.0, 5.0};
  CHECK_THROWS_AS(sample_points(spec, plan), sampling_error);
  // Range fully inside the guarded horizon region: every draw is rejected.
  plan.ranges["r"] = {1.999, 2.001};
  CHECK_THROWS_AS(sample_points(spec, plan), sampling_error);
}

TEST_CASE("metric spec files load with params, guards, and ranges") {
  const std::string text = R"json({
    "name": "de_sitter",
    "coords": ["t", "r", "theta", "phi"],
    "signature": [-1, 1, 1, 1],
    "params": [{"name": "L2", "default": 10.0, "lower": 0.0}],
    "g": {"1,1": "-(1 - r^2/L2)", "2,2": "1/(1 - r^2/L2)",
          "3,3": "r^2", "4,4": "r^2*sin(theta)^2"},
    "guards": [{"expr": "1 - r^2/L2", "min_abs": 0.05},
               {"expr": "sin(theta)", "min_abs": 0.1}],
    "ranges": {"t": [0,1], "r": [0.5,2.0], "theta": [0.3,2.8], "phi": [0,6.2]}
  })json";
  MetricSpec spec = load_metric_text(text);
  CHECK(spec.name == "de_sitter");
  CHECK(spec.chart.n == 4);
  CHECK(spec.param_values.at("L2") == 10.0);
  Binding b = spec.binding_at({0.0, 1.0, kPi / 2, 0.0});
  CHECK(g_at(spec, b, 0, 0) == doctest::Approx(-0.9).epsilon(1e-14));
  CHECK(g_at(spec, b, 1, 1) == doctest::Approx(1.0 / 0.9).epsilon(1e-14));
  auto pts = sample_points(spec, {.seed = 42, .count = 6, .ranges = {}});
  CHECK(pts.size() == 6);
  for (const auto& p : pts) CHECK(signature_matches(spec, p));
}

TEST_CASE("metric spec files reject malformed input") {
  auto expect_throw = [](const std::string& text) {
    CHECK_THROWS_AS(load_metric_text(text), std::invalid_argument);
  };
  // dimension < 3
  expect_throw(R"({"name":"x","coords":["u","v"],"signature":[-1,1],
                   "g":{"1,1":"-1","2,2":"1"}})");
  // signature length mismatch
  expect_throw(R"({"name":"x","coords":["t","r","theta","phi"],
                   "signature":[-1,1,1],"g":{"1,1":"-1"}})");
  // signature entries not +-1
  expect_throw(R"({"name":"x","coords":["t","r","theta"],
                   "signature":[-1,1,2],"g":{"1,1":"-1"}})");
  // bad component key
  expect_throw(R"({"name":"x","coords":["t","r","theta"],
                   "signature":[-1,1,1],"g":{"0,1":"-1"}})");
  // asymmetric duplicate entry
  expect_throw(R"({"name":"x","coords":["t","r","theta"],
                   "signature":[-1,1,1],
                   "g":{"1,2":"r","2,1":"2*r"}})");
}

TEST_CASE("symmetric duplicate entries are accepted when identical") {
  const std::string text = R"json({
    "name": "x", "coords": ["t", "r", "theta"], "signature": [-1, 1, 1],
    "g": {"1,1": "-1", "2,2": "1", "3,3": "r^2", "1,2": "r", "2,1": "r"}
  })json";
  MetricSpec spec = load_metric_text(text);
  Binding b = spec.binding_at({0.0, 2.0, 1.0});
  CHECK(g_at(spec, b, 0, 1) == doctest::Approx(2.0));
  CHECK(g_at(spec, b, 1, 0) == doctest::Approx(2.0));
}

TEST_CASE("distinct sampled points are actually distinct") {
  MetricSpec spec = builtin_metric("hayward");
  SamplePlan plan;
  plan.count = 25;
  auto pts = sample_points(spec, plan);
  std::set<std::vector<double>> seen;
  for (const auto& b : pts) {
    std::vector<double> cv;
    for (int i = 0; i < 4; ++i) cv.push_back(b.get(spec.coord_sym(i)));
    seen.insert(cv);
  }
  CHECK(seen.size() == 25);
}
