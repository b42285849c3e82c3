#include "curvlab/chart.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace curvlab {

std::uint32_t MetricSpec::coord_sym(int i) const {
  return *pool->find_symbol(chart.coords.at(i));
}

Binding MetricSpec::binding_at(const std::vector<double>& coord_values) const {
  if (static_cast<int>(coord_values.size()) != chart.n)
    throw std::invalid_argument("binding_at: wrong number of coordinates");
  Binding b = pool->make_binding();
  for (int i = 0; i < chart.n; ++i) b.set(coord_sym(i), coord_values[i]);
  for (const auto& [k, v] : param_values) b.set(*pool->find_symbol(k), v);
  return b;
}

void apply_params(MetricSpec& spec,
                  const std::map<std::string, double>& overrides) {
  for (const auto& [k, v] : overrides) {
    bool known = false;
    for (const auto& p : spec.params) known = known || p.name == k;
    if (!known)
      throw std::invalid_argument("unknown parameter '" + k + "' for metric " +
                                  spec.name);
  }
  for (const auto& p : spec.params) {
    double v = p.def;
    if (auto it = overrides.find(p.name); it != overrides.end()) v = it->second;
    if (p.lower && (p.lower_closed ? v < *p.lower : v <= *p.lower))
      throw std::invalid_argument("parameter " + p.name + "=" +
                                  std::to_string(v) + " violates lower bound");
    if (p.upper && (p.upper_closed ? v > *p.upper : v >= *p.upper))
      throw std::invalid_argument("parameter " + p.name + "=" +
                                  std::to_string(v) + " violates upper bound");
    spec.param_values[p.name] = v;
  }
}

namespace {

MetricSpec make_spherical_shell(const std::string& name) {
  MetricSpec spec;
  spec.name = name;
  spec.chart.n = 4;
  spec.chart.coords = {"t", "r", "theta", "phi"};
  spec.chart.signature = {-1, 1, 1, 1};
  spec.pool = std::make_shared<ExprPool>();
  for (const auto& c : spec.chart.coords) spec.pool->symbol(c);
  spec.g.assign(4, std::vector<Expr>(4, spec.pool->zero()));
  return spec;
}

void add_guard(MetricSpec& spec, const std::string& text, double min_abs) {
  spec.guards.push_back({spec.pool->parse(text), min_abs, text});
}

void set_diag(MetricSpec& spec, const std::vector<std::string>& diag) {
  for (int i = 0; i < 4; ++i) spec.g[i][i] = spec.pool->parse(diag[i]);
}

}  // namespace

MetricSpec builtin_metric(const std::string& name,
                          const std::map<std::string, double>& overrides) {
  MetricSpec spec;
  if (name == "hayward") {
    spec = make_spherical_shell(name);
    spec.pool->symbol("m");
    spec.pool->symbol("b");
    spec.params = {{"m", 1.0, 0.0, std::nullopt, false, false},
                   {"b", 1.0, 0.0, std::nullopt, true, false}};
    set_diag(spec, {"-(1 - 2*m*r^2/(r^3 + 2*m*b^2))",
                    "1/(1 - 2*m*r^2/(r^3 + 2*m*b^2))", "r^2",
                    "r^2*sin(theta)^2"});
    add_guard(spec, "r", 1e-6);
    add_guard(spec, "sin(theta)", 0.1);
    add_guard(spec, "2*b^2*m + r^2*(r - 2*m)", 1e-6);   // B
    add_guard(spec, "2*b^2*m + r^3", 1e-6);             // B1
    add_guard(spec, "4*b^2*m - r^3", 0.05);             // B2
    add_guard(spec, "10*b^2*m - r^3", 0.05);            // B4
    add_guard(spec, "16*b^2*m - r^3", 0.05);
    add_guard(spec, "cos(theta)", 0.05);
    spec.default_ranges = {{"t", {0.0, 1.0}},
                           {"r", {1.3, 2.3}},
                           {"theta", {0.3, 2.8}},
                           {"phi", {0.0, 6.2}}};
  } else if (name == "schwarzschild") {
    spec = make_spherical_shell(name);
    spec.pool->symbol("m");
    spec.params = {{"m", 1.0, 0.0, std::nullopt, false, false}};
    set_diag(spec, {"-(1 - 2*m/r)", "1/(1 - 2*m/r)", "r^2",
                    "r^2*sin(theta)^2"});
    add_guard(spec, "r", 1e-6);
    add_guard(spec, "sin(theta)", 0.1);
    add_guard(spec, "1 - 2*m/r", 0.05);
    spec.default_ranges = {{"t", {0.0, 1.0}},
                           {"r", {2.5, 4.0}},
                           {"theta", {0.3, 2.8}},
                           {"phi", {0.0, 6.2}}};
  } else if (name == "reissner_nordstrom") {
    spec = make_spherical_shell(name);
    spec.pool->symbol("m");
    spec.pool->symbol("q");
    spec.params = {{"m", 1.0, 0.0, std::nullopt, false, false},
                   {"q", 0.5, std::nullopt, std::nullopt, false, false}};
    set_diag(spec, {"-(1 - 2*m/r + q^2/r^2)", "1/(1 - 2*m/r + q^2/r^2)",
                    "r^2", "r^2*sin(theta)^2"});
    add_guard(spec, "r", 1e-6);
    add_guard(spec, "sin(theta)", 0.1);
    add_guard(spec, "1 - 2*m/r + q^2/r^2", 0.05);
    add_guard(spec, "cos(theta)", 0.05);
    spec.default_ranges = {{"t", {0.0, 1.0}},
                           {"r", {2.2, 3.5}},
                           {"theta", {0.3, 2.8}},
                           {"phi", {0.0, 6.2}}};
  } else if (name == "global_monopole") {
    spec = make_spherical_shell(name);
    spec.pool->symbol("k");
    spec.params = {{"k", 0.2, 0.0, 1.0, false, false}};
    set_diag(spec, {"-(1 - k)", "1/(1 - k)", "r^2", "r^2*sin(theta)^2"});
    add_guard(spec, "r", 1e-6);
    add_guard(spec, "sin(theta)", 0.1);
    add_guard(spec, "cos(theta)", 0.05);
    spec.default_ranges = {{"t", {0.0, 1.0}},
                           {"r", {1.0, 3.0}},
                           {"theta", {0.3, 2.8}},
                           {"phi", {0.0, 6.2}}};
  } else if (name == "minkowski_spherical") {
    spec = make_spherical_shell(name);
    set_diag(spec, {"-1", "1", "r^2", "r^2*sin(theta)^2"});
    add_guard(spec, "r", 1e-6);
    add_guard(spec, "sin(theta)", 0.1);
    spec.default_ranges = {{"t", {0.0, 1.0}},
                           {"r", {0.5, 3.0}},
                           {"theta", {0.3, 2.8}},
                           {"phi", {0.0, 6.2}}};
  } else {
    throw std::invalid_argument("unknown builtin metric '" + name + "'");
  }
  apply_params(spec, overrides);
  return spec;
}

MetricSpec load_metric_text(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  MetricSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.chart.coords = j.at("coords").get<std::vector<std::string>>();
  spec.chart.n = static_cast<int>(spec.chart.coords.size());
  if (spec.chart.n < 3)
    throw std::invalid_argument("metric spec: dimension must be >= 3");
  spec.chart.signature = j.at("signature").get<std::vector<int>>();
  if (static_cast<int>(spec.chart.signature.size()) != spec.chart.n)
    throw std::invalid_argument("metric spec: signature length != dimension");
  for (int s : spec.chart.signature)
    if (s != 1 && s != -1)
      throw std::invalid_argument("metric spec: signature entries must be +-1");

  spec.pool = std::make_shared<ExprPool>();
  for (const auto& c : spec.chart.coords) spec.pool->symbol(c);
  if (j.contains("params")) {
    for (const auto& pj : j.at("params")) {
      ParamDecl p;
      p.name = pj.at("name").get<std::string>();
      p.def = pj.at("default").get<double>();
      if (pj.contains("lower")) p.lower = pj.at("lower").get<double>();
      if (pj.contains("upper")) p.upper = pj.at("upper").get<double>();
      if (pj.contains("lower_closed"))
        p.lower_closed = pj.at("lower_closed").get<bool>();
      if (pj.contains("upper_closed"))
        p.upper_closed = pj.at("upper_closed").get<bool>();
      spec.pool->symbol(p.name);
      spec.params.push_back(p);
    }
  }

  const int n = spec.chart.n;
  spec.g.assign(n, std::vector<Expr>(n, spec.pool->zero()));
  std::vector<std::vector<bool>> given(n, std::vector<bool>(n, false));
  for (const auto& [key, val] : j.at("g").items()) {
    std::istringstream ks(key);
    int i = 0, jj = 0;
    char comma = 0;
    if (!(ks >> i >> comma >> jj) || comma != ',' || i < 1 || jj < 1 ||
        i > n || jj > n)
      throw std::invalid_argument("metric spec: bad component key '" + key +
                                  "'");
    Expr e = spec.pool->parse(val.get<std::string>());
    int a = i - 1, bcol = jj - 1;
    int lo = std::min(a, bcol), hi = std::max(a, bcol);
    if (given[lo][hi] && spec.g[lo][hi] != e)
      throw std::invalid_argument(
          "metric spec: asymmetric input for components (" +
          std::to_string(lo + 1) + "," + std::to_string(hi + 1) + ")");
    spec.g[lo][hi] = e;
    spec.g[hi][lo] = e;
    given[lo][hi] = true;
  }

  if (j.contains("guards")) {
    for (const auto& gj : j.at("guards")) {
      GuardSpec gs;
      gs.text = gj.at("expr").get<std::string>();
      gs.expr = spec.pool->parse(gs.text);
      gs.min_abs = gj.value("min_abs", 1e-6);
      spec.guards.push_back(gs);
    }
  }
  if (j.contains("ranges")) {
    for (const auto& [c, range] : j.at("ranges").items()) {
      spec.default_ranges[c] = {range.at(0).get<double>(),
                                range.at(1).get<double>()};
    }
  }
  apply_params(spec, {});
  return spec;
}

MetricSpec load_metric(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open metric file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_metric_text(ss.str());
}

std::vector<Binding> sample_points(const MetricSpec& spec,
                                   const SamplePlan& plan) {
  if (plan.count == 0) return {};
  if (plan.count < 0) throw std::invalid_argument("negative sample count");

  std::vector<std::pair<double, double>> ranges;
  for (int i = 0; i < spec.chart.n; ++i) {
    const std::string& c = spec.chart.coords[i];
    std::pair<double, double> r;
    if (auto pit = plan.ranges.find(c); pit != plan.ranges.end())
      r = pit->second;
    else if (auto dit = spec.default_ranges.find(c);
             dit != spec.default_ranges.end())
      r = dit->second;
    else
      throw sampling_error("no range for coordinate " + c);
    if (!(r.first < r.second))
      throw sampling_error("empty range for coordinate " + c);
    ranges.push_back(r);
  }

  std::mt19937_64 rng(plan.seed);
  std::vector<Binding> out;
  out.reserve(plan.count);
  long long attempts = 0;
  const long long max_attempts = 200000LL + 10000LL * plan.count;
  std::vector<double> cv(spec.chart.n);
  while (static_cast<int>(out.size()) < plan.count) {
    if (++attempts > max_attempts)
      throw sampling_error("could not find " + std::to_string(plan.count) +
                           " regular points (region mostly excluded by "
                           "guards)");
    for (int i = 0; i < spec.chart.n; ++i) {
      std::uniform_real_distribution<double> dist(ranges[i].first,
                                                  ranges[i].second);
      cv[i] = dist(rng);
    }
    Binding b = spec.binding_at(cv);
    EvalContext ctx(*spec.pool, b);
    bool ok = true;
    try {
      for (const auto& gd : spec.guards)
        if (std::abs(ctx(gd.expr)) <= gd.min_abs) {
          ok = false;
          break;
        }
    } catch (const singular_evaluation&) {
      ok = false;
    }
    if (ok) out.push_back(std::move(b));
  }
  return out;
}

bool signature_matches(const MetricSpec& spec, const Binding& at) {
  const int n = spec.chart.n;
  Eigen::MatrixXd gm(n, n);
  EvalContext ctx(*spec.pool, at);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gm(i, j) = ctx(spec.g[i][j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm);
  int neg_eval = 0, neg_sig = 0;
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] < 0) ++neg_eval;
    if (spec.chart.signature[i] < 0) ++neg_sig;
  }
  return neg_eval == neg_sig;
}

}  // namespace curvlab
