#pragma once
// Coordinate charts, metric specifications, the built-in metric catalog, and
// deterministic point sampling with regularity guards.
//
// Metric spec file schema (JSON):
//   {
//     "name":      "de_sitter",
//     "coords":    ["t", "r", "theta", "phi"],
//     "signature": [-1, 1, 1, 1],
//     "params":    [{"name": "L2", "default": 10.0, "lower": 0.0}],
//     "g":         {"1,1": "-(1 - r^2/L2)", "2,2": "1/(1 - r^2/L2)",
//                   "3,3": "r^2", "4,4": "r^2*sin(theta)^2"},
//     "guards":    [{"expr": "1 - r^2/L2", "min_abs": 0.05}],
//     "ranges":    {"t": [0,1], "r": [0.5,2.0], "theta": [0.3,2.8],
//                   "phi": [0,6.2]}
//   }
// Component keys are 1-based "i,j".  Only i <= j needs to be given; a "j,i"
// key is accepted only if it parses to the identical expression.  Expressions
// follow the grammar documented in expr.hpp.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/expr.hpp"

namespace curvlab {

class sampling_error : public std::runtime_error {
public:
  explicit sampling_error(const std::string& what)
      : std::runtime_error(what) {}
};

struct Chart {
  int n = 4;
  std::vector<std::string> coords;   // ordered, e.g. t, r, theta, phi
  std::vector<int> signature;       // entries are -1 or +1
};

struct ParamDecl {
  std::string name;
  double def = 0.0;
  std::optional<double> lower;       // open bound unless *_closed
  std::optional<double> upper;
  bool lower_closed = false;
  bool upper_closed = false;
};

struct GuardSpec {
  Expr expr;
  double min_abs = 1e-6;             // point accepted iff |expr| > min_abs
  std::string text;                  // source string, for diagnostics
};

struct MetricSpec {
  std::string name;
  Chart chart;
  std::shared_ptr<ExprPool> pool;
  std::vector<std::vector<Expr>> g;  // n x n, symmetric
  std::vector<ParamDecl> params;
  std::map<std::string, double> param_values;
  std::vector<GuardSpec> guards;
  std::map<std::string, std::pair<double, double>> default_ranges;

  std::uint32_t coord_sym(int i) const;  // symbol index of coords[i]

  // Binding with all parameters set plus the given coordinate values
  // (chart order).
  Binding binding_at(const std::vector<double>& coord_values) const;
};

struct SamplePlan {
  std::uint64_t seed = 42;
  int count = 25;
  // Empty = use the metric's default ranges.
  std::map<std::string, std::pair<double, double>> ranges;
};

// name in {hayward, schwarzschild, reissner_nordstrom, global_monopole,
// minkowski_spherical}; overrides replace parameter defaults and are
// validated against the declared constraints.
MetricSpec builtin_metric(const std::string& name,
                          const std::map<std::string, double>& overrides = {});

MetricSpec load_metric(const std::string& path);
MetricSpec load_metric_text(const std::string& json_text);

// Replace parameter defaults with the given values, validating the declared
// bounds.  Unknown names are rejected.
void apply_params(MetricSpec& spec,
                  const std::map<std::string, double>& overrides);

// Deterministic given (spec, plan).  Every returned point satisfies all
// guards.  Throws sampling_error on an empty or infeasible region.
std::vector<Binding> sample_points(const MetricSpec& spec,
                                   const SamplePlan& plan);

// True iff the sign pattern of the evaluated metric's eigenvalues matches the
// chart signature.
bool signature_matches(const MetricSpec& spec, const Binding& at);

}  // namespace curvlab
