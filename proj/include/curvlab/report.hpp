#pragma once
// Report assembly and rendering.  classification_report (declared in
// classify.hpp) runs the whole detector battery over sampled points; the
// renderers here serialize the result deterministically, so two identical
// reports always produce byte-identical output.

#include <string>
#include <vector>

#include "curvlab/classify.hpp"

namespace curvlab {

std::string report_json(const ClassificationReport& rep);
std::string report_markdown(const ClassificationReport& rep);

// Side-by-side property tables.  Rows are matched by property name in the
// first report's order; names that only appear later are appended in
// encounter order.
std::string comparison_json(const std::vector<ClassificationReport>& reps);
std::string comparison_markdown(const std::vector<ClassificationReport>& reps);

}  // namespace curvlab
