#pragma once

#include <json.hpp>
#include <string>
#include <variant>

#include "gip/partition.hpp"
#include "gip/pipeline.hpp"

namespace gip {

using Json = nlohmann::json;
using MeasureSpec = std::variant<AtomicMeasure, DensityMeasure>;

/// Reads {"type":"atomic","atoms":[[...]],"weights":["1/4",...]} or
/// {"type":"density","family":"uniform"|"cap"|"caps",...}. Weights may be
/// fraction strings or numbers. A uniform density without "dim" lives in
/// `ambient_hint` coordinates. Throws MalformedInput.
MeasureSpec measure_from_json(const Json& j, std::size_t ambient_hint = 0);
MeasureSpec load_measure(const std::string& path, std::size_t ambient_hint = 0);
Json measure_to_json(const AtomicMeasure& mu);
Json measure_to_json(const DensityMeasure& lambda);

/// Sparse triplets [i, j, "p/q"].
Json plan_to_json(const TransportPlan& plan);
Json partition_to_json(const SphericalPartition& partition);

Json body_to_json(const ConvexBodyRep& body);
ConvexBodyRep body_from_json(const Json& j);
ConvexBodyRep load_body(const std::string& path);

/// Per atom of mu_d: direction, psi and phi^c; plus the connector matrix
/// with null for +infinity.
Json potential_dump(const Solution& solution);
/// Timings are left out unless requested, so reports of equal runs match.
Json report_to_json(const SolveReport& report, bool include_timings = false);

/// Closed polyline of the hull vertices (S^1).
Json polyline_json(const ConvexBodyRep& body);
/// Wavefront OBJ of the hull (S^2), facets fan-triangulated.
std::string obj_text(const ConvexBodyRep& body);

void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

}  // namespace gip
