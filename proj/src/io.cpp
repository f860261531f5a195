#include "gip/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gip {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedInput, what); }

UnitVector vector_from(const Json& j) {
  if (!j.is_array()) malformed("direction must be an array of numbers");
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) malformed("direction must be an array of numbers");
    c.push_back(v.get<double>());
  }
  try {
    return UnitVector(std::move(c));
  } catch (const Error& e) {
    malformed(e.what());
  }
}

Json vector_to(const UnitVector& u) { return Json(std::vector<double>(u.coords().begin(), u.coords().end())); }

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json node_to_json(const PartitionNode& node) {
  Json j{{"dim", node.dim}, {"cells", node.cell_count}};
  if (node.dim == 1) {
    j["arc_count"] = node.arc_count;
    j["arc_offset"] = node.arc_offset;
    return j;
  }
  j["band_width"] = node.band_width;
  std::vector<double> radii;
  for (std::size_t b = 0; b <= node.band_count; ++b) radii.push_back(static_cast<double>(b) * node.band_width);
  j["band_radii"] = radii;
  j["bands"] = Json::array();
  for (const auto& child : node.bands) j["bands"].push_back(node_to_json(child));
  return j;
}

}  // namespace

MeasureSpec measure_from_json(const Json& j, std::size_t ambient_hint) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) malformed("measure needs a \"type\"");
  const std::string type = j["type"];
  try {
    if (type == "atomic") {
      if (!j.contains("atoms") || !j.contains("weights") || !j["atoms"].is_array() || !j["weights"].is_array() ||
          j["atoms"].size() != j["weights"].size()) {
        malformed("atomic measure needs equally long \"atoms\" and \"weights\"");
      }
      std::vector<UnitVector> atoms;
      for (const auto& a : j["atoms"]) atoms.push_back(vector_from(a));
      const bool exact = std::all_of(j["weights"].begin(), j["weights"].end(), [](const Json& w) { return w.is_string(); });
      if (exact) {
        std::vector<Fraction> w;
        for (const auto& s : j["weights"]) w.push_back(parse_fraction(s.get<std::string>()));
        return AtomicMeasure(std::move(atoms), std::move(w));
      }
      std::vector<double> w;
      for (const auto& s : j["weights"]) {
        if (s.is_number()) {
          w.push_back(s.get<double>());
        } else if (s.is_string()) {
          w.push_back(to_double(parse_fraction(s.get<std::string>())));
        } else {
          malformed("weights must be numbers or fraction strings");
        }
      }
      return AtomicMeasure(std::move(atoms), std::move(w));
    }
    if (type == "density") {
      const std::string family = j.value("family", std::string("uniform"));
      if (family == "uniform") {
        if (j.contains("dim")) return DensityMeasure::uniform(j["dim"].get<std::size_t>() + 1);
        if (ambient_hint == 0) malformed("uniform density needs \"dim\" (sphere dimension m)");
        return DensityMeasure::uniform(ambient_hint);
      }
      if (family == "cap") {
        if (!j.contains("cap_center") || !j.contains("cap_radius")) malformed("cap density needs center and radius");
        return DensityMeasure::caps({Cap{vector_from(j["cap_center"]), j["cap_radius"].get<double>()}});
      }
      if (family == "caps") {
        if (!j.contains("caps") || !j["caps"].is_array()) malformed("caps density needs a \"caps\" list");
        std::vector<Cap> caps;
        for (const auto& c : j["caps"]) caps.push_back(Cap{vector_from(c.at("center")), c.at("radius").get<double>()});
        return DensityMeasure::caps(std::move(caps));
      }
      malformed("unknown density family " + family);
    }
  } catch (const Json::exception& e) {
    malformed(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedInput) throw;
    malformed(e.what());
  }
  malformed("unknown measure type " + type);
}

MeasureSpec load_measure(const std::string& path, std::size_t ambient_hint) {
  return measure_from_json(read_json(path), ambient_hint);
}

Json measure_to_json(const AtomicMeasure& mu) {
  Json j{{"type", "atomic"}, {"atoms", Json::array()}, {"weights", Json::array()}};
  for (std::size_t k = 0; k < mu.size(); ++k) {
    j["atoms"].push_back(vector_to(mu.atom(k)));
    if (mu.is_rational()) {
      j["weights"].push_back(to_string(mu.exact_weights()[k]));
    } else {
      j["weights"].push_back(mu.weight(k));
    }
  }
  return j;
}

Json measure_to_json(const DensityMeasure& lambda) {
  Json j{{"type", "density"}, {"normalized", true}};
  switch (lambda.family()) {
    case DensityFamily::Uniform:
      j["family"] = "uniform";
      j["dim"] = lambda.dim();
      break;
    case DensityFamily::Caps:
      j["family"] = "caps";
      j["caps"] = Json::array();
      for (const auto& c : lambda.cap_list()) j["caps"].push_back({{"center", vector_to(c.center)}, {"radius", c.radius}});
      break;
    default:
      j["family"] = to_string(lambda.family());
      j["dim"] = lambda.dim();
      break;
  }
  return j;
}

Json plan_to_json(const TransportPlan& plan) {
  Json j{{"denominator", plan.denominator}, {"rounding_perturbation", plan.rounding_perturbation},
         {"entries", Json::array()}};
  for (const auto& e : plan.entries) j["entries"].push_back({e.i, e.j, to_string(plan.exact_mass(e))});
  return j;
}

Json partition_to_json(const SphericalPartition& partition) {
  Json j{{"dim", partition.dim()}, {"scale", partition.scale()}, {"tree", node_to_json(partition.root())}};
  j["rotation"] = partition.rotation();
  if (partition.has_exact_masses()) {
    j["masses"] = Json::array();
    for (const auto& f : partition.exact_masses()) j["masses"].push_back(to_string(f));
  } else if (partition.has_masses()) {
    j["masses"] = partition.masses();
  }
  return j;
}

Json body_to_json(const ConvexBodyRep& body) {
  Json j{{"directions", Json::array()}, {"radii", body.radii()}, {"psi", oliker_inverse(body)},
         {"inradius", body.inradius()}, {"circumradius", body.circumradius()}, {"extreme", body.hull().extreme}};
  for (const auto& d : body.directions()) j["directions"].push_back(vector_to(d));
  return j;
}

ConvexBodyRep body_from_json(const Json& j) {
  try {
    std::vector<UnitVector> dirs;
    for (const auto& d : j.at("directions")) dirs.push_back(vector_from(d));
    return ConvexBodyRep(std::move(dirs), j.at("radii").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    malformed(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedInput) throw;
    malformed(e.what());
  }
}

ConvexBodyRep load_body(const std::string& path) { return body_from_json(read_json(path)); }

Json potential_dump(const Solution& solution) {
  Json j{{"atoms", Json::array()}, {"connectors", Json::array()}, {"gluing", solution.report.gluing}};
  for (std::size_t k = 0; k < solution.mu_d.size(); ++k) {
    j["atoms"].push_back({{"direction", vector_to(solution.mu_d.atom(k))},
                          {"psi", finite_or_null(solution.psi_d[k])},
                          {"phi_c", k < solution.phi_c_d.size() ? finite_or_null(solution.phi_c_d[k]) : Json(nullptr)}});
  }
  for (const auto& row : solution.report.connectors) {
    Json r = Json::array();
    for (double v : row) r.push_back(finite_or_null(v));
    j["connectors"].push_back(r);
  }
  return j;
}

Json report_to_json(const SolveReport& r, bool include_timings) {
  Json j;
  j["status"] = to_string(r.status);
  j["alpha"] = r.alpha;
  j["cells"] = r.cells;
  j["source_atoms"] = r.source_atoms;
  j["target_atoms"] = r.target_atoms;
  j["denominator"] = r.denominator;
  j["conditions"] = {{"weak_aleksandrov", r.weak_aleksandrov}, {"certifying", r.weak_aleksandrov_certifying}};
  j["transport"] = {{"primal_cost", r.primal_cost},
                    {"dual_value", r.dual_value},
                    {"duality_gap", r.duality_gap},
                    {"pivots", r.simplex.pivots},
                    {"degenerate_pivots", r.simplex.degenerate_pivots}};
  Json connectors = Json::array();
  for (const auto& row : r.connectors) {
    Json line = Json::array();
    for (double v : row) line.push_back(finite_or_null(v));
    connectors.push_back(line);
  }
  j["potential"] = {{"support_size", r.support_size},
                    {"components", r.components},
                    {"every_vertex_on_cycle", r.every_vertex_on_cycle},
                    {"hop_bound", r.hop_bound},
                    {"max_hops", r.max_hops},
                    {"connectors", connectors},
                    {"gluing", r.gluing},
                    {"psi_bound", finite_or_null(r.psi_bound)},
                    {"psi_max", finite_or_null(r.psi_max)},
                    {"worst_constraint", finite_or_null(r.worst_constraint)},
                    {"worst_gamma_gap", finite_or_null(r.worst_gamma_gap)},
                    {"worst_cc_error", finite_or_null(r.subdifferential.worst_cc_error)}};
  j["monotonicity"] = {{"monotone", r.monotonicity.monotone},
                       {"worst_slack", finite_or_null(r.monotonicity.worst_slack)},
                       {"exhaustive", r.monotonicity.exhaustive},
                       {"cycle", r.monotonicity.cycle}};
  j["polish"] = {{"applicable", r.polish.applicable},
                 {"converged", r.polish.converged},
                 {"iterations", r.polish.iterations},
                 {"residual", r.polish.residual}};
  j["body"] = {{"inradius", r.inradius},
               {"circumradius", r.circumradius},
               {"epsilon_prime", r.angle.epsilon_prime},
               {"min_inner", r.angle.min_inner},
               {"swallowed", r.swallowed},
               {"normal_cone_masses", r.pushforward.weights},
               {"mass_std_errors", r.pushforward.std_errors},
               {"pushforward_errors", r.pushforward_error},
               {"exact_masses", r.pushforward.exact}};
  j["checks"] = Json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", finite_or_null(c.value)},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  }
  if (include_timings) j["timings_ms"] = r.timings;
  return j;
}

Json polyline_json(const ConvexBodyRep& body) {
  Json j{{"closed", true}, {"vertices", Json::array()}, {"indices", body.hull().extreme}};
  for (std::size_t v : body.hull().extreme) j["vertices"].push_back(body.point(v));
  return j;
}

std::string obj_text(const ConvexBodyRep& body) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < body.size(); ++k) {
    const auto p = body.point(k);
    out << "v";
    for (double c : p) out << ' ' << c;
    out << '\n';
  }
  for (const auto& f : body.hull().facets) {
    // Order the facet's points counterclockwise around its normal.
    std::vector<double> centre(3, 0.0);
    for (std::size_t v : f.vertices) {
      const auto p = body.point(v);
      for (int c = 0; c < 3; ++c) centre[c] += p[c] / static_cast<double>(f.vertices.size());
    }
    const auto [e1, e2] = tangent_frame(UnitVector(f.normal));
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t v : f.vertices) {
      auto p = body.point(v);
      for (int c = 0; c < 3; ++c) p[c] -= centre[c];
      keyed.emplace_back(std::atan2(dot(p, e2.coords()), dot(p, e1.coords())), v);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t s = 1; s + 1 < keyed.size(); ++s) {
      out << "f " << keyed[0].second + 1 << ' ' << keyed[s].second + 1 << ' ' << keyed[s + 1].second + 1 << '\n';
    }
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    malformed(path + ": " + e.what());
  }
}

}  // namespace gip
