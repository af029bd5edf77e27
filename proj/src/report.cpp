#include "cgra/report.hpp"

#include <cstdio>
#include <sstream>

namespace cgra {

using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ordered_json outcome_to_json(const Dfg& dfg, const Mrrg& mrrg, const MapOutcome& outcome, bool timings) {
  ordered_json j;
  j["status"] = std::string(map_status_name(outcome.status));
  j["ii"] = outcome.ii;
  if (!outcome.message.empty()) j["message"] = outcome.message;
  if (outcome.solution) {
    const auto& sol = *outcome.solution;
    j["nn"] = sol.nn;
    ordered_json placement = ordered_json::object();
    for (int o = 0; o < dfg.size(); ++o)
      placement[dfg.ops()[o].id] = sol.placement[o] >= 0 ? ordered_json(mrrg.key(sol.placement[o])) : ordered_json();
    j["placement"] = placement;
    ordered_json routes = ordered_json::array();
    for (const auto& rc : sol.routes) {
      ordered_json r;
      r["driver"] = dfg.ops()[rc.driver_op].id;
      r["sink"] = dfg.ops()[rc.sink_op].id;
      ordered_json path = ordered_json::array();
      for (int v : rc.path.vertices) path.push_back(mrrg.key(v));
      r["path"] = path;
      routes.push_back(r);
    }
    j["routing"] = routes;
    ordered_json st;
    st["placements_tried"] = sol.stats.placements_tried;
    st["routing_calls"] = sol.stats.routing_calls;
    st["placement_screens"] = sol.stats.placement_screens;
    if (timings) {
      st["neighbor_seconds"] = sol.stats.neighbor_seconds;
      st["path_seconds"] = sol.stats.path_seconds;
      st["placement_seconds"] = sol.stats.placement_seconds;
      st["routing_seconds"] = sol.stats.routing_seconds;
      st["total_seconds"] = sol.stats.total_seconds;
    }
    j["stats"] = st;
  }
  ordered_json log = ordered_json::array();
  for (const auto& a : outcome.log) {
    ordered_json e;
    e["nn"] = a.nn;
    e["neighbor_total"] = a.neighbor_total;
    e["placement_only"] = a.placement_only;
    e["placement_only_size"] = {{"variables", a.placement_only_vars}, {"constraints", a.placement_only_rows}};
    if (a.relaxed_vars || a.relaxed_rows)
      e["relaxed_placement_size"] = {{"variables", a.relaxed_vars}, {"constraints", a.relaxed_rows}};
    e["placements_tried"] = a.placements_tried;
    e["routing_calls"] = a.routing_calls;
    e["placements_exhausted"] = a.placements_exhausted;
    e["timed_out"] = a.timed_out;
    e["mapped"] = a.mapped;
    if (timings) e["seconds"] = a.seconds;
    log.push_back(e);
  }
  j["log"] = log;
  return j;
}

std::string outcome_to_text(const Dfg& dfg, const Mrrg& mrrg, const MapOutcome& outcome) {
  std::ostringstream os;
  os << "status: " << map_status_name(outcome.status) << "\n";
  os << "ii: " << outcome.ii << "\n";
  if (!outcome.message.empty()) os << "message: " << outcome.message << "\n";
  for (const auto& a : outcome.log)
    os << "nn " << a.nn << ": placement_only " << a.placement_only << ", placements " << a.placements_tried
       << ", routing calls " << a.routing_calls << (a.mapped ? ", mapped" : "") << (a.timed_out ? ", timed out" : "")
       << "\n";
  if (outcome.solution) {
    const auto& sol = *outcome.solution;
    os << "nn: " << sol.nn << "\nplacement:\n";
    for (int o = 0; o < dfg.size(); ++o)
      os << "  " << dfg.ops()[o].id << " -> " << (sol.placement[o] >= 0 ? mrrg.key(sol.placement[o]) : "-") << "\n";
    os << "routing:\n";
    for (const auto& rc : sol.routes) {
      os << "  " << dfg.ops()[rc.driver_op].id << " -> " << dfg.ops()[rc.sink_op].id << ":";
      for (int v : rc.path.vertices) os << " " << mrrg.key(v);
      os << "\n";
    }
  }
  return os.str();
}

ordered_json model_stats_json(const ModelStats& s) {
  ordered_json j;
  j["variant"] = s.variant;
  j["constraints"] = s.constraints;
  j["variables"] = s.variables;
  j["variables_by_class"] = s.by_class;
  j["constraints_by_family"] = s.by_tag;
  return j;
}

std::string characterization_csv(const Characterization& ch) {
  std::ostringstream os;
  os << "nn,mapped,total,fraction\n";
  for (const auto& r : ch.rows) os << r.nn << ',' << r.mapped << ',' << r.total << ',' << fixed(r.fraction, 6) << '\n';
  return os.str();
}

std::string characterization_cells_csv(const Characterization& ch) {
  std::ostringstream os;
  os << "benchmark,ii,first_nn,timed_out\n";
  for (const auto& c : ch.cells)
    os << c.benchmark << ',' << c.ii << ',' << (c.first_nn ? std::to_string(*c.first_nn) : "") << ','
       << (c.timed_out ? 1 : 0) << '\n';
  return os.str();
}

ordered_json characterization_json(const Characterization& ch) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const auto& r : ch.rows)
    rows.push_back({{"nn", r.nn}, {"mapped", r.mapped}, {"total", r.total}, {"fraction", r.fraction}});
  j["curve"] = rows;
  ordered_json cells = ordered_json::array();
  for (const auto& c : ch.cells)
    cells.push_back({{"benchmark", c.benchmark},
                     {"ii", c.ii},
                     {"first_nn", c.first_nn ? ordered_json(*c.first_nn) : ordered_json()},
                     {"timed_out", c.timed_out}});
  j["cells"] = cells;
  j["suggested_schedule"] = ch.suggested ? ordered_json(ch.suggested->values) : ordered_json();
  return j;
}

}  // namespace cgra
