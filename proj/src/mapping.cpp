#include "cgra/mapping.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cgra {

std::string_view violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::Shape: return "shape";
    case ViolationKind::Unplaced: return "unplaced";
    case ViolationKind::Incompatible: return "incompatible";
    case ViolationKind::Exclusivity: return "exclusivity";
    case ViolationKind::MissingRoute: return "missing_route";
    case ViolationKind::Endpoint: return "endpoint";
    case ViolationKind::MissingEdge: return "missing_edge";
    case ViolationKind::InteriorFu: return "interior_fu";
    case ViolationKind::NotSimple: return "not_simple";
    case ViolationKind::Short: return "short";
  }
  return "?";
}

std::vector<MappingViolation> validate_mapping(const Dfg& dfg, const Mrrg& mrrg, const MappingSolution& sol) {
  std::vector<MappingViolation> out;
  auto add = [&](ViolationKind k, std::string msg) { out.push_back({k, std::move(msg)}); };
  const auto& ops = dfg.ops();
  if (static_cast<int>(sol.placement.size()) != dfg.size()) {
    add(ViolationKind::Shape, "placement has " + std::to_string(sol.placement.size()) + " entries for " +
                                  std::to_string(dfg.size()) + " operations");
    return out;
  }

  // Every op feeding the cover set must be placed.
  std::vector<bool> needed = fanin_cone(dfg, cover_set(dfg));
  std::map<int, int> fu_owner;
  for (int o = 0; o < dfg.size(); ++o) {
    int u = sol.placement[o];
    if (u < 0) {
      if (needed[o]) add(ViolationKind::Unplaced, "operation '" + ops[o].id + "' is not placed");
      continue;
    }
    if (u >= mrrg.size()) {
      add(ViolationKind::Shape, "operation '" + ops[o].id + "' placed on a nonexistent node");
      continue;
    }
    const auto& node = mrrg.node(u);
    if (!node.is_fu() || !node.ops.contains(ops[o].opcode))
      add(ViolationKind::Incompatible, "operation '" + ops[o].id + "' (" + std::string(opcode_name(ops[o].opcode)) +
                                           ") cannot run on " + mrrg.key(u));
    auto [it, fresh] = fu_owner.emplace(u, o);
    if (!fresh)
      add(ViolationKind::Exclusivity,
          mrrg.key(u) + " hosts both '" + ops[it->second].id + "' and '" + ops[o].id + "'");
  }

  // Route shape checks.
  std::set<std::pair<int, int>> routed;
  for (const auto& rc : sol.routes) {
    if (rc.driver_op < 0 || rc.driver_op >= dfg.size() || rc.sink_op < 0 || rc.sink_op >= dfg.size()) {
      add(ViolationKind::Shape, "route names a nonexistent operation");
      continue;
    }
    std::string label = "route " + ops[rc.driver_op].id + " -> " + ops[rc.sink_op].id;
    const auto& vs = rc.path.vertices;
    if (vs.size() < 2 || std::any_of(vs.begin(), vs.end(), [&](int v) { return v < 0 || v >= mrrg.size(); })) {
      add(ViolationKind::Shape, label + " has an invalid vertex list");
      continue;
    }
    int u = sol.placement[rc.driver_op], v = sol.placement[rc.sink_op];
    if (vs.front() != u || vs.back() != v || rc.path.driver != u || rc.path.sink != v)
      add(ViolationKind::Endpoint, label + " does not run between the placed FUs");
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
      const auto& fo = mrrg.fanout(vs[i]);
      if (!std::binary_search(fo.begin(), fo.end(), vs[i + 1]))
        add(ViolationKind::MissingEdge, label + " uses missing edge " + mrrg.key(vs[i]) + " -> " + mrrg.key(vs[i + 1]));
    }
    for (std::size_t i = 1; i + 1 < vs.size(); ++i)
      if (mrrg.node(vs[i]).is_fu()) add(ViolationKind::InteriorFu, label + " passes through " + mrrg.key(vs[i]));
    std::set<int> distinct(vs.begin(), vs.end());
    bool cycle_ok = vs.front() == vs.back() && distinct.size() == vs.size() - 1;
    if (distinct.size() != vs.size() && !cycle_ok) add(ViolationKind::NotSimple, label + " repeats a vertex");
    routed.emplace(rc.driver_op, rc.sink_op);
  }

  // Every placed connection needs a route.
  for (const auto& pr : dfg.pairs()) {
    if (sol.placement[pr.driver] < 0 || sol.placement[pr.sink] < 0) continue;
    if (!routed.count({pr.driver, pr.sink}))
      add(ViolationKind::MissingRoute, "no route for " + ops[pr.driver].id + " -> " + ops[pr.sink].id);
  }

  // Interior vertices may only be shared by routes of the same driver FU.
  std::map<int, std::pair<int, int>> user;  // vertex -> (driver FU, route index)
  for (std::size_t r = 0; r < sol.routes.size(); ++r) {
    const auto& vs = sol.routes[r].path.vertices;
    if (vs.size() < 2) continue;
    int drv = vs.front();
    for (std::size_t i = 1; i + 1 < vs.size(); ++i) {
      if (vs[i] < 0 || vs[i] >= mrrg.size()) continue;
      auto [it, fresh] = user.emplace(vs[i], std::make_pair(drv, static_cast<int>(r)));
      if (!fresh && it->second.first != drv) {
        const auto& a = sol.routes[it->second.second];
        const auto& b = sol.routes[r];
        add(ViolationKind::Short, mrrg.key(vs[i]) + " carries both " + ops[a.driver_op].id + " and " +
                                      ops[b.driver_op].id);
      }
    }
  }
  return out;
}

}  // namespace cgra
