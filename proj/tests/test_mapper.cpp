#include <algorithm>

#include "cgra/mapper.hpp"
#include "cgra/report.hpp"
#include "doctest.h"

using namespace cgra;

namespace {

const char* kMulAdd =
    "op b input\nop c input\nop d input\nop s add\nop m mul\nop a output\n"
    "edge c -> s:0\nedge d -> s:1\nedge b -> m:0\nedge s -> m:1\nedge m -> a:0\n";
const char* kTriangle =
    "op i1 input\nop i2 input\nop i3 input\nop a2 add\nop m1 mul\nop a1 add\nop o output\n"
    "edge i1 -> a2:0\nedge i2 -> a2:1\nedge a2 -> m1:0, a1:0\nedge i3 -> m1:1\nedge m1 -> a1:1\nedge a1 -> o:0\n";

ArchSpec ortho(int r, int c, bool rt = true) {
  ArchSpec s;
  s.rows = r;
  s.cols = c;
  s.route_through = rt;
  return s;
}

bool uses_route_through(const Mrrg& m, const MappingSolution& sol) {
  for (const auto& rc : sol.routes)
    for (int v : rc.path.vertices)
      if (m.node(v).name.ends_with(".rt")) return true;
  return false;
}

}  // namespace

TEST_CASE("a = b * (c + d) maps at NN 4 and validates") {
  Dfg g = parse_dfg(kMulAdd);
  Mrrg m = build_mrrg(ortho(3, 3), 1);
  MapOutcome o = map(g, m, NnSchedule::parse("4"), MapLimits{});
  REQUIRE(o.status == MapStatus::Mapped);
  REQUIRE(o.solution);
  CHECK(o.solution->nn == 4);
  CHECK(validate_mapping(g, m, *o.solution).empty());
  REQUIRE(o.log.size() == 1);
  CHECK(o.log[0].mapped);
  // a larger schedule containing the successful value also succeeds
  CHECK(map(g, m, NnSchedule::parse("4,6"), MapLimits{}).status == MapStatus::Mapped);
}

TEST_CASE("more adds than ALUs is not mappable") {
  std::string text;
  for (int i = 0; i < 10; ++i) text += "op a" + std::to_string(i) + " add\n";
  Dfg g = parse_dfg(text);
  Mrrg m = build_mrrg(ortho(3, 3), 1);
  CHECK(screen_instance(g, m).has_value());
  MapOutcome o = map(g, m, NnSchedule::generic(), MapLimits{});
  CHECK(o.status == MapStatus::NotMappable);
  CHECK(!o.message.empty());
  CHECK(!o.solution);
}

TEST_CASE("triangle needs a route-through") {
  Dfg g = parse_dfg(kTriangle);
  Mrrg on = build_mrrg(ortho(3, 3, true), 1);
  MapOutcome o = map(g, on, NnSchedule::generic(), MapLimits{});
  REQUIRE(o.status == MapStatus::Mapped);
  CHECK(validate_mapping(g, on, *o.solution).empty());
  CHECK(uses_route_through(on, *o.solution));

  Mrrg off = build_mrrg(ortho(3, 3, false), 1);
  MapOutcome n = map(g, off, NnSchedule::generic(), MapLimits{});
  CHECK(n.status == MapStatus::NotMappable);
  CHECK(n.log.size() == NnSchedule::generic().values.size());
  for (const auto& a : n.log) CHECK(!a.mapped);
}

TEST_CASE("validator catches constructed violations") {
  Dfg g = parse_dfg("op i input\nop j input\nop a add\nedge i -> a:0\nedge j -> a:1\n");
  Mrrg m = build_mrrg(ortho(2, 2), 1);
  MapOutcome o = map(g, m, NnSchedule::generic(), MapLimits{});
  REQUIRE(o.solution);
  const MappingSolution good = *o.solution;
  CHECK(validate_mapping(g, m, good).empty());
  auto has = [&](const MappingSolution& s, ViolationKind k) {
    auto v = validate_mapping(g, m, s);
    return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.kind == k; });
  };

  MappingSolution twice = good;
  twice.placement[1] = twice.placement[0];
  CHECK(has(twice, ViolationKind::Exclusivity));

  MappingSolution unplaced = good;
  unplaced.placement[2] = -1;
  CHECK(has(unplaced, ViolationKind::Unplaced));

  MappingSolution missing = good;
  missing.routes.pop_back();
  CHECK(has(missing, ViolationKind::MissingRoute));

  MappingSolution wrong_fu = good;
  wrong_fu.placement[2] = m.find("pe_0_0.const", 0);
  CHECK(has(wrong_fu, ViolationKind::Incompatible));

  // two inputs whose values both pass through the same input port of the add
  Mrrg line = build_mrrg(ortho(1, 3), 1);
  int left = line.find("pe_0_0.alu", 0), mid = line.find("pe_0_1.alu", 0), right = line.find("pe_0_2.alu", 0);
  auto k = [&](const char* key) { return line.find_key(key); };
  MappingSolution shorted;
  shorted.placement = {left, mid, right};
  // i (left) -> a (right) through mid's route-through; j (mid) -> a directly.
  // Both cross pe_0_2.in_W: a short between different drivers.
  shorted.routes.push_back({0, 2,
                            RoutePath{left, right,
                                      {left, k("pe_0_0.out@0"), k("pe_0_1.in_W@0"), k("pe_0_1.rt@0"),
                                       k("pe_0_1.out@0"), k("pe_0_2.in_W@0"), k("pe_0_2.mux_a@0"), right}}});
  shorted.routes.push_back(
      {1, 2, RoutePath{mid, right, {mid, k("pe_0_1.out@0"), k("pe_0_2.in_W@0"), k("pe_0_2.mux_b@0"), right}}});
  auto v = validate_mapping(g, line, shorted);
  CHECK(std::any_of(v.begin(), v.end(), [](const auto& x) { return x.kind == ViolationKind::Short; }));

  MappingSolution gap = shorted;
  gap.routes[1].path.vertices.erase(gap.routes[1].path.vertices.begin() + 2);
  auto gv = validate_mapping(g, line, gap);
  CHECK(std::any_of(gv.begin(), gv.end(), [](const auto& x) { return x.kind == ViolationKind::MissingEdge; }));
}

TEST_CASE("placement cap bounds routing calls per NN") {
  Dfg g = parse_dfg(
      "op x0 input\nop x1 input\nop x2 input\nop x3 input\nop s01 add\nop s23 add\nop s add\nop o output\n"
      "edge x0 -> s01:0\nedge x1 -> s01:1\nedge x2 -> s23:0\nedge x3 -> s23:1\nedge s01 -> s:0\nedge s23 -> s:1\n"
      "edge s -> o:0\n");
  Mrrg m = build_mrrg(ortho(3, 3), 1);
  for (int cap : {1, 5, 100}) {
    MapLimits lim;
    lim.placement_limit = cap;
    MapOutcome o = map(g, m, NnSchedule::parse("4,6"), lim);
    for (const auto& a : o.log) {
      CHECK(a.routing_calls <= cap);
      CHECK(a.placements_tried <= cap);
    }
    if (o.solution) CHECK(validate_mapping(g, m, *o.solution).empty());
  }
}

TEST_CASE("minimum II search") {
  Dfg g = parse_dfg(kMulAdd);
  auto [ii, o] = map_min_ii(g, ortho(3, 3), 3, NnSchedule::generic(), MapLimits{});
  CHECK(ii == 1);
  CHECK(o.status == MapStatus::Mapped);

  // a single 2x2 cluster has four ALUs but only one IO port per context
  ArchSpec cl;
  cl.family = Family::Clustered;
  cl.rows = cl.cols = 2;
  Dfg io = parse_dfg("op i input\nop a add\nop o output\nedge i -> a:0, a:1\nedge a -> o:0\n");
  auto [ii2, o2] = map_min_ii(io, cl, 3, NnSchedule::generic(), MapLimits{});
  CHECK(ii2 == 2);
  REQUIRE(o2.solution);
  CHECK(validate_mapping(io, build_mrrg(cl, 2), *o2.solution).empty());

  ArchSpec nomem;
  nomem.family = Family::HyCube;
  nomem.rows = nomem.cols = 2;
  nomem.mem_west = false;
  Dfg ld = parse_dfg("op i input\nop l load\nop o output\nedge i -> l:0\nedge l -> o:0\n");
  auto [ii3, o3] = map_min_ii(ld, nomem, 2, NnSchedule::generic(), MapLimits{});
  CHECK(ii3 == 2);
  CHECK(o3.status == MapStatus::NotMappable);
}

TEST_CASE("NN schedules") {
  CHECK(NnSchedule::generic().values == std::vector<int>{4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24});
  CHECK(NnSchedule::parse("3,5,9").values == std::vector<int>{3, 5, 9});
  CHECK(NnSchedule::parse("4:10:3").values == std::vector<int>{4, 7, 10});
  CHECK_THROWS(NnSchedule::parse(""));
  CHECK_THROWS(NnSchedule::parse("6,4"));
  CHECK_THROWS(NnSchedule::parse("a"));
  CHECK(NnSchedule::parse(NnSchedule::generic().to_string()).values == NnSchedule::generic().values);
}

TEST_CASE("characterisation curves") {
  std::vector<Benchmark> one{{"pass", parse_dfg("op i input\nop o output\nedge i -> o:0\n")}};
  Characterization c = characterize(ortho(3, 3), {1}, one, NnSchedule::generic(), MapLimits{});
  REQUIRE(c.rows.size() == NnSchedule::generic().values.size());
  REQUIRE(c.cells.size() == 1);
  REQUIRE(c.cells[0].first_nn);
  for (const auto& r : c.rows) CHECK(r.fraction == (r.nn >= *c.cells[0].first_nn ? 1.0 : 0.0));
  REQUIRE(c.suggested);
  CHECK(c.suggested->values.front() == *c.cells[0].first_nn);
  CHECK(characterization_csv(c).starts_with("nn,mapped,total,fraction\n4,1,1,1.000000\n"));

  std::vector<Benchmark> suite{{"muladd", parse_dfg(kMulAdd)}, {"triangle", parse_dfg(kTriangle)}, one[0]};
  Characterization cs = characterize(ortho(3, 3), {1, 2}, suite, NnSchedule::generic(), MapLimits{});
  CHECK(cs.cells.size() == 6u);
  for (std::size_t i = 1; i < cs.rows.size(); ++i) CHECK(cs.rows[i].fraction >= cs.rows[i - 1].fraction);
}

TEST_CASE("reports are deterministic and omit timings by default") {
  Dfg g = parse_dfg(kTriangle);
  Mrrg m = build_mrrg(ortho(3, 3), 2);
  MapLimits lim;
  lim.seed = 3;
  auto a = outcome_to_json(g, m, map(g, m, NnSchedule::generic(), lim), false).dump(2);
  auto b = outcome_to_json(g, m, map(g, m, NnSchedule::generic(), lim), false).dump(2);
  CHECK(a == b);
  CHECK(a.find("seconds") == std::string::npos);
}
