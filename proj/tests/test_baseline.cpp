#include "cgra/baseline.hpp"
#include "cgra/mapper.hpp"
#include "doctest.h"
#include "oracles.hpp"

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

}  // namespace

TEST_CASE("single op without edges: only exclusivity and must-map rows") {
  Dfg g = parse_dfg("op a add\n");
  Mrrg m = build_mrrg(ortho(2, 2), 1);
  BaselineModel bm = build_generic(g, m);
  for (const auto& c : bm.model.constraints())
    CHECK((c.tag == ConstraintTag::FuExclusivity || c.tag == ConstraintTag::MustMap));
  CHECK(bm.model.vars_of(VarClass::R).empty());
  auto r = solve_generic(bm, SolveConfig{});
  REQUIRE(r.mapping);
  CHECK(r.mapping->routes.empty());
  CHECK(r.mapping->placement[0] >= 0);
  CHECK(validate_mapping(g, m, *r.mapping).empty());
}

TEST_CASE("a = b * (c + d) maps and validates") {
  Dfg g = parse_dfg(kMulAdd);
  Mrrg m = build_mrrg(ortho(3, 3), 1);
  auto r = solve_generic(build_generic(g, m), SolveConfig{});
  REQUIRE(r.solve.feasible());
  REQUIRE(r.mapping);
  CHECK(r.mapping->routes.size() == g.pairs().size());
  CHECK(validate_mapping(g, m, *r.mapping).empty());
}

TEST_CASE("triangle: baseline agrees with the composed mapper on route-throughs") {
  Dfg g = parse_dfg(kTriangle);
  for (bool rt : {false, true}) {
    Mrrg m = build_mrrg(ortho(3, 3, rt), 1);
    auto r = solve_generic(build_generic(g, m), SolveConfig{});
    MapOutcome o = map(g, m, NnSchedule::generic(), MapLimits{});
    CHECK(r.solve.feasible() == rt);
    CHECK((o.status == MapStatus::Mapped) == rt);
    if (r.mapping) CHECK(validate_mapping(g, m, *r.mapping).empty());
  }
}

TEST_CASE("baseline size grows linearly with II") {
  Dfg g = parse_dfg(kMulAdd);
  auto rows = [&](int ii) { return build_generic(g, build_mrrg(ortho(3, 3), ii)).model.constraints().size(); };
  auto vars = [&](int ii) { return build_generic(g, build_mrrg(ortho(3, 3), ii)).model.var_count(); };
  CHECK(vars(2) == 2 * vars(1));
  CHECK(vars(3) == 3 * vars(1));
  double r1 = static_cast<double>(rows(1)), r2 = static_cast<double>(rows(2)), r3 = static_cast<double>(rows(3));
  CHECK(r2 - r1 == doctest::Approx(r3 - r2));
}

TEST_CASE("baseline verdict equals brute force on small instances") {
  const char* dfgs[] = {
      kMulAdd,
      "op i input\nop o output\nedge i -> o:0\n",
      "op i input\nop a add\nop o output\nedge i -> a:0, a:1\nedge a -> o:0\n",
      "op i input\nop a add\nop o output\nedge i -> a:0\nedge a -> a:1, o:0\n",
      "op x input\nop y input\nop p mul\nop q add\nop o output\nedge x -> p:0, q:0\nedge y -> p:1\nedge p -> q:1\n"
      "edge q -> o:0\n",
  };
  for (const char* text : dfgs) {
    Dfg g = parse_dfg(text);
    for (auto [r, c] : {std::pair{1, 3}, std::pair{2, 2}}) {
      for (bool rt : {false, true}) {
        for (int ii : {1, 2}) {
          Mrrg m = build_mrrg(ortho(r, c, rt), ii);
          auto bf = oracle::BruteForceMapper(g, m).mappable();
          REQUIRE(bf.has_value());
          SolveConfig cfg;
          cfg.time_limit = 60;
          auto res = solve_generic(build_generic(g, m), cfg);
          REQUIRE(res.solve.status != SolveStatus::TimedOut);
          CHECK(res.solve.feasible() == *bf);
          if (res.mapping) CHECK(validate_mapping(g, m, *res.mapping).empty());
        }
      }
    }
  }
}
