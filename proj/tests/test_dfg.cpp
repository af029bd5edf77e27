#include <random>
#include <set>

#include "cgra/dfg.hpp"
#include "doctest.h"

using namespace cgra;

namespace {

const char* kMulAdd = R"(
# a = b * (c + d)
op b input
op c input
op d input
op s add
op m mul
op a output
edge c -> s:0
edge d -> s:1
edge b -> m:0
edge s -> m:1
edge m -> a:0
)";

const char* kArraySum = R"(
op addr input
op four const const=4
op cnt add
op off add
op ld load
op acc add
op res output
edge four -> cnt:0
edge cnt -> cnt:1, off:1
edge addr -> off:0
edge off -> ld:0
edge ld -> acc:0
edge acc -> acc:1, res:0
)";

// Reachability oracle: the set of ops whose forward closure reaches any root.
std::set<int> covered_by(const Dfg& g, const std::vector<int>& roots) {
  std::set<int> seen(roots.begin(), roots.end());
  std::vector<int> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& e : g.edges())
      for (const auto& s : e.sinks)
        if (s.op == v && seen.insert(e.driver).second) stack.push_back(e.driver);
  }
  return seen;
}

Dfg random_dfg(std::mt19937_64& rng, int n) {
  std::vector<Operation> ops;
  for (int i = 0; i < n; ++i) ops.push_back({"v" + std::to_string(i), Opcode::Add, std::nullopt});
  // each op gets up to two operands from random drivers (cycles allowed)
  std::vector<HyperEdge> edges(n);
  for (int i = 0; i < n; ++i) edges[i].driver = i;
  std::uniform_int_distribution<int> pick(0, n - 1), nops(0, 2);
  for (int s = 0; s < n; ++s) {
    int k = nops(rng);
    for (int operand = 0; operand < k; ++operand) edges[pick(rng)].sinks.push_back({s, operand});
  }
  std::vector<HyperEdge> kept;
  for (auto& e : edges)
    if (!e.sinks.empty()) kept.push_back(e);
  return Dfg(ops, kept);
}

}  // namespace

TEST_CASE("parse the a = b * (c + d) example") {
  Dfg g = parse_dfg(kMulAdd);
  CHECK(g.size() == 6);
  CHECK(g.pairs().size() == 5);
  CHECK(g.ops()[g.find("s")].opcode == Opcode::Add);
  CHECK(validate_dfg(g).empty());
  CHECK(cover_set(g) == std::vector<int>{g.find("a")});
}

TEST_CASE("parse the array-sum example with two self loops") {
  Dfg g = parse_dfg(kArraySum);
  CHECK(g.size() == 7);
  int loops = 0;
  for (const auto& p : g.pairs()) loops += p.driver == p.sink;
  CHECK(loops == 2);
  CHECK(g.ops()[g.find("four")].constant == 4);
  auto cover = cover_set(g);
  CHECK(cover == std::vector<int>{g.find("res")});
  CHECK(covered_by(g, cover).size() == 7u);
}

TEST_CASE("empty and single-op graphs") {
  Dfg empty = parse_dfg("");
  CHECK(empty.size() == 0);
  CHECK(cover_set(empty).empty());
  Dfg one = parse_dfg("op v add\n");
  CHECK(cover_set(one) == std::vector<int>{0});
}

TEST_CASE("parse errors carry kind and position") {
  auto kind_of = [](const char* text) {
    try {
      parse_dfg(text);
    } catch (const DfgParseError& e) {
      return std::make_pair(e.kind(), e.line());
    }
    FAIL("expected a parse error");
    return std::make_pair(DfgErrorKind::Syntax, 0);
  };
  CHECK(kind_of("op a add\nop b frobnicate\n") == std::make_pair(DfgErrorKind::UnknownOpcode, 2));
  CHECK(kind_of("op a add\nop a add\n") == std::make_pair(DfgErrorKind::DuplicateId, 2));
  CHECK(kind_of("op a add\nedge a -> z:0\n") == std::make_pair(DfgErrorKind::DanglingEndpoint, 2));
  CHECK(kind_of("op a add\nop b add\nop c add\nedge a -> c:0\nedge b -> c:0\n") ==
        std::make_pair(DfgErrorKind::DuplicateDriver, 5));
  CHECK(kind_of("op a add\nedge a c:0\n").first == DfgErrorKind::Syntax);
  CHECK(kind_of("op a add const=3\n").first == DfgErrorKind::Syntax);
}

TEST_CASE("validate_dfg reports constructed violations") {
  std::vector<Operation> ops = {{"a", Opcode::Add, {}}, {"b", Opcode::Add, {}}, {"c", Opcode::Add, {}}};
  Dfg dup(ops, {{0, {{2, 0}}}, {1, {{2, 0}}}});
  auto v = validate_dfg(dup);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == DfgErrorKind::DuplicateDriver);
  Dfg dangling(ops, {{0, {{7, 0}}}});
  v = validate_dfg(dangling);
  REQUIRE(!v.empty());
  CHECK(v[0].kind == DfgErrorKind::DanglingEndpoint);
}

TEST_CASE("serialize/parse round trip") {
  for (const char* text : {kMulAdd, kArraySum}) {
    Dfg g = parse_dfg(text);
    CHECK(parse_dfg(serialize_dfg(g)) == g);
  }
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    Dfg g = random_dfg(rng, 1 + t % 10);
    CHECK(parse_dfg(serialize_dfg(g)) == g);
  }
}

TEST_CASE("cover set covers everything and is minimal among sink-based covers") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    Dfg g = random_dfg(rng, 1 + t % 12);
    auto cover = cover_set(g);
    CHECK(covered_by(g, cover).size() == static_cast<std::size_t>(g.size()));
    // independent check of fanin_cone
    auto cone = fanin_cone(g, cover);
    for (int v = 0; v < g.size(); ++v) CHECK(cone[v]);
    // removing any element must uncover something
    for (std::size_t i = 0; i < cover.size(); ++i) {
      auto smaller = cover;
      smaller.erase(smaller.begin() + static_cast<long>(i));
      CHECK(covered_by(g, smaller).size() < static_cast<std::size_t>(g.size()));
    }
  }
}
