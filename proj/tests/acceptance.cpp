// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when a
// gated criterion fails; the relative-speed criterion is reported only.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cgra/baseline.hpp"
#include "cgra/bench.hpp"
#include "cgra/mapper.hpp"
#include "cgra/report.hpp"
#include "oracles.hpp"

using namespace cgra;

namespace {

const std::string kSrc = CGRA_SOURCE_DIR;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Result {
  bool pass = true;
  std::string detail;
};

bool g_gate = true;

void report(int id, const std::string& name, const Result& r, bool gated, double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs", seconds);
  std::cout << (r.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << (gated ? "" : " (soft, not gated)")
            << " - " << r.detail << " (" << buf << ")" << std::endl;
  if (gated && !r.pass) g_gate = false;
}

void run(int id, const std::string& name, bool gated, const std::function<Result()>& body) {
  auto t0 = Clock::now();
  Result r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, r, gated, since(t0));
}

struct NamedSpec {
  std::string name;
  ArchSpec spec;
};

std::vector<NamedSpec> bundled_archs() {
  std::vector<NamedSpec> out;
  for (const char* n : {"ortho3x3", "adres4x4", "hycube4x4", "clustered4x4"})
    out.push_back({n, load_arch_spec(kSrc + "/arch/" + n + ".arch")});
  return out;
}

ArchSpec ortho(int r, int c, bool rt) {
  ArchSpec s;
  s.rows = r;
  s.cols = c;
  s.route_through = rt;
  return s;
}

// Small DFGs of at most six operations.
const std::vector<std::string> kSmallDfgs = {
    "op i input\nop o output\nedge i -> o:0\n",
    "op i input\nop a add\nop o output\nedge i -> a:0, a:1\nedge a -> o:0\n",
    "op i input\nop a add\nop o output\nedge i -> a:0\nedge a -> a:1, o:0\n",
    "op x input\nop y input\nop p mul\nop q add\nop o output\nedge x -> p:0, q:0\nedge y -> p:1\nedge p -> q:1\n"
    "edge q -> o:0\n",
    "op b input\nop c input\nop d input\nop s add\nop m mul\nop a output\n"
    "edge c -> s:0\nedge d -> s:1\nedge b -> m:0\nedge s -> m:1\nedge m -> a:0\n",
    "op x input\nop k const\nop m mul\nop a add\nop o output\nedge x -> m:0, a:1\nedge k -> m:1\nedge m -> a:0\n"
    "edge a -> o:0\n",
};

struct SmallInstance {
  std::string label;
  Dfg dfg;
  ArchSpec spec;
  int ii;
};

std::vector<SmallInstance> small_suite() {
  std::vector<SmallInstance> out;
  for (std::size_t d = 0; d < kSmallDfgs.size(); ++d)
    for (auto [r, c] : {std::pair{1, 3}, std::pair{2, 2}, std::pair{2, 3}})
      for (bool rt : {false, true})
        for (int ii : {1, 2}) {
          std::ostringstream label;
          label << "dfg" << d << "/" << r << "x" << c << (rt ? "" : "-nort") << "/ii" << ii;
          out.push_back({label.str(), parse_dfg(kSmallDfgs[d]), ortho(r, c, rt), ii});
        }
  return out;
}

// The oracle comparison needs the composed method to be exhaustive on these
// tiny instances, so the relaxed-placement enumeration is not capped.
MapLimits exhaustive_limits() {
  MapLimits lim;
  lim.placement_limit = 1'000'000;
  return lim;
}

// ------------------------------------------------------------------ criteria

struct SuiteRun {
  std::string cell;
  Dfg dfg;
  ArchSpec spec;
  int ii;
  MapOutcome outcome;
  std::string json;
  double seconds;
};

std::vector<SuiteRun> g_suite_runs;

MapLimits suite_limits() {
  MapLimits lim;
  lim.total_budget = 90;
  lim.solve_time_limit = 30;
  return lim;
}

Result validity() {
  auto suite = load_suite(kSrc + "/benchmarks");
  int mapped = 0, invalid = 0, not_mappable = 0, timed_out = 0;
  std::string bad;
  for (const auto& b : suite)
    for (const auto& a : bundled_archs())
      for (int ii : {1, 2}) {
        Mrrg m = build_mrrg(a.spec, ii);
        auto t0 = Clock::now();
        MapOutcome o = map(b.dfg, m, NnSchedule::generic(), suite_limits());
        double secs = since(t0);
        std::string cell = b.name + "@" + a.name + "/ii" + std::to_string(ii);
        if (o.status == MapStatus::Mapped) {
          ++mapped;
          if (!validate_mapping(b.dfg, m, *o.solution).empty()) {
            ++invalid;
            bad += " " + cell;
          }
        } else {
          (o.status == MapStatus::TimedOut ? timed_out : not_mappable)++;
        }
        std::string json = outcome_to_json(b.dfg, m, o, false).dump(2);
        g_suite_runs.push_back({cell, b.dfg, a.spec, ii, std::move(o), std::move(json), secs});
      }
  std::ostringstream os;
  os << mapped << " mapped, " << invalid << " invalid, " << not_mappable << " not mappable, " << timed_out
     << " timed out of " << g_suite_runs.size() << " cells" << bad;
  return {mapped > 0 && invalid == 0, os.str()};
}

Result oracle_equivalence() {
  int agree = 0, disagree = 0, unknown = 0, feasible = 0;
  std::string bad;
  for (const auto& in : small_suite()) {
    Mrrg m = build_mrrg(in.spec, in.ii);
    auto bf = oracle::BruteForceMapper(in.dfg, m).mappable();
    MapOutcome o = map(in.dfg, m, NnSchedule::generic(), exhaustive_limits());
    SolveConfig cfg;
    cfg.time_limit = 120;
    auto g = solve_generic(build_generic(in.dfg, m), cfg);
    if (!bf || o.status == MapStatus::TimedOut || g.solve.status == SolveStatus::TimedOut) {
      ++unknown;
      bad += " " + in.label + "(undecided)";
      continue;
    }
    bool composed = o.status == MapStatus::Mapped;
    if (composed == *bf && g.solve.feasible() == *bf) {
      ++agree;
      feasible += *bf;
    } else {
      ++disagree;
      bad += " " + in.label + "(bf=" + std::to_string(*bf) + ",composed=" + std::to_string(composed) +
             ",generic=" + std::to_string(g.solve.feasible()) + ")";
    }
  }
  std::ostringstream os;
  os << agree << "/" << (agree + disagree + unknown) << " instances agree (" << feasible << " mappable)" << bad;
  return {disagree == 0 && unknown == 0 && agree >= 30, os.str()};
}

Result route_through() {
  Dfg g = load_dfg(kSrc + "/benchmarks/triangle.dfg");
  Mrrg off = build_mrrg(load_arch_spec(kSrc + "/arch/ortho3x3_nort.arch"), 1);
  Mrrg on = build_mrrg(load_arch_spec(kSrc + "/arch/ortho3x3.arch"), 1);
  MapOutcome a = map(g, off, NnSchedule::generic(), MapLimits{});
  MapOutcome b = map(g, on, NnSchedule::generic(), MapLimits{});
  bool uses_rt = false;
  if (b.solution)
    for (const auto& rc : b.solution->routes)
      for (int v : rc.path.vertices) uses_rt = uses_rt || on.node(v).name.ends_with(".rt");
  bool valid = b.solution && validate_mapping(g, on, *b.solution).empty();
  std::ostringstream os;
  os << "without route-through: " << map_status_name(a.status) << "; with: " << map_status_name(b.status)
     << (b.solution ? " at NN " + std::to_string(b.solution->nn) : "") << (uses_rt ? ", uses a route-through" : "");
  return {a.status == MapStatus::NotMappable && b.status == MapStatus::Mapped && uses_rt && valid, os.str()};
}

Result path_enumeration() {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> nd(2, 14);
  int ok = 0;
  for (int t = 0; t < 200; ++t) {
    int n = nd(rng);
    Digraph g = oracle::random_digraph(rng, n, 2.2 / n + 0.05);
    std::uniform_int_distribution<int> vd(0, n - 1);
    int s = vd(rng), d = vd(rng), k = 1 + t % 25;
    auto expect = oracle::all_simple_paths(g, s, d);
    if (static_cast<int>(expect.size()) > k) expect.resize(k);
    ok += k_shortest_simple_paths(g, s, d, k) == expect;
  }
  MrrgBuilder b;
  b.add_node("u", NodeKind::FunctionUnit, 0, {Opcode::Add});
  b.add_node("v", NodeKind::FunctionUnit, 0, {Opcode::Add});
  for (int i = 0; i < 3; ++i) {
    b.add_node("x1_" + std::to_string(i), NodeKind::Routing, 0);
    b.add_node("x2_" + std::to_string(i), NodeKind::Routing, 0);
  }
  for (int i = 0; i < 3; ++i) {
    b.add_edge("u", "x1_" + std::to_string(i));
    b.add_edge("x2_" + std::to_string(i), "v");
    for (int j = 0; j < 3; ++j) b.add_edge("x1_" + std::to_string(i), "x2_" + std::to_string(j));
  }
  Mrrg x = b.build(1);
  auto paths = k_shortest_paths(x, x.find("u", 0), x.find("v", 0), 20);
  std::ostringstream os;
  os << ok << "/200 random graphs match; crossbar 3x3 yields " << paths.size() << " paths";
  return {ok == 200 && paths.size() == 9, os.str()};
}

std::string highs_command() {
  if (std::system("python3 -c 'import highspy' > /dev/null 2>&1") != 0) return "";
  return "python3 " + kSrc + "/tools/highs_solve.py {lp} {sol} {time} {seed}";
}

Result solver_exactness() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nd(1, 20);
  int ok = 0, feasible = 0;
  for (int t = 0; t < 1000; ++t) {
    IlpModel m = oracle::random_model(rng, nd(rng));
    auto ex = oracle::enumerate_model(m);
    SolveConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.mode = t % 2 ? SolveMode::Optimize : SolveMode::Feasibility;
    auto r = solve(m, cfg);
    bool good = r.status != SolveStatus::TimedOut && r.feasible() == ex.feasible;
    if (good && r.feasible()) {
      good = m.first_violation(r.assignment) < 0;
      if (cfg.mode == SolveMode::Optimize) good = good && r.optimal && r.objective && *r.objective == ex.best;
    }
    ok += good;
    feasible += ex.feasible;
  }
  std::ostringstream os;
  os << ok << "/1000 random models match enumeration (" << feasible << " feasible)";
  bool pass = ok == 1000;
  std::string cmd = highs_command();
  if (cmd.empty()) {
    os << "; external check skipped (highspy not installed)";
  } else {
    int agree = 0;
    std::mt19937_64 r2(77);
    SolveConfig cfg;
    cfg.time_limit = 30;
    for (int t = 0; t < 50; ++t) {
      IlpModel m = oracle::random_model(r2, 1 + t % 20);
      agree += solve_external(m, cmd, cfg).status == solve(m, cfg).status;
    }
    os << "; HiGHS status agrees on " << agree << "/50";
    pass = pass && agree == 50;
  }
  return {pass, os.str()};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0;
  return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2;
}

Result monotonicity() {
  auto suite = load_suite(kSrc + "/benchmarks");
  MapLimits lim = suite_limits();
  bool monotone = true;
  std::ostringstream os;
  std::vector<Characterization> curves;
  auto archs = bundled_archs();
  for (const auto& a : archs) {
    curves.push_back(characterize(a.spec, {1, 2}, suite, NnSchedule::generic(), lim));
    const auto& rows = curves.back().rows;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].fraction >= rows[i - 1].fraction;
    os << a.name << " [";
    for (std::size_t i = 0; i < rows.size(); ++i) os << (i ? " " : "") << rows[i].mapped;
    os << "/" << (rows.empty() ? 0 : rows[0].total) << "] ";
  }
  // First-success NN per family: median over the cells mapped on both.
  const auto& hy = curves[2].cells;
  const auto& cl = curves[3].cells;
  std::vector<double> hy_nn, cl_nn;
  for (std::size_t i = 0; i < hy.size(); ++i)
    if (hy[i].first_nn && cl[i].first_nn) {
      hy_nn.push_back(*hy[i].first_nn);
      cl_nn.push_back(*cl[i].first_nn);
    }
  double mh = median(hy_nn), mc = median(cl_nn);
  os << "; median first-success NN over " << hy_nn.size() << " common cells: clustered " << mc << ", hycube " << mh;
  return {monotone && !hy_nn.empty() && mc > mh, os.str()};
}

std::vector<std::uint8_t> project(const IlpModel& src, const std::vector<std::uint8_t>& a, const IlpModel& dst) {
  std::vector<std::uint8_t> out(dst.var_count(), 0);
  for (int i = 0; i < dst.var_count(); ++i) {
    int j = src.find(dst.var(i));
    if (j < 0) throw std::runtime_error("variable " + dst.name(i) + " missing from the combined model");
    out[i] = a[j];
  }
  return out;
}

Result relaxation_ordering() {
  // The combined model draws on the same per-connection path list as the
  // relaxed model, so the P projection is well defined.
  ModelParams params;
  params.combined_paths = params.paths_per_connection;
  int solved = 0, counter = 0, instances = 0;
  for (const auto& in : small_suite()) {
    Mrrg m = build_mrrg(in.spec, in.ii);
    for (int nn : {4, 8}) {
      NeighborMap nmap = build_neighbor_map(m, nn);
      PathCache cache(20);
      cache.ensure(m, neighbor_pairs(m, nmap));
      ModelContext ctx(in.dfg, m, &nmap, &cache);
      IlpModel co = build_variant(Variant::Combined, ctx, params);
      IlpModel rp = build_variant(Variant::RelaxedPlacement, ctx, params);
      IlpModel po = build_variant(Variant::PlacementOnly, ctx, params);
      ++instances;
      SolveConfig cfg;
      cfg.solution_limit = 3;
      for (const auto& r : enumerate_solutions(co, cfg, {VarClass::F})) {
        ++solved;
        if (rp.first_violation(project(co, r.assignment, rp)) >= 0 ||
            po.first_violation(project(co, r.assignment, po)) >= 0)
          ++counter;
      }
    }
  }
  std::ostringstream os;
  os << solved << " combined solutions over " << instances << " models, " << counter << " counterexamples";
  return {counter == 0 && solved > 0, os.str()};
}

Result relative_speed() {
  std::vector<Benchmark> big;
  for (const auto& b : load_suite(kSrc + "/benchmarks"))
    if (b.dfg.size() >= 8) big.push_back(b);
  std::vector<NamedArch> archs{{"hycube4x4", load_arch_spec(kSrc + "/arch/hycube4x4.arch")}};
  auto runs = run_bench(big, archs, 2, {1, 2, 3}, NnSchedule::generic(), suite_limits(), 300);
  std::vector<double> comp, base;
  for (const auto& r : runs) (r.method == "composed" ? comp : base).push_back(r.seconds);
  double mc = median(comp), mb = median(base);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%zu DFGs x 3 seeds: median composed %.3fs, generic %.3fs, ratio generic/composed %.2f",
                big.size(), mc, mb, mc > 0 ? mb / mc : 0.0);
  return {!comp.empty() && mc < mb, buf};
}

Result determinism() {
  std::vector<const SuiteRun*> cells;
  for (const auto& r : g_suite_runs)
    if (r.outcome.status != MapStatus::TimedOut && r.seconds < 20) cells.push_back(&r);
  if (cells.size() > 20) {
    // spread the sample over the whole grid
    std::vector<const SuiteRun*> sample;
    for (int i = 0; i < 20; ++i) sample.push_back(cells[i * cells.size() / 20]);
    cells = sample;
  }
  int same = 0;
  std::string bad;
  for (const auto* r : cells) {
    Mrrg m = build_mrrg(r->spec, r->ii);
    MapOutcome o = map(r->dfg, m, NnSchedule::generic(), suite_limits());
    if (outcome_to_json(r->dfg, m, o, false).dump(2) == r->json) ++same;
    else bad += " " + r->cell;
  }
  std::ostringstream os;
  os << same << "/" << cells.size() << " cells byte-identical" << bad;
  return {cells.size() == 20 && same == 20, os.str()};
}

}  // namespace

int main() {
  run(1, "validity of every mapping over the bundled suite", true, validity);
  run(2, "composed == generic == brute force on small instances", true, oracle_equivalence);
  run(3, "route-through reproduction", true, route_through);
  run(4, "k shortest paths vs exhaustive enumeration", true, path_enumeration);
  run(5, "solver exactness", true, solver_exactness);
  run(6, "characterisation monotone; clustered needs larger NN than hycube", true, monotonicity);
  run(7, "relaxation ordering", true, relaxation_ordering);
  run(8, "relative speed on hycube 4x4, II 2", false, relative_speed);
  run(9, "determinism of reports", true, determinism);
  return g_gate ? 0 : 1;
}
