// cgramap: command-line front end for mapping, characterisation, path
// inspection, LP export, benchmarking and mapping validation.
//
// Exit codes:
//   0  success (mapped / valid / written)
//   1  not mappable, or the mapping has violations
//   2  timed out
//   3  usage error (bad flags, missing files)
//   4  input parse error (DFG, architecture, LP, placement or report files)
//   5  internal error

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgra/baseline.hpp"
#include "cgra/bench.hpp"
#include "cgra/dfg.hpp"
#include "cgra/ilp_model.hpp"
#include "cgra/mapper.hpp"
#include "cgra/mrrg.hpp"
#include "cgra/neighbors.hpp"
#include "cgra/paths.hpp"
#include "cgra/report.hpp"
#include "cgra/solver.hpp"

namespace fs = std::filesystem;
using namespace cgra;

namespace {

enum Exit { kOk = 0, kNotMappable = 1, kTimedOut = 2, kUsage = 3, kParse = 4, kInternal = 5 };

constexpr const char* kSolverEnv = "CGRAMAP_EXTERNAL_SOLVER";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write file: " + path);
  out << text;
}

Dfg load_dfg_file(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_dfg(text);
  } catch (const DfgParseError& e) {
    throw InputError(path + ":" + e.what());
  }
}

ArchSpec load_arch_file(const std::string& path) {
  std::string text = read_file(path);
  try {
    return parse_arch_spec(text);
  } catch (const ArchSpecError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  try {
    if (auto dash = text.find('-'); dash != std::string::npos) {
      int a = std::stoi(text.substr(0, dash)), b = std::stoi(text.substr(dash + 1));
      for (int i = a; i <= b; ++i) out.push_back(i);
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    }
  } catch (const std::exception&) {
    throw UsageError(std::string("bad ") + what + " list '" + text + "'");
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  for (int v : out)
    if (v < 1) throw UsageError(std::string(what) + " values must be positive");
  return out;
}

/// Common solver and limit flags.
struct SolverOpts {
  std::uint64_t seed = 0;
  double time_limit = 60.0;
  double budget = 600.0;
  int placement_limit = 100;
  int paths = 20;
  int paths_per_connection = 3;
  int overuse_limit = 2;
  std::string solver = "builtin";
  std::string schedule;

  void add(CLI::App* app, bool with_schedule = true) {
    app->add_option("--seed", seed, "Solver seed")->capture_default_str();
    app->add_option("--time-limit", time_limit, "Per-solve time limit in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--budget", budget, "Total time budget per mapping in seconds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--placement-limit", placement_limit, "Relaxed placements tried per NN")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--paths", paths, "Paths cached per FU pair (k)")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--paths-per-connection", paths_per_connection, "Paths per connection in relaxed placement")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--overuse-limit", overuse_limit, "Paths allowed per vertex in relaxed placement")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--solver", solver,
                    std::string("builtin, external:<command>, or external (command from $") + kSolverEnv + ")")
        ->capture_default_str();
    if (with_schedule)
      app->add_option("--schedule", schedule, "NN schedule: '4,6,8' or 'start:end:step' (default 4:24:2)");
  }

  std::string external_command() const {
    if (solver == "builtin") return "";
    if (solver == "external") {
      const char* env = std::getenv(kSolverEnv);
      if (!env || !*env) throw UsageError(std::string("--solver external needs $") + kSolverEnv);
      return env;
    }
    if (solver.rfind("external:", 0) == 0 && solver.size() > 9) return solver.substr(9);
    throw UsageError("unknown solver '" + solver + "'");
  }

  MapLimits limits() const {
    MapLimits l;
    l.placement_limit = placement_limit;
    l.solve_time_limit = time_limit;
    l.total_budget = budget;
    l.seed = seed;
    l.path_k = paths;
    l.params.paths_per_connection = paths_per_connection;
    l.params.routing_paths = paths;
    l.params.combined_paths = paths;
    l.params.overuse_limit = overuse_limit;
    l.external_solver = external_command();
    return l;
  }

  NnSchedule nn_schedule() const {
    if (schedule.empty()) return NnSchedule::generic();
    try {
      return NnSchedule::parse(schedule);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  SolveConfig solve_config() const {
    SolveConfig c;
    c.seed = seed;
    c.time_limit = time_limit;
    return c;
  }
};

int exit_for(MapStatus s) {
  switch (s) {
    case MapStatus::Mapped: return kOk;
    case MapStatus::NotMappable: return kNotMappable;
    case MapStatus::TimedOut: return kTimedOut;
  }
  return kNotMappable;
}

/// Placement from a map report (JSON with "placement") or "op fu_key" lines.
Placement load_placement(const std::string& path, const Dfg& dfg, const Mrrg& mrrg) {
  std::string text = read_file(path);
  Placement pl(dfg.size(), -1);
  auto assign = [&](const std::string& op, const std::string& key) {
    int o = dfg.find(op);
    if (o < 0) throw InputError(path + ": unknown operation '" + op + "'");
    int u = mrrg.find_key(key);
    if (u < 0) throw InputError(path + ": unknown MRRG node '" + key + "'");
    pl[o] = u;
  };
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what());
    }
    if (!j.contains("placement") || !j["placement"].is_object()) throw InputError(path + ": no placement object");
    for (auto& [op, key] : j["placement"].items())
      if (key.is_string()) assign(op, key.get<std::string>());
    return pl;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string op, key, extra;
    if (!(ls >> op)) continue;
    if (!(ls >> key) || (ls >> extra)) throw InputError(path + ":" + std::to_string(lineno) + ": expected '<op> <fu>'");
    assign(op, key);
  }
  return pl;
}

/// Mapping from a JSON map report.
MappingSolution load_mapping(const std::string& path, const Dfg& dfg, const Mrrg& mrrg) {
  MappingSolution sol;
  sol.placement = load_placement(path, dfg, mrrg);
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError(path + ": not a JSON map report");
  if (j.contains("routing")) {
    for (const auto& r : j["routing"]) {
      RoutedConnection rc;
      rc.driver_op = dfg.find(r.value("driver", ""));
      rc.sink_op = dfg.find(r.value("sink", ""));
      if (rc.driver_op < 0 || rc.sink_op < 0) throw InputError(path + ": route names an unknown operation");
      for (const auto& k : r["path"]) {
        int v = mrrg.find_key(k.get<std::string>());
        if (v < 0) throw InputError(path + ": unknown MRRG node '" + k.get<std::string>() + "'");
        rc.path.vertices.push_back(v);
      }
      if (!rc.path.vertices.empty()) {
        rc.path.driver = rc.path.vertices.front();
        rc.path.sink = rc.path.vertices.back();
      }
      sol.routes.push_back(std::move(rc));
    }
  }
  if (j.contains("nn") && j["nn"].is_number_integer()) sol.nn = j["nn"].get<int>();
  return sol;
}

// ---------------------------------------------------------------- commands

struct Common {
  std::string arch;
  std::string dfg;
  int ii = 1;
  std::string out;
};

int cmd_map(const Common& c, const SolverOpts& so, const std::string& format, bool timings, int max_ii) {
  if (!fs::exists(c.dfg)) throw UsageError("DFG file not found: " + c.dfg);
  if (!fs::exists(c.arch)) throw UsageError("architecture file not found: " + c.arch);
  Dfg dfg = load_dfg_file(c.dfg);
  ArchSpec spec = load_arch_file(c.arch);
  MapLimits limits = so.limits();
  NnSchedule schedule = so.nn_schedule();
  MapOutcome outcome;
  int ii = c.ii;
  if (max_ii > 0) {
    auto [best, o] = map_min_ii(dfg, spec, max_ii, schedule, limits);
    ii = best;
    outcome = std::move(o);
  } else {
    outcome = map(dfg, build_mrrg(spec, ii), schedule, limits);
  }
  Mrrg mrrg = build_mrrg(spec, ii);
  std::string text = format == "text" ? outcome_to_text(dfg, mrrg, outcome)
                                      : outcome_to_json(dfg, mrrg, outcome, timings).dump(2) + "\n";
  write_output(c.out, text);
  if (!c.out.empty() && c.out != "-") std::cerr << "status: " << map_status_name(outcome.status) << "\n";
  return exit_for(outcome.status);
}

int cmd_characterize(const std::string& arch, const std::string& suite_dir, const std::vector<std::string>& dfgs,
                     const std::string& iis_text, const SolverOpts& so, const std::string& out, const std::string& format) {
  if (!fs::exists(arch)) throw UsageError("architecture file not found: " + arch);
  ArchSpec spec = load_arch_file(arch);
  std::vector<Benchmark> suite;
  if (!suite_dir.empty()) {
    if (!fs::is_directory(suite_dir)) throw UsageError("benchmark directory not found: " + suite_dir);
    try {
      suite = load_suite(suite_dir);
    } catch (const std::runtime_error& e) {
      throw InputError(e.what());
    }
  }
  for (const auto& d : dfgs) {
    if (!fs::exists(d)) throw UsageError("DFG file not found: " + d);
    suite.push_back({fs::path(d).stem().string(), load_dfg_file(d)});
  }
  if (suite.empty()) throw UsageError("benchmark suite is empty");
  Characterization ch = characterize(spec, parse_int_list(iis_text, "II"), suite, so.nn_schedule(), so.limits());
  std::string body = format == "json" ? characterization_json(ch).dump(2) + "\n" : characterization_csv(ch);
  if (out.empty() || out == "-") {
    std::cout << body;
  } else {
    fs::create_directories(out);
    write_output((fs::path(out) / (format == "json" ? "characterize.json" : "characterize.csv")).string(), body);
    write_output((fs::path(out) / "characterize_cells.csv").string(), characterization_cells_csv(ch));
  }
  std::cerr << "suggested schedule: " << (ch.suggested ? ch.suggested->to_string() : "none (nothing mapped)") << "\n";
  return kOk;
}

int cmd_paths(const Common& c, const std::string& from, const std::string& to, int k, int nn, bool latency) {
  if (!fs::exists(c.arch)) throw UsageError("architecture file not found: " + c.arch);
  Mrrg mrrg = build_mrrg(load_arch_file(c.arch), c.ii);
  std::ostringstream os;
  if (from.empty() && to.empty()) {
    os << dump_neighbor_map(mrrg, build_neighbor_map(mrrg, nn));
  } else {
    int u = mrrg.find_key(from), v = mrrg.find_key(to);
    if (u < 0) throw UsageError("unknown MRRG node '" + from + "'");
    if (v < 0) throw UsageError("unknown MRRG node '" + to + "'");
    auto paths = k_shortest_paths(mrrg, u, v, k, latency ? PathMetric::Latency : PathMetric::Hops);
    for (std::size_t q = 0; q < paths.size(); ++q) {
      os << q << " (" << paths[q].hops() << " hops):";
      for (int w : paths[q].vertices) os << " " << mrrg.key(w);
      os << "\n";
    }
  }
  write_output(c.out, os.str());
  return kOk;
}

int cmd_export_lp(const Common& c, const SolverOpts& so, const std::string& variant_text, int nn,
                  const std::string& placement_file, bool stats_only) {
  if (!fs::exists(c.dfg)) throw UsageError("DFG file not found: " + c.dfg);
  if (!fs::exists(c.arch)) throw UsageError("architecture file not found: " + c.arch);
  Dfg dfg = load_dfg_file(c.dfg);
  Mrrg mrrg = build_mrrg(load_arch_file(c.arch), c.ii);
  MapLimits limits = so.limits();
  IlpModel model;
  if (variant_text == "generic_baseline") {
    model = build_generic(dfg, mrrg).model;
  } else {
    auto variant = variant_from_name(variant_text);
    if (!variant) throw UsageError("unknown variant '" + variant_text + "'");
    NeighborMap nmap = build_neighbor_map(mrrg, nn);
    PathCache cache(limits.path_k, limits.metric);
    ModelContext ctx(dfg, mrrg, &nmap, &cache);
    std::optional<Placement> pl;
    if (*variant == Variant::RoutingOnly) {
      if (placement_file.empty()) throw UsageError("routing_only needs --placement");
      if (!fs::exists(placement_file)) throw UsageError("placement file not found: " + placement_file);
      pl = load_placement(placement_file, dfg, mrrg);
      cache.ensure(mrrg, placement_connections(dfg, *pl));
    } else if (*variant != Variant::PlacementOnly) {
      cache.ensure(mrrg, candidate_connections(ctx));
    }
    model = build_variant(*variant, ctx, limits.params, pl ? &*pl : nullptr);
  }
  if (stats_only) write_output(c.out, format_model_stats(model_stats(model)));
  else write_output(c.out, export_lp(model));
  return kOk;
}

int cmd_bench(const std::string& suite_dir, const std::vector<std::string>& archs, int ii, int seeds,
              const SolverOpts& so, double baseline_limit, const std::string& out) {
  if (!fs::is_directory(suite_dir)) throw UsageError("benchmark directory not found: " + suite_dir);
  std::vector<Benchmark> suite;
  try {
    suite = load_suite(suite_dir);
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
  if (suite.empty()) throw UsageError("benchmark suite is empty");
  std::vector<NamedArch> named;
  for (const auto& a : archs) {
    if (!fs::exists(a)) throw UsageError("architecture file not found: " + a);
    named.push_back({fs::path(a).stem().string(), load_arch_file(a)});
  }
  std::vector<std::uint64_t> seed_list;
  for (int s = 0; s < seeds; ++s) seed_list.push_back(so.seed + static_cast<std::uint64_t>(s));
  auto runs = run_bench(suite, named, ii, seed_list, so.nn_schedule(), so.limits(), baseline_limit);
  auto rows = summarize_bench(runs);
  if (out.empty() || out == "-") {
    std::cout << bench_table_csv(rows);
  } else {
    fs::create_directories(out);
    write_output((fs::path(out) / "bench_runs.csv").string(), bench_runs_csv(runs));
    write_output((fs::path(out) / "bench_table.csv").string(), bench_table_csv(rows));
  }
  return kOk;
}

int cmd_validate(const Common& c, const std::string& mapping_file) {
  if (!fs::exists(c.dfg)) throw UsageError("DFG file not found: " + c.dfg);
  if (!fs::exists(c.arch)) throw UsageError("architecture file not found: " + c.arch);
  if (!fs::exists(mapping_file)) throw UsageError("mapping file not found: " + mapping_file);
  Dfg dfg = load_dfg_file(c.dfg);
  Mrrg mrrg = build_mrrg(load_arch_file(c.arch), c.ii);
  MappingSolution sol = load_mapping(mapping_file, dfg, mrrg);
  auto violations = validate_mapping(dfg, mrrg, sol);
  std::ostringstream os;
  for (const auto& v : violations) os << violation_kind_name(v.kind) << ": " << v.message << "\n";
  if (violations.empty()) os << "valid\n";
  write_output(c.out, os.str());
  return violations.empty() ? kOk : kNotMappable;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cgramap: connectivity-based ILP place and route for CGRAs"};
  app.require_subcommand(1);

  Common common;
  SolverOpts so;
  auto add_common = [&](CLI::App* sub, bool need_dfg) {
    sub->add_option("--arch", common.arch, "Architecture file (key=value lines)")->required();
    auto* d = sub->add_option("--dfg", common.dfg, "DFG file");
    if (need_dfg) d->required();
    sub->add_option("--ii", common.ii, "Initiation interval")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--out", common.out, "Output file (default stdout)");
  };

  auto* map_cmd = app.add_subcommand("map", "Place and route one DFG");
  add_common(map_cmd, true);
  so.add(map_cmd);
  std::string format = "json";
  bool timings = false;
  int max_ii = 0;
  map_cmd->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  map_cmd->add_flag("--timings", timings, "Include wall-clock times in the report");
  map_cmd->add_option("--max-ii", max_ii, "Search the smallest II in 1..max-ii instead of --ii")
      ->check(CLI::PositiveNumber);

  auto* ch_cmd = app.add_subcommand("characterize", "Mappability versus NN over a benchmark suite");
  std::string ch_arch, suite_dir, iis = "1", ch_out, ch_format = "csv";
  std::vector<std::string> ch_dfgs;
  ch_cmd->add_option("--arch", ch_arch, "Architecture file")->required();
  ch_cmd->add_option("--suite", suite_dir, "Directory of .dfg files");
  ch_cmd->add_option("--dfg", ch_dfgs, "Individual DFG files");
  ch_cmd->add_option("--ii", iis, "II list: '1', '1,2' or '1-3'")->capture_default_str();
  ch_cmd->add_option("--out", ch_out, "Output directory (default: CSV to stdout)");
  ch_cmd->add_option("--format", ch_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  so.add(ch_cmd);

  auto* paths_cmd = app.add_subcommand("paths", "Show k shortest paths or the neighbour map");
  add_common(paths_cmd, false);
  std::string from, to;
  int k = 20, nn = 4;
  bool latency = false;
  paths_cmd->add_option("--from", from, "Source FU key, e.g. pe_0_0.alu@0");
  paths_cmd->add_option("--to", to, "Sink FU key");
  paths_cmd->add_option("--paths", k, "Number of paths")->check(CLI::PositiveNumber)->capture_default_str();
  paths_cmd->add_option("--nn", nn, "Neighbour count for the neighbour map dump")->capture_default_str();
  paths_cmd->add_flag("--latency", latency, "Order paths by summed latency first");

  auto* lp_cmd = app.add_subcommand("export-lp", "Write a model in CPLEX LP format");
  add_common(lp_cmd, true);
  so.add(lp_cmd, false);
  std::string variant = "placement_only", placement_file;
  int lp_nn = 4;
  bool stats_only = false;
  lp_cmd->add_option("--variant", variant,
                     "placement_only, relaxed_placement, routing_only, combined or generic_baseline")
      ->capture_default_str();
  lp_cmd->add_option("--nn", lp_nn, "Target neighbour count")->check(CLI::PositiveNumber)->capture_default_str();
  lp_cmd->add_option("--placement", placement_file, "Placement for routing_only (map report or '<op> <fu>' lines)");
  lp_cmd->add_flag("--stats", stats_only, "Print constraint and variable counts instead of the LP text");

  auto* bench_cmd = app.add_subcommand("bench", "Composed method versus generic baseline runtimes");
  std::string bench_suite, bench_out;
  std::vector<std::string> bench_archs;
  int bench_ii = 1, seeds = 6;
  double baseline_limit = 600.0;
  bench_cmd->add_option("--suite", bench_suite, "Directory of .dfg files")->required();
  bench_cmd->add_option("--arch", bench_archs, "Architecture files")->required();
  bench_cmd->add_option("--ii", bench_ii, "Initiation interval")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--seeds", seeds, "Seeds per cell (from --seed upwards)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--baseline-time-limit", baseline_limit, "Generic baseline time limit in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Output directory (default: table to stdout)");
  so.add(bench_cmd);

  auto* val_cmd = app.add_subcommand("validate", "Check a map report against the DFG and architecture");
  add_common(val_cmd, true);
  std::string mapping_file;
  val_cmd->add_option("--mapping", mapping_file, "JSON map report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (map_cmd->parsed()) return cmd_map(common, so, format, timings, max_ii);
    if (ch_cmd->parsed()) return cmd_characterize(ch_arch, suite_dir, ch_dfgs, iis, so, ch_out, ch_format);
    if (paths_cmd->parsed()) return cmd_paths(common, from, to, k, nn, latency);
    if (lp_cmd->parsed()) return cmd_export_lp(common, so, variant, lp_nn, placement_file, stats_only);
    if (bench_cmd->parsed()) return cmd_bench(bench_suite, bench_archs, bench_ii, seeds, so, baseline_limit, bench_out);
    if (val_cmd->parsed()) return cmd_validate(common, mapping_file);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const ArchSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
