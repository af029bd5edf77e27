#include "cgra/mapper.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "cgra/neighbors.hpp"

namespace cgra {

// ---------------------------------------------------------------- schedule

NnSchedule NnSchedule::generic() {
  NnSchedule s;
  for (int nn = 4; nn <= 24; nn += 2) s.values.push_back(nn);
  return s;
}

namespace {

int parse_int(std::string_view s) {
  std::string t(s);
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad NN value '" + t + "'");
  }
  if (used != t.size()) throw std::invalid_argument("bad NN value '" + t + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

}  // namespace

NnSchedule NnSchedule::parse(std::string_view text) {
  NnSchedule s;
  if (text.find(':') != std::string_view::npos) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument("schedule range must be start:end:step");
    int a = parse_int(parts[0]), b = parse_int(parts[1]), step = parse_int(parts[2]);
    if (step <= 0) throw std::invalid_argument("schedule step must be positive");
    for (int nn = a; nn <= b; nn += step) s.values.push_back(nn);
  } else {
    for (auto p : split(text, ','))
      if (!p.empty()) s.values.push_back(parse_int(p));
  }
  s.validate();
  return s;
}

void NnSchedule::validate() const {
  if (values.empty()) throw std::invalid_argument("NN schedule is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= 0) throw std::invalid_argument("NN values must be positive");
    if (i && values[i] <= values[i - 1]) throw std::invalid_argument("NN schedule must be strictly increasing");
  }
}

std::string NnSchedule::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

std::string_view map_status_name(MapStatus s) {
  switch (s) {
    case MapStatus::Mapped: return "mapped";
    case MapStatus::NotMappable: return "not_mappable";
    case MapStatus::TimedOut: return "timed_out";
  }
  return "?";
}

// ---------------------------------------------------------------- screens

std::optional<std::string> screen_instance(const Dfg& dfg, const Mrrg& mrrg) {
  std::vector<bool> needed = fanin_cone(dfg, cover_set(dfg));
  std::vector<std::vector<int>> compat(dfg.size());
  for (int o = 0; o < dfg.size(); ++o) {
    if (!needed[o]) continue;
    compat[o] = compatible_nodes(mrrg, dfg.ops()[o].opcode);
    if (compat[o].empty())
      return "operation '" + dfg.ops()[o].id + "' (" + std::string(opcode_name(dfg.ops()[o].opcode)) +
             ") has no compatible functional unit";
  }
  // Kuhn's augmenting paths: every needed op must get its own FU.
  std::vector<int> owner(mrrg.size(), -1);
  std::vector<int> stamp(mrrg.size(), -1);
  std::function<bool(int, int)> augment = [&](int o, int round) {
    for (int u : compat[o]) {
      if (stamp[u] == round) continue;
      stamp[u] = round;
      if (owner[u] < 0 || augment(owner[u], round)) {
        owner[u] = o;
        return true;
      }
    }
    return false;
  };
  for (int o = 0; o < dfg.size(); ++o)
    if (needed[o] && !augment(o, o))
      return "no one-to-one assignment of operations to compatible functional units exists";
  return std::nullopt;
}

// ---------------------------------------------------------------- map

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Budget {
  Clock::time_point end;
  double per_solve;
  double remaining() const { return std::chrono::duration<double>(end - Clock::now()).count(); }
  bool expired() const { return Clock::now() >= end; }
  SolveConfig config(std::uint64_t seed, int limit = 1) const {
    SolveConfig c;
    c.seed = seed;
    c.time_limit = std::max(1e-3, std::min(per_solve, remaining()));
    c.solution_limit = limit;
    return c;
  }
};

SolveResult run_solve(const IlpModel& model, const SolveConfig& cfg, const MapLimits& limits) {
  if (!limits.external_solver.empty() && !model.infeasible_by_construction())
    return solve_external(model, limits.external_solver, cfg);
  return solve(model, cfg);
}

/// Relaxed placements one at a time, through the built-in stream or by
/// re-solving an external model with accumulated no-good rows.
class PlacementSource {
 public:
  PlacementSource(const IlpModel& model, const SolveConfig& cfg, const MapLimits& limits)
      : model_(model), cfg_(cfg), limits_(limits) {
    if (limits.external_solver.empty()) stream_.emplace(model, cfg);
    else external_model_ = model;
  }

  std::optional<SolveResult> next() {
    if (stream_) {
      auto r = stream_->next();
      if (!r) status_ = stream_->end_status();
      return r;
    }
    if (done_ || produced_ >= cfg_.solution_limit) return std::nullopt;
    SolveResult r = run_solve(external_model_, cfg_, limits_);
    if (!r.feasible()) {
      done_ = true;
      status_ = r.status;
      return std::nullopt;
    }
    ++produced_;
    LinearConstraint nogood;
    nogood.rel = Relation::Ge;
    nogood.tag = ConstraintTag::Cut;
    nogood.rhs = 1;
    for (int v : external_model_.vars_of(VarClass::F)) {
      if (r.assignment[v]) {
        nogood.terms.push_back({-1, v});
        nogood.rhs -= 1;
      } else {
        nogood.terms.push_back({1, v});
      }
    }
    external_model_.add_constraint(std::move(nogood));
    r.assignment.resize(model_.var_count());
    return r;
  }

  SolveStatus end_status() const { return status_; }

 private:
  const IlpModel& model_;
  SolveConfig cfg_;
  const MapLimits& limits_;
  std::optional<SolutionStream> stream_;
  IlpModel external_model_;
  int produced_ = 0;
  bool done_ = false;
  SolveStatus status_ = SolveStatus::Feasible;
};

Placement placement_from(const IlpModel& model, const std::vector<std::uint8_t>& a, int ops) {
  Placement pl(ops, -1);
  for (int v : model.vars_of(VarClass::F))
    if (a[v]) pl[model.var(v).a] = model.var(v).b;
  return pl;
}

MappingSolution solution_from_routing(const Dfg& dfg, const PathCache& cache, const IlpModel& routing,
                                      const std::vector<std::uint8_t>& a, const Placement& pl) {
  MappingSolution sol;
  sol.placement = pl;
  for (const auto& pr : dfg.pairs()) {
    int u = pl[pr.driver], v = pl[pr.sink];
    if (u < 0 || v < 0) continue;
    const auto* paths = cache.find(u, v);
    for (int q = 0; paths; ++q) {
      int idx = routing.find(VarId::p(u, v, q));
      if (idx < 0) break;
      if (a[idx]) {
        sol.routes.push_back({pr.driver, pr.sink, (*paths)[q]});
        break;
      }
    }
  }
  return sol;
}

}  // namespace

MapOutcome map(const Dfg& dfg, const Mrrg& mrrg, const NnSchedule& schedule, const MapLimits& limits) {
  schedule.validate();
  if (limits.placement_limit < 1) throw std::invalid_argument("placement limit must be at least 1");
  if (!(limits.solve_time_limit > 0) || !(limits.total_budget > 0))
    throw std::invalid_argument("time limits must be positive");
  auto t_start = Clock::now();
  Budget budget{Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(std::min(limits.total_budget, 1e9))),
                limits.solve_time_limit};
  MapOutcome out;
  out.ii = mrrg.ii();
  if (auto why = screen_instance(dfg, mrrg)) {
    out.status = MapStatus::NotMappable;
    out.message = *why;
    return out;
  }

  MappingStats stats;
  PathCache cache(limits.path_k, limits.metric);
  bool any_timeout = false;
  for (int nn : schedule.values) {
    if (budget.expired()) {
      any_timeout = true;
      break;
    }
    NnAttempt att;
    att.nn = nn;
    auto t_nn = Clock::now();

    auto t0 = Clock::now();
    NeighborMap nmap = build_neighbor_map(mrrg, nn);
    stats.neighbor_seconds += since(t0);
    att.neighbor_total = nmap.total();

    ModelContext ctx(dfg, mrrg, &nmap, &cache);
    t0 = Clock::now();
    IlpModel po = build_variant(Variant::PlacementOnly, ctx, limits.params);
    att.placement_only_vars = po.var_count();
    att.placement_only_rows = static_cast<int>(po.constraints().size());
    SolveResult screen = run_solve(po, budget.config(limits.seed), limits);
    stats.placement_seconds += since(t0);
    ++stats.placement_screens;
    att.placement_only = std::string(solve_status_name(screen.status));
    if (screen.status != SolveStatus::Feasible) {
      att.timed_out = screen.status == SolveStatus::TimedOut;
      any_timeout |= att.timed_out;
      att.seconds = since(t_nn);
      out.log.push_back(att);
      continue;
    }

    t0 = Clock::now();
    cache.ensure(mrrg, candidate_connections(ctx));
    stats.path_seconds += since(t0);

    t0 = Clock::now();
    IlpModel relaxed = build_variant(Variant::RelaxedPlacement, ctx, limits.params);
    att.relaxed_vars = relaxed.var_count();
    att.relaxed_rows = static_cast<int>(relaxed.constraints().size());
    PlacementSource source(relaxed, budget.config(limits.seed, limits.placement_limit), limits);
    stats.placement_seconds += since(t0);

    for (;;) {
      if (budget.expired()) {
        att.timed_out = true;
        break;
      }
      t0 = Clock::now();
      auto pr = source.next();
      stats.placement_seconds += since(t0);
      if (!pr) {
        att.placements_exhausted = source.end_status() == SolveStatus::Infeasible;
        att.timed_out |= source.end_status() == SolveStatus::TimedOut;
        break;
      }
      ++att.placements_tried;
      Placement pl = placement_from(relaxed, pr->assignment, dfg.size());

      t0 = Clock::now();
      IlpModel routing = build_variant(Variant::RoutingOnly, ctx, limits.params, &pl);
      SolveResult rr = run_solve(routing, budget.config(limits.seed), limits);
      stats.routing_seconds += since(t0);
      ++att.routing_calls;
      if (rr.status == SolveStatus::TimedOut) {
        att.timed_out = true;
        continue;
      }
      if (!rr.feasible()) continue;

      MappingSolution sol = solution_from_routing(dfg, cache, routing, rr.assignment, pl);
      auto violations = validate_mapping(dfg, mrrg, sol);
      if (!violations.empty())
        throw std::logic_error("internal error: mapping fails validation: " + violations.front().message);
      att.mapped = true;
      att.seconds = since(t_nn);
      out.log.push_back(att);
      stats.placements_tried += att.placements_tried;
      stats.routing_calls += att.routing_calls;
      stats.total_seconds = since(t_start);
      sol.nn = nn;
      sol.stats = stats;
      out.solution = std::move(sol);
      out.status = MapStatus::Mapped;
      return out;
    }
    any_timeout |= att.timed_out;
    stats.placements_tried += att.placements_tried;
    stats.routing_calls += att.routing_calls;
    att.seconds = since(t_nn);
    out.log.push_back(att);
  }
  out.status = any_timeout ? MapStatus::TimedOut : MapStatus::NotMappable;
  if (any_timeout) out.message = "time limit reached before the schedule was decided";
  return out;
}

std::pair<int, MapOutcome> map_min_ii(const Dfg& dfg, const ArchSpec& spec, int max_ii, const NnSchedule& schedule,
                                      const MapLimits& limits) {
  if (max_ii < 1) throw std::invalid_argument("max II must be at least 1");
  MapOutcome last;
  for (int ii = 1; ii <= max_ii; ++ii) {
    Mrrg mrrg = build_mrrg(spec, ii);
    last = map(dfg, mrrg, schedule, limits);
    if (last.status == MapStatus::Mapped) return {ii, std::move(last)};
  }
  return {max_ii, std::move(last)};
}

// ---------------------------------------------------------------- suites

std::vector<Benchmark> load_suite(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("benchmark directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".dfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Benchmark> out;
  for (const auto& f : files) {
    try {
      out.push_back({f.stem().string(), load_dfg(f.string())});
    } catch (const DfgParseError& e) {
      throw std::runtime_error(f.string() + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                               ": " + e.what());
    }
  }
  return out;
}

Characterization characterize(const ArchSpec& spec, const std::vector<int>& iis, const std::vector<Benchmark>& suite,
                              const NnSchedule& schedule, const MapLimits& limits) {
  schedule.validate();
  if (suite.empty()) throw std::invalid_argument("benchmark suite is empty");
  if (iis.empty()) throw std::invalid_argument("II list is empty");
  Characterization ch;
  std::vector<Mrrg> mrrgs;
  for (int ii : iis) mrrgs.push_back(build_mrrg(spec, ii));
  const int ncells = static_cast<int>(suite.size() * iis.size());
  ch.cells.resize(ncells);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < ncells; ++c) {
    const auto& b = suite[c / iis.size()];
    const int k = c % static_cast<int>(iis.size());
    CharacterizeCell cell{b.name, iis[k], std::nullopt, false, 0.0};
    auto t0 = Clock::now();
    for (int nn : schedule.values) {
      MapOutcome o = map(b.dfg, mrrgs[k], NnSchedule{{nn}}, limits);
      if (o.status == MapStatus::Mapped) {
        cell.first_nn = nn;
        break;
      }
      if (o.status == MapStatus::TimedOut) cell.timed_out = true;
      if (!o.message.empty() && o.log.empty() && o.status == MapStatus::NotMappable) break;  // screened out
    }
    cell.seconds = since(t0);
    ch.cells[c] = std::move(cell);
  }
  for (int nn : schedule.values) {
    CharacterizeRow row{nn, 0, ncells, 0.0};
    for (const auto& cell : ch.cells)
      if (cell.first_nn && *cell.first_nn <= nn) ++row.mapped;
    row.fraction = static_cast<double>(row.mapped) / row.total;
    ch.rows.push_back(row);
  }
  std::optional<int> first;
  for (const auto& cell : ch.cells)
    if (cell.first_nn && (!first || *cell.first_nn < *first)) first = cell.first_nn;
  if (first) {
    NnSchedule s;
    for (int nn = *first; nn <= schedule.values.back(); nn += 2) s.values.push_back(nn);
    ch.suggested = s;
  }
  return ch;
}

}  // namespace cgra
