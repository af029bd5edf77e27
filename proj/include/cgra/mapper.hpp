#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/ilp_model.hpp"
#include "cgra/mapping.hpp"
#include "cgra/mrrg.hpp"
#include "cgra/paths.hpp"
#include "cgra/solver.hpp"

namespace cgra {

/// Strictly increasing target neighbour counts.
struct NnSchedule {
  std::vector<int> values;

  /// 4, 6, ..., 24.
  static NnSchedule generic();
  /// "4,6,8" or "start:end:step" (inclusive end).
  static NnSchedule parse(std::string_view text);
  /// Throws std::invalid_argument when empty, non-positive or not increasing.
  void validate() const;
  std::string to_string() const;
};

struct MapLimits {
  int placement_limit = 100;
  double solve_time_limit = 60.0;  // per ILP solve
  double total_budget = 600.0;     // per map() call
  std::uint64_t seed = 0;
  int path_k = 20;
  PathMetric metric = PathMetric::Hops;
  ModelParams params;            // paths_per_connection, overuse_limit, ...
  std::string external_solver;   // command template; empty = built-in solver
};

enum class MapStatus { Mapped, NotMappable, TimedOut };
std::string_view map_status_name(MapStatus s);

/// What happened at one NN of the schedule.
struct NnAttempt {
  int nn = 0;
  std::size_t neighbor_total = 0;
  std::string placement_only;  // solve status name
  int placement_only_vars = 0;
  int placement_only_rows = 0;
  int relaxed_vars = 0;
  int relaxed_rows = 0;
  int placements_tried = 0;
  int routing_calls = 0;
  bool placements_exhausted = false;
  bool timed_out = false;
  bool mapped = false;
  double seconds = 0.0;
};

struct MapOutcome {
  MapStatus status = MapStatus::NotMappable;
  std::optional<MappingSolution> solution;
  std::vector<NnAttempt> log;
  int ii = 0;
  std::string message;  // e.g. the pre-screen that ruled the instance out
};

/// Pre-search screens: an op without compatible FUs, or no injective
/// op-to-FU assignment at all. Returns a reason when mapping is impossible.
std::optional<std::string> screen_instance(const Dfg& dfg, const Mrrg& mrrg);

/// Composition algorithm: per NN, placement-only screen, then up to
/// placement_limit relaxed placements, each checked by routing-only.
MapOutcome map(const Dfg& dfg, const Mrrg& mrrg, const NnSchedule& schedule, const MapLimits& limits);

/// Smallest II in [1, max_ii] that maps; otherwise the outcome at max_ii.
std::pair<int, MapOutcome> map_min_ii(const Dfg& dfg, const ArchSpec& spec, int max_ii, const NnSchedule& schedule,
                                      const MapLimits& limits);

struct Benchmark {
  std::string name;
  Dfg dfg;
};

/// Loads every *.dfg of a directory, sorted by file name.
std::vector<Benchmark> load_suite(const std::string& dir);

struct CharacterizeCell {
  std::string benchmark;
  int ii = 0;
  std::optional<int> first_nn;  // smallest schedule NN that maps
  bool timed_out = false;       // some NN attempt ran out of time
  double seconds = 0.0;
};

struct CharacterizeRow {
  int nn = 0;
  int mapped = 0;
  int total = 0;
  double fraction = 0.0;
};

struct Characterization {
  std::vector<CharacterizeCell> cells;  // benchmark-major, then II
  std::vector<CharacterizeRow> rows;    // one per schedule NN
  std::optional<NnSchedule> suggested;  // first success NN, step 2, up to the max
};

/// For each (benchmark, II) cell the first NN at which the single-NN map
/// succeeds; a cell counts as mappable at every NN from there on. Cells run
/// in parallel; results are ordered deterministically.
Characterization characterize(const ArchSpec& spec, const std::vector<int>& iis, const std::vector<Benchmark>& suite,
                              const NnSchedule& schedule, const MapLimits& limits);

}  // namespace cgra
