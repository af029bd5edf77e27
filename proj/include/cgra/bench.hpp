#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgra/mapper.hpp"

namespace cgra {

/// One timed run of one method on one (benchmark, architecture, II, seed) cell.
struct BenchRun {
  std::string benchmark;
  std::string arch;
  int ii = 1;
  std::uint64_t seed = 0;
  std::string method;  // "composed" or "baseline"
  std::string status;  // map_status_name values
  double seconds = 0.0;
  bool censored = false;  // timed out; seconds is the limit
  std::optional<int> nn;  // composed method only
};

struct BenchRow {
  std::string benchmark;  // "*" for per-architecture summary rows
  std::string arch;
  int runs = 0;
  double composed_geomean = 0.0;
  double baseline_geomean = 0.0;
  double composed_max = 0.0;
  double baseline_max = 0.0;
  std::optional<double> median_nn;
  std::string composed_status;
  std::string baseline_status;
  bool agree = true;
};

struct NamedArch {
  std::string name;
  ArchSpec spec;
};

/// Runs both methods for every cell and seed. Cells run in parallel; the
/// returned order is benchmark, architecture, method, seed.
std::vector<BenchRun> run_bench(const std::vector<Benchmark>& suite, const std::vector<NamedArch>& archs, int ii,
                                const std::vector<std::uint64_t>& seeds, const NnSchedule& schedule,
                                const MapLimits& limits, double baseline_time_limit);

/// Per (benchmark, arch) rows followed by per-arch summary rows whose means
/// are geometric means over the per-benchmark geometric means.
std::vector<BenchRow> summarize_bench(const std::vector<BenchRun>& runs);

double geometric_mean(const std::vector<double>& xs);

std::string bench_runs_csv(const std::vector<BenchRun>& runs);
std::string bench_table_csv(const std::vector<BenchRow>& rows);

/// Parses bench_runs_csv output (for recomputing a table from raw logs).
std::vector<BenchRun> parse_bench_runs_csv(const std::string& text);

}  // namespace cgra
