#include "cgra/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cgra/baseline.hpp"

namespace cgra {

namespace {

// Runtimes below this floor are clamped so geometric means stay finite.
constexpr double kMinSeconds = 1e-6;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string consensus(const std::vector<std::string>& statuses) {
  std::set<std::string> s(statuses.begin(), statuses.end());
  if (s.empty()) return "";
  return s.size() == 1 ? *s.begin() : "mixed";
}

}  // namespace

double geometric_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += std::log(std::max(x, kMinSeconds));
  return std::exp(acc / static_cast<double>(xs.size()));
}

std::vector<BenchRun> run_bench(const std::vector<Benchmark>& suite, const std::vector<NamedArch>& archs, int ii,
                                const std::vector<std::uint64_t>& seeds, const NnSchedule& schedule,
                                const MapLimits& limits, double baseline_time_limit) {
  if (suite.empty()) throw std::invalid_argument("benchmark suite is empty");
  if (archs.empty()) throw std::invalid_argument("architecture list is empty");
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  std::vector<Mrrg> mrrgs;
  for (const auto& a : archs) mrrgs.push_back(build_mrrg(a.spec, ii));

  const int nb = static_cast<int>(suite.size()), na = static_cast<int>(archs.size()),
            ns = static_cast<int>(seeds.size());
  const int ncells = nb * na * 2 * ns;
  std::vector<BenchRun> runs(ncells);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < ncells; ++c) {
    int s = c % ns, m = (c / ns) % 2, a = (c / ns / 2) % na, b = c / ns / 2 / na;
    BenchRun run;
    run.benchmark = suite[b].name;
    run.arch = archs[a].name;
    run.ii = ii;
    run.seed = seeds[s];
    auto t0 = std::chrono::steady_clock::now();
    if (m == 0) {
      run.method = "composed";
      MapLimits lim = limits;
      lim.seed = seeds[s];
      MapOutcome o = map(suite[b].dfg, mrrgs[a], schedule, lim);
      run.status = std::string(map_status_name(o.status));
      if (o.solution) run.nn = o.solution->nn;
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      run.censored = o.status == MapStatus::TimedOut;
      if (run.censored) run.seconds = std::max(run.seconds, limits.total_budget);
    } else {
      run.method = "baseline";
      SolveConfig cfg;
      cfg.seed = seeds[s];
      cfg.time_limit = baseline_time_limit;
      BaselineModel bm = build_generic(suite[b].dfg, mrrgs[a]);
      BaselineResult r = solve_generic(bm, cfg);
      run.status = r.solve.status == SolveStatus::Feasible     ? std::string(map_status_name(MapStatus::Mapped))
                   : r.solve.status == SolveStatus::Infeasible ? std::string(map_status_name(MapStatus::NotMappable))
                                                               : std::string(map_status_name(MapStatus::TimedOut));
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      run.censored = r.solve.status == SolveStatus::TimedOut;
      if (run.censored) run.seconds = std::max(run.seconds, baseline_time_limit);
    }
    runs[c] = std::move(run);
  }
  return runs;
}

std::vector<BenchRow> summarize_bench(const std::vector<BenchRun>& runs) {
  struct Acc {
    std::vector<double> comp, base;
    std::vector<std::string> comp_status, base_status;
    std::vector<int> nns;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, Acc> cells;
  for (const auto& r : runs) {
    auto key = std::make_pair(r.benchmark, r.arch);
    if (!cells.count(key)) order.push_back(key);
    Acc& acc = cells[key];
    if (r.method == "composed") {
      acc.comp.push_back(r.seconds);
      acc.comp_status.push_back(r.status);
      if (r.nn) acc.nns.push_back(*r.nn);
    } else {
      acc.base.push_back(r.seconds);
      acc.base_status.push_back(r.status);
    }
  }
  auto median = [](std::vector<double> v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  };
  std::vector<BenchRow> rows;
  std::vector<std::string> arch_order;
  for (const auto& key : order) {
    const Acc& acc = cells[key];
    BenchRow row;
    row.benchmark = key.first;
    row.arch = key.second;
    row.runs = static_cast<int>(std::max(acc.comp.size(), acc.base.size()));
    row.composed_geomean = geometric_mean(acc.comp);
    row.baseline_geomean = geometric_mean(acc.base);
    row.composed_max = acc.comp.empty() ? 0.0 : *std::max_element(acc.comp.begin(), acc.comp.end());
    row.baseline_max = acc.base.empty() ? 0.0 : *std::max_element(acc.base.begin(), acc.base.end());
    row.median_nn = median(std::vector<double>(acc.nns.begin(), acc.nns.end()));
    row.composed_status = consensus(acc.comp_status);
    row.baseline_status = consensus(acc.base_status);
    const std::string timed = std::string(map_status_name(MapStatus::TimedOut));
    row.agree = row.composed_status == row.baseline_status || row.composed_status == timed ||
                row.baseline_status == timed;
    rows.push_back(row);
    if (std::find(arch_order.begin(), arch_order.end(), key.second) == arch_order.end())
      arch_order.push_back(key.second);
  }
  std::vector<BenchRow> summary;
  for (const auto& arch : arch_order) {
    std::vector<double> comp, base, nns;
    BenchRow s;
    s.benchmark = "*";
    s.arch = arch;
    for (const auto& r : rows) {
      if (r.arch != arch) continue;
      comp.push_back(r.composed_geomean);
      base.push_back(r.baseline_geomean);
      s.composed_max = std::max(s.composed_max, r.composed_max);
      s.baseline_max = std::max(s.baseline_max, r.baseline_max);
      if (r.median_nn) nns.push_back(*r.median_nn);
      s.runs += r.runs;
      s.agree = s.agree && r.agree;
    }
    s.composed_geomean = geometric_mean(comp);
    s.baseline_geomean = geometric_mean(base);
    s.median_nn = median(nns);
    summary.push_back(s);
  }
  rows.insert(rows.end(), summary.begin(), summary.end());
  return rows;
}

std::string bench_runs_csv(const std::vector<BenchRun>& runs) {
  std::ostringstream os;
  os << "benchmark,arch,ii,seed,method,status,seconds,censored,nn\n";
  for (const auto& r : runs)
    os << r.benchmark << ',' << r.arch << ',' << r.ii << ',' << r.seed << ',' << r.method << ',' << r.status << ','
       << num(r.seconds) << ',' << (r.censored ? 1 : 0) << ',' << (r.nn ? std::to_string(*r.nn) : "") << '\n';
  return os.str();
}

std::string bench_table_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "benchmark,arch,runs,composed_geomean_s,baseline_geomean_s,composed_max_s,baseline_max_s,median_nn,"
        "composed_status,baseline_status,agree\n";
  for (const auto& r : rows)
    os << r.benchmark << ',' << r.arch << ',' << r.runs << ',' << num(r.composed_geomean) << ','
       << num(r.baseline_geomean) << ',' << num(r.composed_max) << ',' << num(r.baseline_max) << ','
       << (r.median_nn ? num(*r.median_nn) : "") << ',' << r.composed_status << ',' << r.baseline_status << ','
       << (r.agree ? 1 : 0) << '\n';
  return os.str();
}

std::vector<BenchRun> parse_bench_runs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<BenchRun> runs;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.push_back("");
    if (f.size() != 9) throw std::runtime_error("bench log row has " + std::to_string(f.size()) + " fields");
    BenchRun r;
    r.benchmark = f[0];
    r.arch = f[1];
    r.ii = std::stoi(f[2]);
    r.seed = std::stoull(f[3]);
    r.method = f[4];
    r.status = f[5];
    r.seconds = std::stod(f[6]);
    r.censored = f[7] == "1";
    if (!f[8].empty()) r.nn = std::stoi(f[8]);
    runs.push_back(std::move(r));
  }
  return runs;
}

}  // namespace cgra
