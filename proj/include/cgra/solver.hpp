#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cgra/ilp_model.hpp"

namespace cgra {

enum class SolveMode { Feasibility, Optimize };

struct SolveConfig {
  std::uint64_t seed = 0;
  double time_limit = 60.0;  // seconds
  SolveMode mode = SolveMode::Feasibility;
  int solution_limit = 1;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class SolveStatus { Feasible, Infeasible, TimedOut };

std::string_view solve_status_name(SolveStatus s);

struct SolveStats {
  std::int64_t nodes = 0;  // branching decisions
  std::int64_t conflicts = 0;
  std::int64_t propagations = 0;
  double seconds = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  /// Model-indexed 0/1 values. Set when Feasible, and on TimedOut in optimize
  /// mode when an incumbent exists.
  std::vector<std::uint8_t> assignment;
  std::optional<std::int64_t> objective;
  bool optimal = false;  // optimize mode: objective proven minimal
  SolveStats stats;
  std::string message;

  bool feasible() const { return status == SolveStatus::Feasible; }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Deadline = std::chrono::steady_clock::time_point;
Deadline deadline_after(double seconds);

/// Conflict-driven pseudo-boolean search over a model's rows. Rows can be
/// added between calls to solve(); learned clauses are kept.
class IncrementalSolver {
 public:
  IncrementalSolver(const IlpModel& model, std::uint64_t seed);
  ~IncrementalSolver();
  IncrementalSolver(const IncrementalSolver&) = delete;
  IncrementalSolver& operator=(const IncrementalSolver&) = delete;

  /// Terms index the model's variables. Returns false once the rows are
  /// unsatisfiable at the root.
  bool add_constraint(const LinearConstraint& c);
  /// At least one of the literals holds: (var, wanted value) pairs.
  bool add_clause(const std::vector<std::pair<int, bool>>& lits);

  /// Feasible (assignment filled), Infeasible, or TimedOut.
  SolveResult solve(Deadline deadline);

  const SolveStats& stats() const;

 private:
  struct Engine;
  std::unique_ptr<Engine> engine_;
  const IlpModel& model_;
};

/// Exact feasibility or minimisation. Deterministic for a fixed (model, seed).
/// Feasible assignments are re-checked against every row.
SolveResult solve(const IlpModel& model, const SolveConfig& cfg);

/// Runs one solve per seed concurrently and returns the decisive result of the
/// lowest seed (TimedOut only if every seed timed out).
SolveResult solve_portfolio(const IlpModel& model, const SolveConfig& cfg, const std::vector<std::uint64_t>& seeds);

/// Successive distinct solutions. After each one a no-good clause over the
/// projection classes (default F) excludes the same projected assignment.
class SolutionStream {
 public:
  SolutionStream(const IlpModel& model, const SolveConfig& cfg, std::vector<VarClass> projection = {VarClass::F});

  /// Next solution, or nullopt once exhausted, out of time, or at the limit.
  std::optional<SolveResult> next();
  /// Infeasible once exhausted, TimedOut if the clock ran out, Feasible while
  /// more solutions may exist (including when the limit was reached).
  SolveStatus end_status() const { return end_; }
  int produced() const { return produced_; }
  const SolveStats& stats() const { return solver_.stats(); }

 private:
  const IlpModel& model_;
  SolveConfig cfg_;
  std::vector<int> projection_;
  IncrementalSolver solver_;
  Deadline deadline_;
  int produced_ = 0;
  bool done_ = false;
  SolveStatus end_ = SolveStatus::Feasible;
};

std::vector<SolveResult> enumerate_solutions(const IlpModel& model, const SolveConfig& cfg,
                                             std::vector<VarClass> projection = {VarClass::F});

// ---------------------------------------------------------------- LP files

/// CPLEX LP text: objective, constraints, binaries. Byte-stable for equal models.
std::string export_lp(const IlpModel& model);

class LpParseError : public std::runtime_error {
 public:
  LpParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Reads the binary-only subset of the LP format that export_lp writes (and
/// common variations of it). Variables become VarClass::X in Binaries order.
IlpModel import_lp(std::string_view text);

/// Parses a `<var> <value>` solution file. An optional first line
/// `status <word>` carries infeasible / timeout verdicts.
struct ExternalSolution {
  std::string status;  // "optimal", "feasible", "infeasible", "timeout", or empty
  std::vector<std::pair<std::string, double>> values;
};
ExternalSolution parse_solution_file(std::string_view text);

/// Runs `command_template` with {lp}, {sol}, {time} and {seed} replaced, then
/// reads and re-validates the solution. Throws SolverError on launch failure,
/// unparsable output, or an assignment that violates the model.
SolveResult solve_external(const IlpModel& model, const std::string& command_template, const SolveConfig& cfg);

/// Turns an external solution into a checked SolveResult (exposed for tests).
SolveResult interpret_external_solution(const IlpModel& model, const ExternalSolution& sol, const SolveConfig& cfg);

}  // namespace cgra
