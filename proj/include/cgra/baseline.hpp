#pragma once

#include <stdexcept>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/ilp_model.hpp"
#include "cgra/mapping.hpp"
#include "cgra/mrrg.hpp"
#include "cgra/solver.hpp"

namespace cgra {

/// Flow-style formulation over every routing node of the MRRG.
///
/// Variables: F(o, u) as in the composed model, and R(o, n) for every op o
/// that drives a value and every routing node n ("n carries o's value").
/// Rows:
///   - FU exclusivity and must-map, as in the composed model;
///   - fanout: a used node needs a used routing fanout or a fanout FU that
///     hosts one of the value's sinks;
///   - fanin: a used node needs a used routing fanin or a fanin FU hosting o;
///   - source: o on u needs a used routing fanout of u;
///   - sink: p on v needs a used routing fanin of v for each driver of p;
///   - presence: a placed sink op needs its driver op placed;
///   - routing exclusivity: one value per routing node.
/// Loops detached from the driver can satisfy the local rows, so solve_generic
/// adds connectivity cuts lazily until every sink is reached.
struct BaselineModel {
  IlpModel model;
  const Dfg* dfg = nullptr;
  const Mrrg* mrrg = nullptr;
  std::vector<int> nets;  // ops that drive at least one sink
};

BaselineModel build_generic(const Dfg& dfg, const Mrrg& mrrg);

class BaselineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Placement from the F values and one route per (driver, sink) pair inside
/// the value's marked node set. Throws BaselineError when a sink is not
/// connected (the caller should have added cuts first).
MappingSolution extract_mapping(const BaselineModel& bm, const std::vector<std::uint8_t>& assignment);

/// For each value whose placed sinks are not reached from the driver through
/// marked nodes, a cut that forbids this disconnection. Empty when connected.
std::vector<LinearConstraint> connectivity_cuts(const BaselineModel& bm, const std::vector<std::uint8_t>& assignment);

struct BaselineResult {
  SolveResult solve;
  std::optional<MappingSolution> mapping;
  int cut_rounds = 0;
  int cuts = 0;
};

/// Solves with lazy connectivity cuts; the mapping is set when feasible.
BaselineResult solve_generic(const BaselineModel& bm, const SolveConfig& cfg);

}  // namespace cgra
