#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/ilp_model.hpp"
#include "cgra/mrrg.hpp"
#include "cgra/paths.hpp"

namespace cgra {

/// The route carrying the value of `driver_op` into `sink_op`.
struct RoutedConnection {
  int driver_op = -1;
  int sink_op = -1;
  RoutePath path;

  bool operator==(const RoutedConnection&) const = default;
};

struct MappingStats {
  int placements_tried = 0;
  int routing_calls = 0;
  int placement_screens = 0;
  double neighbor_seconds = 0.0;
  double path_seconds = 0.0;
  double placement_seconds = 0.0;
  double routing_seconds = 0.0;
  double total_seconds = 0.0;
};

struct MappingSolution {
  Placement placement;                  // op index -> FU node, -1 if unplaced
  std::vector<RoutedConnection> routes;  // one per distinct (driver op, sink op) pair
  int nn = 0;
  MappingStats stats;
};

enum class ViolationKind {
  Shape,          // placement vector of the wrong size, bad node index
  Unplaced,       // an op that must be placed is not
  Incompatible,   // op on an FU that cannot execute it
  Exclusivity,    // two ops on one FU
  MissingRoute,   // placed sink without a route from its driver
  Endpoint,       // route endpoints differ from the placement
  MissingEdge,    // consecutive route vertices not joined by an MRRG edge
  InteriorFu,     // route passes through a functional unit
  NotSimple,      // route repeats a vertex
  Short,          // routes of different driver FUs share a vertex
};

std::string_view violation_kind_name(ViolationKind k);

struct MappingViolation {
  ViolationKind kind;
  std::string message;
};

/// Checks a mapping by direct traversal of the DFG and MRRG only.
std::vector<MappingViolation> validate_mapping(const Dfg& dfg, const Mrrg& mrrg, const MappingSolution& sol);

}  // namespace cgra
