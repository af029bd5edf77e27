#pragma once

#include <string>
#include <vector>

#include "cgra/mrrg.hpp"

namespace cgra {

/// Edge directions followed by the neighbour search. Forward matches the
/// "reachable from u" reading used by the placement constraints; Bidirectional
/// is kept for experimentation.
enum class Traversal { Forward, Bidirectional };

/// Per-FU neighbour sets for one target neighbour count.
struct NeighborMap {
  int target_nn = 0;
  Traversal traversal = Traversal::Forward;
  /// Indexed by MRRG node; entries for routing nodes stay empty. Each list is
  /// sorted in key order.
  std::vector<std::vector<int>> neighbors;

  const std::vector<int>& of(int fu) const { return neighbors[fu]; }
  bool contains(int u, int v) const;
  std::size_t total() const;

  bool operator==(const NeighborMap&) const = default;
};

/// Wave-synchronous BFS from `source`. FU nodes are recorded when reached and
/// are not expanded further (values cannot pass through a functional unit).
/// After each whole wave the search stops once at least `target_nn` FUs have
/// been found, returning all of them. The source is only included when a cycle
/// leads back to it.
std::vector<int> find_neighbors(const Mrrg& mrrg, int source, int target_nn,
                                Traversal traversal = Traversal::Forward);

/// find_neighbors for every FU, parallelised over sources.
NeighborMap build_neighbor_map(const Mrrg& mrrg, int target_nn, Traversal traversal = Traversal::Forward);

/// Single-threaded reference for build_neighbor_map.
NeighborMap build_neighbor_map_serial(const Mrrg& mrrg, int target_nn,
                                      Traversal traversal = Traversal::Forward);

/// One line per FU: "u: v1 v2 ...".
std::string dump_neighbor_map(const Mrrg& mrrg, const NeighborMap& nmap);

}  // namespace cgra
