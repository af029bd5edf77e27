#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cgra/mrrg.hpp"
#include "cgra/neighbors.hpp"

namespace cgra {

/// A cycle-free MRRG path from one FU to another (or back to itself). Interior
/// vertices are routing nodes.
struct RoutePath {
  int driver = -1;
  int sink = -1;
  std::vector<int> vertices;

  int hops() const { return static_cast<int>(vertices.size()) - 1; }
  /// Vertices strictly between driver and sink, sorted.
  std::vector<int> interior_sorted() const;

  bool operator==(const RoutePath&) const = default;
};

enum class PathMetric {
  Hops,     // edge count
  Latency,  // summed source-node latency, then edge count
};

/// Minimal adjacency view used by the path search.
struct Digraph {
  std::vector<std::vector<int>> out;  // sorted
  std::vector<std::vector<int>> in;   // sorted
  std::vector<char> interior_ok;      // may a path pass through this vertex?
  std::vector<std::int64_t> weight;   // per-source-vertex edge weight (>= 1)

  int size() const { return static_cast<int>(out.size()); }
  static Digraph from_edges(int n, const std::vector<std::pair<int, int>>& edges);
  static Digraph from_mrrg(const Mrrg& mrrg, PathMetric metric = PathMetric::Hops);
};

/// Up to k shortest simple paths from s to t ordered by (length, vertex
/// sequence). When s == t the paths are simple cycles through s.
std::vector<std::vector<int>> k_shortest_simple_paths(const Digraph& g, int s, int t, int k);

std::vector<RoutePath> k_shortest_paths(const Mrrg& mrrg, int u, int v, int k,
                                        PathMetric metric = PathMetric::Hops);

/// True iff the interiors of q and z are disjoint or both are driven by the
/// same FU. Endpoints are excluded: two values may meet at one FU on
/// different operands.
bool paths_compatible(int u, const RoutePath& q, int w, const RoutePath& z);

/// Paths between neighbouring FU pairs, k per pair, sorted by (length, lex).
class PathCache {
 public:
  PathCache() = default;
  explicit PathCache(int k, PathMetric metric = PathMetric::Hops) : k_(k), metric_(metric) {}

  int k() const { return k_; }
  PathMetric metric() const { return metric_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t path_count() const;

  /// nullptr if the pair was never computed.
  const std::vector<RoutePath>* find(int u, int v) const;
  const std::map<std::pair<int, int>, std::vector<RoutePath>>& entries() const { return entries_; }

  /// Computes any missing pairs, in parallel.
  void ensure(const Mrrg& mrrg, const std::vector<std::pair<int, int>>& pairs);
  void insert(int u, int v, std::vector<RoutePath> paths) { entries_[{u, v}] = std::move(paths); }

  bool operator==(const PathCache&) const = default;

 private:
  int k_ = 20;
  PathMetric metric_ = PathMetric::Hops;
  std::map<std::pair<int, int>, std::vector<RoutePath>> entries_;
};

/// Every (u, v) with v a neighbour of u.
std::vector<std::pair<int, int>> neighbor_pairs(const Mrrg& mrrg, const NeighborMap& nmap);

PathCache build_path_cache(const Mrrg& mrrg, const NeighborMap& nmap, int k,
                           PathMetric metric = PathMetric::Hops);
/// Single-threaded reference for build_path_cache.
PathCache build_path_cache_serial(const Mrrg& mrrg, const NeighborMap& nmap, int k,
                                  PathMetric metric = PathMetric::Hops);

/// Versioned text form keyed by (architecture hash, II, k).
std::string serialize_path_cache(const Mrrg& mrrg, const PathCache& cache, std::uint64_t arch_hash);
/// Throws std::runtime_error on a malformed file or a key mismatch.
PathCache parse_path_cache(const Mrrg& mrrg, const std::string& text, std::uint64_t arch_hash);

}  // namespace cgra
