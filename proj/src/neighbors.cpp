#include "cgra/neighbors.hpp"

#include <algorithm>
#include <sstream>

namespace cgra {

bool NeighborMap::contains(int u, int v) const {
  const auto& n = neighbors[u];
  return std::binary_search(n.begin(), n.end(), v);
}

std::size_t NeighborMap::total() const {
  std::size_t t = 0;
  for (const auto& n : neighbors) t += n.size();
  return t;
}

std::vector<int> find_neighbors(const Mrrg& mrrg, int source, int target_nn, Traversal traversal) {
  std::vector<int> found;
  if (target_nn <= 0) return found;

  std::vector<char> seen(mrrg.size(), 0);
  std::vector<int> wave{source}, next;
  bool first = true;
  while (!wave.empty()) {
    next.clear();
    for (int v : wave) {
      // Only the source and routing nodes are expanded.
      if (!first && mrrg.node(v).is_fu()) continue;
      auto visit = [&](int w) {
        if (seen[w]) return;
        seen[w] = 1;
        if (mrrg.node(w).is_fu()) found.push_back(w);
        next.push_back(w);
      };
      for (int w : mrrg.fanout(v)) visit(w);
      if (traversal == Traversal::Bidirectional) {
        for (int w : mrrg.fanin(v)) visit(w);
      }
    }
    first = false;
    if (static_cast<int>(found.size()) >= target_nn) break;
    wave.swap(next);
  }
  std::sort(found.begin(), found.end());
  return found;
}

NeighborMap build_neighbor_map(const Mrrg& mrrg, int target_nn, Traversal traversal) {
  NeighborMap map{target_nn, traversal, std::vector<std::vector<int>>(mrrg.size())};
  const std::vector<int>& fus = mrrg.fu_nodes();
  const int n = static_cast<int>(fus.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) {
    map.neighbors[fus[i]] = find_neighbors(mrrg, fus[i], target_nn, traversal);
  }
  return map;
}

NeighborMap build_neighbor_map_serial(const Mrrg& mrrg, int target_nn, Traversal traversal) {
  NeighborMap map{target_nn, traversal, std::vector<std::vector<int>>(mrrg.size())};
  for (int u : mrrg.fu_nodes()) map.neighbors[u] = find_neighbors(mrrg, u, target_nn, traversal);
  return map;
}

std::string dump_neighbor_map(const Mrrg& mrrg, const NeighborMap& nmap) {
  std::ostringstream o;
  o << "# target_nn=" << nmap.target_nn << "\n";
  for (int u : mrrg.fu_nodes()) {
    o << mrrg.key(u) << ":";
    for (int v : nmap.of(u)) o << ' ' << mrrg.key(v);
    o << '\n';
  }
  return o.str();
}

}  // namespace cgra
