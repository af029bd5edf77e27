#include "cgra/paths.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cgra {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Shortest (then lexicographically smallest) path from a spur vertex to t with
// the root vertices blocked and some of the spur's out-edges removed.
class SpurSearch {
 public:
  SpurSearch(const Digraph& g, int t) : g_(g), t_(t), dist_(g.size(), kInf), blocked_(g.size(), 0) {
    unit_ = std::all_of(g.weight.begin(), g.weight.end(), [](std::int64_t w) { return w == 1; });
  }

  void block(int v) { blocked_[v] = 1; }
  void unblock(int v) { blocked_[v] = 0; }

  std::vector<int> run(int spur, const std::vector<int>& removed_next) {
    spur_ = spur;
    removed_ = &removed_next;
    std::int64_t spur_dist = kInf;
    touched_.clear();

    auto removed = [&](int w) { return std::find(removed_->begin(), removed_->end(), w) != removed_->end(); };
    auto relax = [&](int w, std::int64_t d) {
      if (d < dist_[w]) {
        if (dist_[w] == kInf) touched_.push_back(w);
        dist_[w] = d;
        return true;
      }
      return false;
    };

    // Reverse search from t. Intermediates are stored in dist_; the spur's own
    // distance is tracked separately so that spur == t works for cycles.
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::vector<int> fifo;
    auto push = [&](int w) {
      if (unit_) fifo.push_back(w);
      else heap.push({dist_[w], w});
    };
    for (int w : g_.in[t_]) {
      if (w == spur_) {
        if (!removed(t_)) spur_dist = std::min(spur_dist, g_.weight[w]);
      } else if (allowed(w) && relax(w, g_.weight[w])) {
        push(w);
      }
    }
    std::size_t head = 0;
    while (true) {
      int x;
      std::int64_t dx;
      if (unit_) {
        if (head == fifo.size()) break;
        x = fifo[head++];
        dx = dist_[x];
      } else {
        if (heap.empty()) break;
        auto [d, v] = heap.top();
        heap.pop();
        if (d != dist_[v]) continue;
        x = v;
        dx = d;
      }
      if (dx >= spur_dist) break;
      for (int w : g_.in[x]) {
        if (w == spur_) {
          if (!removed(x)) spur_dist = std::min(spur_dist, dx + g_.weight[w]);
        } else if (allowed(w) && relax(w, dx + g_.weight[w])) {
          push(w);
        }
      }
    }

    std::vector<int> path;
    if (spur_dist < kInf) {
      path.push_back(spur_);
      int cur = spur_;
      std::int64_t rem = spur_dist;
      while (true) {
        int pick = -1;
        for (int w : g_.out[cur]) {
          if (cur == spur_ && removed(w)) continue;
          if (w == t_ && rem == g_.weight[cur]) {
            pick = w;
            break;
          }
          if (w != t_ && allowed(w) && dist_[w] < kInf && dist_[w] + g_.weight[cur] == rem) {
            pick = w;
            break;
          }
        }
        if (pick < 0) throw std::logic_error("spur path reconstruction failed");
        rem -= g_.weight[cur];
        path.push_back(pick);
        if (pick == t_ && rem == 0) break;
        cur = pick;
      }
    }
    for (int w : touched_) dist_[w] = kInf;
    return path;
  }

 private:
  bool allowed(int w) const { return w != t_ && w != spur_ && g_.interior_ok[w] && !blocked_[w]; }

  const Digraph& g_;
  int t_;
  bool unit_ = true;
  int spur_ = -1;
  const std::vector<int>* removed_ = nullptr;
  std::vector<std::int64_t> dist_;
  std::vector<char> blocked_;
  std::vector<int> touched_;
};

std::int64_t path_cost(const Digraph& g, const std::vector<int>& p) {
  std::int64_t c = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) c += g.weight[p[i]];
  return c;
}

}  // namespace

std::vector<int> RoutePath::interior_sorted() const {
  if (vertices.size() < 2) return {};
  std::vector<int> in(vertices.begin() + 1, vertices.end() - 1);
  std::sort(in.begin(), in.end());
  return in;
}

Digraph Digraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  Digraph g;
  g.out.assign(n, {});
  g.in.assign(n, {});
  for (auto [a, b] : edges) {
    g.out[a].push_back(b);
    g.in[b].push_back(a);
  }
  for (auto& v : g.out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : g.in) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  g.interior_ok.assign(n, 1);
  g.weight.assign(n, 1);
  return g;
}

Digraph Digraph::from_mrrg(const Mrrg& mrrg, PathMetric metric) {
  Digraph g;
  const int n = mrrg.size();
  g.out.resize(n);
  g.in.resize(n);
  g.interior_ok.resize(n);
  g.weight.resize(n);
  for (int v = 0; v < n; ++v) {
    g.out[v] = mrrg.fanout(v);
    g.in[v] = mrrg.fanin(v);
    g.interior_ok[v] = !mrrg.node(v).is_fu();
    g.weight[v] = metric == PathMetric::Hops ? 1 : (static_cast<std::int64_t>(mrrg.node(v).latency) << 16) + 1;
  }
  return g;
}

// Yen's algorithm. Each spur path is the lexicographically smallest shortest
// one, and candidates are ranked by (cost, vertex sequence).
std::vector<std::vector<int>> k_shortest_simple_paths(const Digraph& g, int s, int t, int k) {
  std::vector<std::vector<int>> found;
  if (k <= 0) return found;
  SpurSearch search(g, t);
  std::vector<int> none;
  std::vector<int> first = search.run(s, none);
  if (first.empty()) return found;
  found.push_back(std::move(first));

  std::set<std::vector<int>> accepted{found.front()};
  std::set<std::pair<std::int64_t, std::vector<int>>> candidates;
  std::set<std::vector<int>> queued;
  while (static_cast<int>(found.size()) < k) {
    const std::vector<int> prev = found.back();
    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      int spur = prev[i];
      std::vector<int> removed;
      for (const auto& p : found) {
        if (p.size() > i + 1 && std::equal(prev.begin(), prev.begin() + i + 1, p.begin())) {
          removed.push_back(p[i + 1]);
        }
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (prev[j] != t) search.block(prev[j]);
      }
      std::vector<int> tail = search.run(spur, removed);
      for (std::size_t j = 0; j < i; ++j) search.unblock(prev[j]);
      if (tail.empty()) continue;
      std::vector<int> cand(prev.begin(), prev.begin() + i);
      cand.insert(cand.end(), tail.begin(), tail.end());
      if (accepted.count(cand) || queued.count(cand)) continue;
      queued.insert(cand);
      candidates.emplace(path_cost(g, cand), std::move(cand));
    }
    if (candidates.empty()) break;
    auto best = candidates.begin()->second;
    candidates.erase(candidates.begin());
    queued.erase(best);
    accepted.insert(best);
    found.push_back(std::move(best));
  }
  return found;
}

std::vector<RoutePath> k_shortest_paths(const Mrrg& mrrg, int u, int v, int k, PathMetric metric) {
  Digraph g = Digraph::from_mrrg(mrrg, metric);
  std::vector<RoutePath> out;
  for (auto& p : k_shortest_simple_paths(g, u, v, k)) out.push_back({u, v, std::move(p)});
  return out;
}

bool paths_compatible(int u, const RoutePath& q, int w, const RoutePath& z) {
  if (u == w) return true;
  auto a = q.interior_sorted(), b = z.interior_sorted();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    if (a[i] < b[j]) ++i;
    else ++j;
  }
  return true;
}

std::size_t PathCache::path_count() const {
  std::size_t n = 0;
  for (const auto& [key, paths] : entries_) n += paths.size();
  return n;
}

const std::vector<RoutePath>* PathCache::find(int u, int v) const {
  auto it = entries_.find({u, v});
  return it == entries_.end() ? nullptr : &it->second;
}

void PathCache::ensure(const Mrrg& mrrg, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::pair<int, int>> missing;
  for (const auto& p : pairs) {
    if (!entries_.count(p)) missing.push_back(p);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (missing.empty()) return;
  Digraph g = Digraph::from_mrrg(mrrg, metric_);
  std::vector<std::vector<RoutePath>> results(missing.size());
  const int n = static_cast<int>(missing.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    auto [u, v] = missing[i];
    for (auto& p : k_shortest_simple_paths(g, u, v, k_)) results[i].push_back({u, v, std::move(p)});
  }
  for (int i = 0; i < n; ++i) entries_[missing[i]] = std::move(results[i]);
}

std::vector<std::pair<int, int>> neighbor_pairs(const Mrrg& mrrg, const NeighborMap& nmap) {
  std::vector<std::pair<int, int>> pairs;
  for (int u : mrrg.fu_nodes()) {
    for (int v : nmap.of(u)) pairs.emplace_back(u, v);
  }
  return pairs;
}

PathCache build_path_cache(const Mrrg& mrrg, const NeighborMap& nmap, int k, PathMetric metric) {
  PathCache cache(k, metric);
  cache.ensure(mrrg, neighbor_pairs(mrrg, nmap));
  return cache;
}

PathCache build_path_cache_serial(const Mrrg& mrrg, const NeighborMap& nmap, int k, PathMetric metric) {
  PathCache cache(k, metric);
  Digraph g = Digraph::from_mrrg(mrrg, metric);
  for (auto [u, v] : neighbor_pairs(mrrg, nmap)) {
    std::vector<RoutePath> paths;
    for (auto& p : k_shortest_simple_paths(g, u, v, k)) paths.push_back({u, v, std::move(p)});
    cache.insert(u, v, std::move(paths));
  }
  return cache;
}

namespace {
constexpr const char* kCacheMagic = "cgra-path-cache v1";
}

std::string serialize_path_cache(const Mrrg& mrrg, const PathCache& cache, std::uint64_t arch_hash) {
  std::ostringstream o;
  o << kCacheMagic << "\n";
  o << "key " << std::hex << arch_hash << std::dec << " ii " << mrrg.ii() << " k " << cache.k() << " metric "
    << (cache.metric() == PathMetric::Hops ? "hops" : "latency") << "\n";
  for (const auto& [key, paths] : cache.entries()) {
    o << "pair " << mrrg.key(key.first) << ' ' << mrrg.key(key.second) << ' ' << paths.size() << "\n";
    for (const RoutePath& p : paths) {
      o << "path";
      for (int v : p.vertices) o << ' ' << mrrg.key(v);
      o << "\n";
    }
  }
  return o.str();
}

PathCache parse_path_cache(const Mrrg& mrrg, const std::string& text, std::uint64_t arch_hash) {
  std::istringstream in(text);
  std::string line;
  auto fail = [](const std::string& m) { return std::runtime_error("path cache: " + m); };
  if (!std::getline(in, line) || line != kCacheMagic) throw fail("bad header");
  std::string kw_key, kw_ii, kw_k, kw_metric, metric;
  std::uint64_t hash = 0;
  int ii = 0, k = 0;
  if (!std::getline(in, line)) throw fail("missing key line");
  std::istringstream kl(line);
  kl >> kw_key >> std::hex >> hash >> std::dec >> kw_ii >> ii >> kw_k >> k >> kw_metric >> metric;
  if (kl.fail() || kw_key != "key" || kw_ii != "ii" || kw_k != "k" || kw_metric != "metric") throw fail("bad key line");
  if (hash != arch_hash || ii != mrrg.ii()) throw fail("cache was built for a different architecture or II");
  if (metric != "hops" && metric != "latency") throw fail("unknown metric '" + metric + "'");
  PathCache cache(k, metric == "hops" ? PathMetric::Hops : PathMetric::Latency);
  auto node = [&](const std::string& key) {
    int v = mrrg.find_key(key);
    if (v < 0) throw fail("unknown node '" + key + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream pl(line);
    std::string kw, a, b;
    std::size_t count = 0;
    pl >> kw >> a >> b >> count;
    if (pl.fail() || kw != "pair") throw fail("expected pair line");
    int u = node(a), v = node(b);
    std::vector<RoutePath> paths;
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw fail("truncated path list");
      std::istringstream ps(line);
      std::string tok;
      ps >> tok;
      if (tok != "path") throw fail("expected path line");
      RoutePath p{u, v, {}};
      while (ps >> tok) p.vertices.push_back(node(tok));
      if (p.vertices.size() < 2 || p.vertices.front() != u || p.vertices.back() != v) throw fail("path endpoints");
      for (std::size_t j = 0; j + 1 < p.vertices.size(); ++j) {
        const auto& fo = mrrg.fanout(p.vertices[j]);
        if (!std::binary_search(fo.begin(), fo.end(), p.vertices[j + 1])) throw fail("path uses a missing edge");
      }
      paths.push_back(std::move(p));
    }
    cache.insert(u, v, std::move(paths));
  }
  return cache;
}

}  // namespace cgra
