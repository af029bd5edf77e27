#pragma once

// Independent reference implementations used to check the library: plain
// exhaustive searches that share no code with the algorithms under test.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/ilp_model.hpp"
#include "cgra/mrrg.hpp"
#include "cgra/paths.hpp"

namespace oracle {

// ------------------------------------------------------------------ paths

// Every simple s->t path (every simple cycle through s when s == t), sorted by
// (summed source weight, vertex sequence).
inline std::vector<std::vector<int>> all_simple_paths(const cgra::Digraph& g, int s, int t) {
  std::vector<std::vector<int>> out;
  std::vector<int> path{s};
  std::vector<char> on(g.size(), 0);
  on[s] = 1;
  std::function<void(int)> dfs = [&](int u) {
    for (int w : g.out[u]) {
      if (w == t) {
        path.push_back(w);
        out.push_back(path);
        path.pop_back();
        continue;
      }
      if (on[w] || !g.interior_ok[w]) continue;
      on[w] = 1;
      path.push_back(w);
      dfs(w);
      path.pop_back();
      on[w] = 0;
    }
  };
  dfs(s);
  auto len = [&](const std::vector<int>& p) {
    std::int64_t l = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) l += g.weight[p[i]];
    return l;
  };
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    auto la = len(a), lb = len(b);
    return la != lb ? la < lb : a < b;
  });
  return out;
}

inline cgra::Digraph random_digraph(std::mt19937_64& rng, int n, double density) {
  std::vector<std::pair<int, int>> edges;
  std::bernoulli_distribution coin(density);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && coin(rng)) edges.emplace_back(u, v);
  return cgra::Digraph::from_edges(n, edges);
}

// ------------------------------------------------------------------ models

struct Exhaustive {
  bool feasible = false;
  std::int64_t best = 0;  // minimum objective over feasible assignments
  std::uint64_t count = 0;  // number of feasible assignments
};

// Gray-code walk over all 2^n assignments with incremental row activities.
inline Exhaustive enumerate_model(const cgra::IlpModel& m) {
  const int n = m.var_count();
  const auto& cons = m.constraints();
  std::vector<std::vector<std::pair<int, std::int64_t>>> occ(n);  // var -> (row, coef)
  for (int r = 0; r < static_cast<int>(cons.size()); ++r)
    for (const auto& t : cons[r].terms) occ[t.var].emplace_back(r, t.coef);
  std::vector<std::int64_t> obj(n, 0);
  for (const auto& t : m.objective()) obj[t.var] += t.coef;
  std::vector<std::int64_t> act(cons.size(), 0);
  auto ok = [&](int r) {
    switch (cons[r].rel) {
      case cgra::Relation::Le: return act[r] <= cons[r].rhs;
      case cgra::Relation::Ge: return act[r] >= cons[r].rhs;
      case cgra::Relation::Eq: return act[r] == cons[r].rhs;
    }
    return false;
  };
  int violated = 0;
  for (int r = 0; r < static_cast<int>(cons.size()); ++r) violated += !ok(r);
  std::vector<std::uint8_t> x(n, 0);
  std::int64_t value = 0;
  Exhaustive res;
  if (m.infeasible_by_construction()) return res;
  auto visit = [&] {
    if (violated == 0) {
      if (!res.feasible || value < res.best) res.best = value;
      res.feasible = true;
      ++res.count;
    }
  };
  visit();
  const std::uint64_t total = n >= 64 ? 0 : (std::uint64_t{1} << n);
  for (std::uint64_t i = 1; i < total; ++i) {
    int bit = __builtin_ctzll(i);
    std::int64_t d = x[bit] ? -1 : 1;
    x[bit] ^= 1;
    value += d * obj[bit];
    for (auto [r, c] : occ[bit]) {
      bool was = ok(r);
      act[r] += d * c;
      bool now = ok(r);
      violated += (was && !now) - (!was && now);
    }
    visit();
  }
  return res;
}

// Random 0-1 model over n variables with a mix of relations and row widths.
inline cgra::IlpModel random_model(std::mt19937_64& rng, int n) {
  cgra::IlpModel m;
  for (int i = 0; i < n; ++i) m.add_variable(cgra::VarId::x(i), "x" + std::to_string(i));
  std::uniform_int_distribution<int> rows_d(1, 2 * n + 1), width_d(1, std::min(n, 6)), coef_d(-4, 4), rel_d(0, 5);
  int rows = rows_d(rng);
  for (int r = 0; r < rows; ++r) {
    std::vector<int> vars(n);
    for (int i = 0; i < n; ++i) vars[i] = i;
    std::shuffle(vars.begin(), vars.end(), rng);
    int w = width_d(rng);
    cgra::LinearConstraint c;
    std::int64_t lo = 0, hi = 0;
    for (int i = 0; i < w; ++i) {
      int coef = 0;
      while (coef == 0) coef = coef_d(rng);
      c.terms.push_back({coef, vars[i]});
      (coef < 0 ? lo : hi) += coef;
    }
    int rel = rel_d(rng);
    c.rel = rel < 3 ? cgra::Relation::Le : rel < 5 ? cgra::Relation::Ge : cgra::Relation::Eq;
    c.rhs = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    m.add_constraint(std::move(c));
  }
  std::vector<cgra::Term> obj;
  for (int i = 0; i < n; ++i) {
    int coef = coef_d(rng);
    if (coef) obj.push_back({coef, i});
  }
  m.set_objective(obj);
  return m;
}

// ------------------------------------------------------------------ mapping

// Exact mapping search: injective placements of every op onto a compatible FU,
// then a backtracking router that enumerates simple paths per connection while
// keeping vertices of different driver FUs apart. Returns std::nullopt when a
// node budget is exhausted.
class BruteForceMapper {
 public:
  BruteForceMapper(const cgra::Dfg& dfg, const cgra::Mrrg& mrrg, std::uint64_t budget = 200'000'000)
      : dfg_(dfg), g_(mrrg), budget_(budget) {}

  std::optional<bool> mappable() {
    const int n = dfg_.size();
    compat_.assign(n, {});
    for (int o = 0; o < n; ++o) {
      for (int v = 0; v < g_.size(); ++v)
        if (g_.node(v).is_fu() && g_.node(v).ops.contains(dfg_.ops()[o].opcode)) compat_[o].push_back(v);
      if (compat_[o].empty()) return false;
    }
    reach_.assign(g_.size(), {});
    place_.assign(n, -1);
    used_.assign(g_.size(), 0);
    owner_.assign(g_.size(), -1);
    refs_.assign(g_.size(), 0);
    bool found = place(0);
    if (exhausted_) return std::nullopt;
    return found;
  }

 private:
  // FU-to-FU reachability through routing nodes only (cached per source).
  bool reaches(int u, int v) {
    auto& r = reach_[u];
    if (r.empty()) {
      r.assign(g_.size(), 0);
      std::vector<int> stack;
      std::vector<char> seen(g_.size(), 0);
      for (int w : g_.fanout(u)) stack.push_back(w);
      while (!stack.empty()) {
        int w = stack.back();
        stack.pop_back();
        if (seen[w]) continue;
        seen[w] = 1;
        r[w] = 1;
        if (g_.node(w).is_fu()) continue;
        for (int x : g_.fanout(w)) stack.push_back(x);
      }
    }
    return r[v] != 0;
  }

  bool place(int o) {
    if (o == dfg_.size()) return route_all();
    for (int v : compat_[o]) {
      if (used_[v]) continue;
      bool ok = true;
      for (int d : dfg_.fanin(o)) {
        int pd = d == o ? v : place_[d];
        if (pd >= 0 && !reaches(pd, v)) ok = false;
      }
      for (int s : dfg_.fanout(o)) {
        if (s != o && place_[s] >= 0 && !reaches(v, place_[s])) ok = false;
      }
      if (!ok) continue;
      used_[v] = 1;
      place_[o] = v;
      if (place(o + 1)) return true;
      place_[o] = -1;
      used_[v] = 0;
      if (exhausted_) return false;
    }
    return false;
  }

  bool route_all() {
    conns_.clear();
    for (const auto& p : dfg_.pairs()) conns_.emplace_back(place_[p.driver], place_[p.sink]);
    return route(0);
  }

  bool route(std::size_t i) {
    if (i == conns_.size()) return true;
    auto [u, v] = conns_[i];
    std::vector<int> path;
    std::vector<char> on(g_.size(), 0);
    on[u] = 1;
    std::function<bool(int)> dfs = [&](int w) -> bool {
      if (++steps_ > budget_) {
        exhausted_ = true;
        return false;
      }
      for (int x : g_.fanout(w)) {
        if (x == v) {
          if (route(i + 1)) return true;
          if (exhausted_) return false;
          continue;
        }
        if (on[x] || g_.node(x).is_fu()) continue;
        if (owner_[x] != -1 && owner_[x] != u) continue;
        on[x] = 1;
        if (refs_[x]++ == 0) owner_[x] = u;
        bool done = dfs(x);
        if (--refs_[x] == 0) owner_[x] = -1;
        on[x] = 0;
        if (done) return true;
        if (exhausted_) return false;
      }
      return false;
    };
    return dfs(u);
  }

  const cgra::Dfg& dfg_;
  const cgra::Mrrg& g_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  bool exhausted_ = false;
  std::vector<std::vector<int>> compat_;
  std::vector<std::vector<char>> reach_;
  std::vector<int> place_;
  std::vector<char> used_;
  std::vector<int> owner_, refs_;
  std::vector<std::pair<int, int>> conns_;
};

}  // namespace oracle
