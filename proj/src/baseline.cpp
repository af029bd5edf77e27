#include "cgra/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <map>

namespace cgra {

namespace {

bool hosts_any(const BaselineModel& bm, const ModelContext& ctx, int fu, const std::vector<int>& ops,
               std::vector<Term>& terms) {
  bool any = false;
  for (int p : ops) {
    const auto& cp = ctx.compat[p];
    if (!std::binary_search(cp.begin(), cp.end(), fu)) continue;
    terms.push_back({-1, bm.model.find(VarId::f(p, fu))});
    any = true;
  }
  return any;
}

}  // namespace

BaselineModel build_generic(const Dfg& dfg, const Mrrg& mrrg) {
  BaselineModel bm;
  bm.dfg = &dfg;
  bm.mrrg = &mrrg;
  bm.model.meta.variant = "generic_baseline";
  ModelContext ctx(dfg, mrrg);
  IlpModel& m = bm.model;

  declare_f_vars(m, ctx);
  for (int o = 0; o < dfg.size(); ++o)
    if (!dfg.fanout(o).empty()) bm.nets.push_back(o);
  std::vector<int> routing;
  for (int n = 0; n < mrrg.size(); ++n)
    if (!mrrg.node(n).is_fu()) routing.push_back(n);
  for (int o : bm.nets)
    for (int n : routing) m.add_variable(VarId::r(o, n), var_name(ctx, VarId::r(o, n)));

  add_fu_exclusivity(m, ctx);
  add_must_map(m, ctx, false);

  for (int o : bm.nets) {
    const auto& sinks = dfg.fanout(o);
    for (int n : routing) {
      int r = m.find(VarId::r(o, n));
      // Fanout continuation.
      std::vector<Term> fwd{{1, r}};
      for (int w : mrrg.fanout(n)) {
        if (mrrg.node(w).is_fu()) hosts_any(bm, ctx, w, sinks, fwd);
        else fwd.push_back({-1, m.find(VarId::r(o, w))});
      }
      m.add_constraint({std::move(fwd), Relation::Le, 0, ConstraintTag::RouteFanout});
      // Fanin support.
      std::vector<Term> bwd{{1, r}};
      for (int w : mrrg.fanin(n)) {
        if (mrrg.node(w).is_fu()) hosts_any(bm, ctx, w, {o}, bwd);
        else bwd.push_back({-1, m.find(VarId::r(o, w))});
      }
      m.add_constraint({std::move(bwd), Relation::Le, 0, ConstraintTag::RouteFanin});
    }
    // Source tie-in.
    for (int u : ctx.compat[o]) {
      std::vector<Term> src{{1, m.find(VarId::f(o, u))}};
      for (int w : mrrg.fanout(u))
        if (!mrrg.node(w).is_fu()) src.push_back({-1, m.find(VarId::r(o, w))});
      m.add_constraint({std::move(src), Relation::Le, 0, ConstraintTag::RouteSource});
    }
    // A placed sink needs a placed driver; otherwise a routing loop detached
    // from any FU could feed it while the driver stays unplaced.
    for (int p : sinks) {
      std::vector<Term> present;
      for (int v : ctx.compat[p]) present.push_back({1, m.find(VarId::f(p, v))});
      for (int u : ctx.compat[o]) present.push_back({-1, m.find(VarId::f(o, u))});
      m.add_unique_constraint({std::move(present), Relation::Le, 0, ConstraintTag::RouteSink});
    }
    // Sink tie-in, one row per (sink op, candidate FU).
    for (int p : sinks) {
      for (int v : ctx.compat[p]) {
        std::vector<Term> snk{{1, m.find(VarId::f(p, v))}};
        for (int w : mrrg.fanin(v))
          if (!mrrg.node(w).is_fu()) snk.push_back({-1, m.find(VarId::r(o, w))});
        m.add_constraint({std::move(snk), Relation::Le, 0, ConstraintTag::RouteSink});
      }
    }
  }
  // One value per routing node.
  if (bm.nets.size() > 1) {
    for (int n : routing) {
      std::vector<Term> terms;
      for (int o : bm.nets) terms.push_back({1, m.find(VarId::r(o, n))});
      m.add_constraint({std::move(terms), Relation::Le, 1, ConstraintTag::RouteExclusivity});
    }
  }
  return bm;
}

namespace {

Placement placement_of(const BaselineModel& bm, const std::vector<std::uint8_t>& a) {
  Placement pl(bm.dfg->size(), -1);
  for (int i = 0; i < bm.model.var_count(); ++i) {
    const VarId& id = bm.model.var(i);
    if (id.cls == VarClass::F && a[i]) pl[id.a] = id.b;
  }
  return pl;
}

/// BFS over marked routing nodes of net o from FU u. Returns parent links
/// (-2 = unreached) for routing nodes; parent -1 means "entered from u".
std::vector<int> reach(const BaselineModel& bm, const std::vector<std::uint8_t>& a, int o, int u) {
  const Mrrg& mrrg = *bm.mrrg;
  std::vector<int> parent(mrrg.size(), -2);
  std::deque<int> q;
  auto marked = [&](int n) {
    if (mrrg.node(n).is_fu()) return false;
    int r = bm.model.find(VarId::r(o, n));
    return r >= 0 && a[r];
  };
  for (int w : mrrg.fanout(u))
    if (marked(w) && parent[w] == -2) {
      parent[w] = -1;
      q.push_back(w);
    }
  while (!q.empty()) {
    int n = q.front();
    q.pop_front();
    for (int w : mrrg.fanout(n))
      if (marked(w) && parent[w] == -2) {
        parent[w] = n;
        q.push_back(w);
      }
  }
  return parent;
}

}  // namespace

std::vector<LinearConstraint> connectivity_cuts(const BaselineModel& bm, const std::vector<std::uint8_t>& a) {
  const Mrrg& mrrg = *bm.mrrg;
  const Dfg& dfg = *bm.dfg;
  Placement pl = placement_of(bm, a);
  std::vector<LinearConstraint> cuts;
  for (int o : bm.nets) {
    int u = pl[o];
    if (u < 0) continue;
    std::vector<int> parent = reach(bm, a, o, u);
    for (int p : dfg.fanout(o)) {
      int v = pl[p];
      if (v < 0) continue;
      bool ok = false;
      for (int w : mrrg.fanin(v))
        if (!mrrg.node(w).is_fu() && parent[w] != -2) ok = true;
      if (ok) continue;
      // Some routing node just outside the reached set must carry o whenever
      // o sits on u and p on v.
      std::vector<Term> terms{{1, bm.model.find(VarId::f(o, u))}, {1, bm.model.find(VarId::f(p, v))}};
      std::vector<char> in_cut(mrrg.size(), 0);
      auto frontier = [&](int from) {
        for (int w : mrrg.fanout(from))
          if (!mrrg.node(w).is_fu() && parent[w] == -2 && !in_cut[w]) {
            in_cut[w] = 1;
            terms.push_back({-1, bm.model.find(VarId::r(o, w))});
          }
      };
      frontier(u);
      for (int n = 0; n < mrrg.size(); ++n)
        if (parent[n] != -2) frontier(n);
      cuts.push_back({std::move(terms), Relation::Le, 1, ConstraintTag::Cut});
    }
  }
  return cuts;
}

MappingSolution extract_mapping(const BaselineModel& bm, const std::vector<std::uint8_t>& a) {
  const Mrrg& mrrg = *bm.mrrg;
  const Dfg& dfg = *bm.dfg;
  MappingSolution sol;
  sol.placement = placement_of(bm, a);
  for (const auto& pr : dfg.pairs()) {
    int u = sol.placement[pr.driver], v = sol.placement[pr.sink];
    if (u < 0 || v < 0) continue;
    std::vector<int> parent = reach(bm, a, pr.driver, u);
    int last = -1;
    for (int w : mrrg.fanin(v))
      if (!mrrg.node(w).is_fu() && parent[w] != -2) {
        last = w;
        break;
      }
    if (last < 0)
      throw BaselineError("value of '" + dfg.ops()[pr.driver].id + "' does not reach '" + dfg.ops()[pr.sink].id +
                          "'");
    std::vector<int> rev{v};
    for (int n = last; n != -1; n = parent[n]) rev.push_back(n);
    rev.push_back(u);
    std::reverse(rev.begin(), rev.end());
    sol.routes.push_back({pr.driver, pr.sink, RoutePath{u, v, std::move(rev)}});
  }
  return sol;
}

BaselineResult solve_generic(const BaselineModel& bm, const SolveConfig& cfg) {
  cfg.validate();
  BaselineResult out;
  auto t0 = std::chrono::steady_clock::now();
  Deadline deadline = deadline_after(cfg.time_limit);
  if (bm.model.infeasible_by_construction()) {
    out.solve.status = SolveStatus::Infeasible;
    out.solve.message = bm.model.infeasible_reason();
    return out;
  }
  IncrementalSolver solver(bm.model, cfg.seed);
  for (;;) {
    SolveResult r = solver.solve(deadline);
    if (r.status != SolveStatus::Feasible) {
      out.solve = std::move(r);
      break;
    }
    auto cuts = connectivity_cuts(bm, r.assignment);
    if (cuts.empty()) {
      out.mapping = extract_mapping(bm, r.assignment);
      out.solve = std::move(r);
      break;
    }
    ++out.cut_rounds;
    out.cuts += static_cast<int>(cuts.size());
    bool alive = true;
    for (const auto& c : cuts) alive = solver.add_constraint(c) && alive;
    if (!alive) {
      out.solve = {};
      out.solve.status = SolveStatus::Infeasible;
      out.solve.stats = solver.stats();
      break;
    }
  }
  out.solve.stats = solver.stats();
  out.solve.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace cgra
