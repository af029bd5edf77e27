#include "cgra/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <omp.h>
#include <unistd.h>

namespace cgra {

void SolveConfig::validate() const {
  if (!(time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (solution_limit < 1) throw std::invalid_argument("solution limit must be at least 1");
}

std::string_view solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimedOut: return "timed_out";
  }
  return "?";
}

Deadline deadline_after(double seconds) {
  auto now = std::chrono::steady_clock::now();
  if (seconds > 1e9) seconds = 1e9;
  return now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
}

// ====================================================================== engine
//
// Literals are 2*var + sign (sign 1 = negated). Rows are normalised to
// sum c_i * l_i <= degree with c_i > 0 and kept with slack counters updated as
// literals are processed from the trail; rows that are plain clauses use two
// watched literals instead. Conflicts are analysed to the first UIP, and
// propagations from counter rows are explained by a minimal prefix of their
// true literals.

struct IncrementalSolver::Engine {
  enum class Outcome { Sat, Unsat, Unknown };

  struct Pb {
    std::vector<int> lits;
    std::vector<std::int64_t> coefs;  // sorted descending, parallel to lits
    std::int64_t degree = 0;
    std::int64_t slack = 0;  // degree - sum of coefs of processed true literals
  };
  struct Clause {
    std::vector<int> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0.0;
  };
  enum class RType : std::uint8_t { None, Pb, Clause };
  struct Reason {
    RType type = RType::None;
    int index = -1;
  };

  int n = 0;
  std::vector<std::int8_t> val;  // -1 unassigned, else 0/1
  std::vector<int> level, trail_pos;
  std::vector<Reason> reason;
  std::vector<int> trail, trail_lim;
  std::size_t qhead = 0;

  std::vector<Pb> pbs;
  std::vector<std::vector<std::pair<int, std::int64_t>>> occ;  // lit -> (pb, coef)
  std::vector<Clause> clauses;
  std::vector<std::vector<int>> watches;  // lit -> clauses watching it
  int learnt_count = 0;
  double max_learnts = 2000;
  double cla_inc = 1.0;

  // VSIDS
  std::vector<double> activity;
  double var_inc = 1.0;
  std::vector<int> heap, heap_pos;
  std::vector<std::int8_t> phase;

  std::vector<char> seen;
  bool unsat = false;
  SolveStats stats;
  std::int64_t restart_count = 0;
  std::int64_t conflicts_since_restart = 0;

  Engine(int nvars, std::uint64_t seed)
      : n(nvars), val(nvars, -1), level(nvars, 0), trail_pos(nvars, -1), reason(nvars), occ(2 * nvars),
        watches(2 * nvars), activity(nvars, 0.0), heap_pos(nvars, -1), phase(nvars, 0), seen(nvars, 0) {
    std::mt19937_64 rng(seed);
    for (int v = 0; v < n; ++v) {
      // Small seed-dependent initial activities only perturb the branching
      // order; bumps dominate them after the first conflicts.
      activity[v] = seed == 0 ? 0.0 : static_cast<double>(rng() >> 11) * 0x1.0p-53 * 1e-3;
      heap_insert(v);
    }
  }

  static int var_of(int lit) { return lit >> 1; }
  static int neg(int lit) { return lit ^ 1; }
  bool is_true(int lit) const {
    int v = val[var_of(lit)];
    return v >= 0 && v == ((lit & 1) ^ 1);
  }
  bool is_false(int lit) const {
    int v = val[var_of(lit)];
    return v >= 0 && v == (lit & 1);
  }
  bool unassigned(int lit) const { return val[var_of(lit)] < 0; }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }

  // ------------------------------------------------------------ heap
  bool heap_less(int a, int b) const {
    return activity[a] > activity[b] || (activity[a] == activity[b] && a < b);
  }
  void heap_up(int i) {
    int v = heap[i];
    while (i > 0) {
      int p = (i - 1) / 2;
      if (!heap_less(v, heap[p])) break;
      heap[i] = heap[p];
      heap_pos[heap[i]] = i;
      i = p;
    }
    heap[i] = v;
    heap_pos[v] = i;
  }
  void heap_down(int i) {
    int v = heap[i];
    int sz = static_cast<int>(heap.size());
    for (;;) {
      int c = 2 * i + 1;
      if (c >= sz) break;
      if (c + 1 < sz && heap_less(heap[c + 1], heap[c])) ++c;
      if (!heap_less(heap[c], v)) break;
      heap[i] = heap[c];
      heap_pos[heap[i]] = i;
      i = c;
    }
    heap[i] = v;
    heap_pos[v] = i;
  }
  void heap_insert(int v) {
    if (heap_pos[v] >= 0) return;
    heap.push_back(v);
    heap_pos[v] = static_cast<int>(heap.size()) - 1;
    heap_up(heap_pos[v]);
  }
  int heap_pop() {
    int top = heap[0];
    heap_pos[top] = -1;
    int last = heap.back();
    heap.pop_back();
    if (!heap.empty()) {
      heap[0] = last;
      heap_pos[last] = 0;
      heap_down(0);
    }
    return top;
  }
  void bump(int v) {
    activity[v] += var_inc;
    if (activity[v] > 1e100) {
      for (double& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    if (heap_pos[v] >= 0) heap_up(heap_pos[v]);
  }
  void bump_clause(Clause& c) {
    c.activity += cla_inc;
    if (c.activity > 1e20) {
      for (auto& cl : clauses)
        if (cl.learnt) cl.activity *= 1e-20;
      cla_inc *= 1e-20;
    }
  }

  // ------------------------------------------------------------ trail
  void enqueue(int lit, Reason r) {
    int v = var_of(lit);
    val[v] = static_cast<std::int8_t>((lit & 1) ^ 1);
    level[v] = decision_level();
    reason[v] = r;
    trail_pos[v] = static_cast<int>(trail.size());
    trail.push_back(lit);
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    std::size_t lim = trail_lim[lvl];
    for (std::size_t i = trail.size(); i-- > lim;) {
      int lit = trail[i];
      int v = var_of(lit);
      if (i < qhead)
        for (auto [pi, c] : occ[lit]) pbs[pi].slack += c;
      phase[v] = val[v];
      val[v] = -1;
      reason[v] = {};
      trail_pos[v] = -1;
      heap_insert(v);
    }
    trail.resize(lim);
    trail_lim.resize(lvl);
    qhead = std::min(qhead, lim);
  }

  // ------------------------------------------------------------ rows
  bool add_clause_lits(std::vector<int> lits) {
    if (unsat) return false;
    backtrack(0);
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<int> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == neg(lits[i])) return true;  // tautology
      if (is_true(lits[i])) return true;
      if (!is_false(lits[i])) kept.push_back(lits[i]);
    }
    if (kept.empty()) return !(unsat = true);
    if (kept.size() == 1) {
      enqueue(kept[0], {});
      return true;
    }
    attach_clause(std::move(kept), false);
    return true;
  }

  int attach_clause(std::vector<int> lits, bool learnt) {
    int ci = static_cast<int>(clauses.size());
    watches[lits[0]].push_back(ci);
    watches[lits[1]].push_back(ci);
    clauses.push_back({std::move(lits), learnt, false, 0.0});
    if (learnt) ++learnt_count;
    return ci;
  }

  /// sum coef_i * lit_i <= degree, coefs positive.
  bool add_pb(std::vector<std::pair<std::int64_t, int>> terms, std::int64_t degree) {
    if (unsat) return false;
    backtrack(0);
    // Merge repeated literals and complementary pairs.
    std::map<int, std::int64_t> by_var;  // var -> signed coefficient of positive literal
    for (auto [c, lit] : terms) {
      if (lit & 1) {  // c * ~x = c - c*x
        degree -= c;
        by_var[var_of(lit)] -= c;
      } else {
        by_var[var_of(lit)] += c;
      }
    }
    terms.clear();
    for (auto [v, c] : by_var) {
      if (c > 0) terms.push_back({c, 2 * v});
      else if (c < 0) {
        terms.push_back({-c, 2 * v + 1});
        degree += -c;
      }
    }
    if (degree < 0) return !(unsat = true);
    std::int64_t total = 0;
    for (auto& t : terms) {
      t.first = std::min(t.first, degree + 1);  // saturation
      total += t.first;
    }
    if (total <= degree) return true;  // redundant
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    // A row whose coefficients are all 1 with degree = size - 1 is a clause
    // over the complemented literals.
    if (terms.front().first == 1 && degree == static_cast<std::int64_t>(terms.size()) - 1) {
      std::vector<int> cl;
      for (auto& t : terms) cl.push_back(neg(t.second));
      return add_clause_lits(std::move(cl));
    }
    Pb pb;
    pb.degree = degree;
    pb.slack = degree;
    for (auto [c, lit] : terms) {
      pb.lits.push_back(lit);
      pb.coefs.push_back(c);
      if (is_true(lit) && trail_pos[var_of(lit)] < static_cast<int>(qhead)) pb.slack -= c;
    }
    int pi = static_cast<int>(pbs.size());
    for (std::size_t i = 0; i < pb.lits.size(); ++i) occ[pb.lits[i]].push_back({pi, pb.coefs[i]});
    pbs.push_back(std::move(pb));
    if (pbs[pi].slack < 0) return !(unsat = true);
    pb_imply(pi);
    return true;
  }

  void pb_imply(int pi) {
    const Pb& pb = pbs[pi];
    for (std::size_t i = 0; i < pb.lits.size() && pb.coefs[i] > pb.slack; ++i)
      if (unassigned(pb.lits[i])) enqueue(neg(pb.lits[i]), {RType::Pb, pi});
  }

  // ------------------------------------------------------------ propagation
  /// Returns the conflicting reason or type None.
  Reason propagate() {
    Reason conflict;
    while (qhead < trail.size() && conflict.type == RType::None) {
      int lit = trail[qhead++];
      ++stats.propagations;
      // Counter rows: every occurrence is updated even after a conflict so
      // backtrack() can restore the counters symmetrically.
      for (auto [pi, c] : occ[lit]) {
        Pb& pb = pbs[pi];
        pb.slack -= c;
        if (conflict.type != RType::None) continue;
        if (pb.slack < 0) conflict = {RType::Pb, pi};
        else if (pb.coefs[0] > pb.slack) pb_imply(pi);
      }
      if (conflict.type != RType::None) break;
      // Watched clauses on the literal that just became false.
      int fl = neg(lit);
      auto& ws = watches[fl];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        int ci = ws[i++];
        Clause& c = clauses[ci];
        if (c.deleted) continue;
        if (c.lits[0] == fl) std::swap(c.lits[0], c.lits[1]);
        if (is_true(c.lits[0])) {
          ws[j++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.lits.size(); ++k) {
          if (!is_false(c.lits[k])) {
            std::swap(c.lits[1], c.lits[k]);
            watches[c.lits[1]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = ci;
        if (is_false(c.lits[0])) {
          conflict = {RType::Clause, ci};
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(c.lits[0], {RType::Clause, ci});
        }
      }
      ws.resize(j);
    }
    return conflict;
  }

  // ------------------------------------------------------------ analysis
  /// False literals of the clause form of `r`. For a propagation the implied
  /// literal `implied` is excluded; for a conflict pass -1.
  void explain(Reason r, int implied, std::vector<int>& out) {
    out.clear();
    if (r.type == RType::Clause) {
      Clause& c = clauses[r.index];
      if (c.learnt) bump_clause(c);
      for (int l : c.lits)
        if (l != implied) out.push_back(l);
      return;
    }
    const Pb& pb = pbs[r.index];
    std::int64_t need = pb.degree;  // true weight must exceed this
    int limit_pos = static_cast<int>(trail.size());
    if (implied >= 0) {
      limit_pos = trail_pos[var_of(implied)];
      // The implied literal is the complement of a row literal.
      for (std::size_t i = 0; i < pb.lits.size(); ++i)
        if (pb.lits[i] == neg(implied)) {
          need = pb.degree - pb.coefs[i];
          break;
        }
    }
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < pb.lits.size() && sum <= need; ++i) {
      int l = pb.lits[i];
      if (is_true(l) && trail_pos[var_of(l)] < limit_pos) {
        sum += pb.coefs[i];
        out.push_back(neg(l));
      }
    }
  }

  std::vector<int> analyze(Reason conflict, int& backjump) {
    std::vector<int> learnt{-1};
    std::vector<int> lits;
    int pending = 0;
    int p = -1;
    int idx = static_cast<int>(trail.size()) - 1;
    Reason r = conflict;
    std::vector<int> touched;
    for (;;) {
      explain(r, p, lits);
      for (int q : lits) {
        int v = var_of(q);
        if (seen[v] || level[v] == 0) continue;
        seen[v] = 1;
        touched.push_back(v);
        bump(v);
        if (level[v] == decision_level()) ++pending;
        else learnt.push_back(q);
      }
      while (!seen[var_of(trail[idx])]) --idx;
      p = trail[idx--];
      seen[var_of(p)] = 0;
      --pending;
      if (pending == 0) break;
      r = reason[var_of(p)];
    }
    learnt[0] = neg(p);
    for (int v : touched) seen[v] = 0;

    backjump = 0;
    if (learnt.size() > 1) {
      std::size_t best = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level[var_of(learnt[i])] > level[var_of(learnt[best])]) best = i;
      std::swap(learnt[1], learnt[best]);
      backjump = level[var_of(learnt[1])];
    }
    return learnt;
  }

  // ------------------------------------------------------------ search
  static double luby(double y, int x) {
    int size = 1, seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    return std::pow(y, seq);
  }

  bool locked(int ci) const {
    const Clause& c = clauses[ci];
    int v = var_of(c.lits[0]);
    return reason[v].type == RType::Clause && reason[v].index == ci && is_true(c.lits[0]);
  }

  void reduce_db() {
    std::vector<int> cand;
    for (int ci = 0; ci < static_cast<int>(clauses.size()); ++ci) {
      const Clause& c = clauses[ci];
      if (c.learnt && !c.deleted && c.lits.size() > 2 && !locked(ci)) cand.push_back(ci);
    }
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      return clauses[a].activity != clauses[b].activity ? clauses[a].activity < clauses[b].activity : a < b;
    });
    for (std::size_t i = 0; i < cand.size() / 2; ++i) {
      clauses[cand[i]].deleted = true;
      clauses[cand[i]].lits.shrink_to_fit();
      --learnt_count;
    }
  }

  Outcome search(Deadline deadline) {
    if (unsat) return Outcome::Unsat;
    std::int64_t ticks = 0;
    for (;;) {
      Reason conflict = propagate();
      if (conflict.type != RType::None) {
        ++stats.conflicts;
        ++conflicts_since_restart;
        if (decision_level() == 0) {
          unsat = true;
          return Outcome::Unsat;
        }
        int bj = 0;
        std::vector<int> learnt = analyze(conflict, bj);
        backtrack(bj);
        if (learnt.size() == 1) {
          enqueue(learnt[0], {});
        } else {
          int ci = attach_clause(learnt, true);
          bump_clause(clauses[ci]);
          enqueue(learnt[0], {RType::Clause, ci});
        }
        var_inc /= 0.95;
        cla_inc /= 0.999;
      } else {
        if (conflicts_since_restart >= static_cast<std::int64_t>(64 * luby(2.0, static_cast<int>(restart_count)))) {
          ++restart_count;
          conflicts_since_restart = 0;
          backtrack(0);
          continue;
        }
        if (learnt_count >= max_learnts) {
          reduce_db();
          max_learnts *= 1.1;
        }
        int next = -1;
        while (!heap.empty()) {
          int v = heap_pop();
          if (val[v] < 0) {
            next = v;
            break;
          }
        }
        if (next < 0) return Outcome::Sat;
        ++stats.nodes;
        trail_lim.push_back(static_cast<int>(trail.size()));
        enqueue(2 * next + (phase[next] == 1 ? 0 : 1), {});
      }
      if ((++ticks & 255) == 0 && std::chrono::steady_clock::now() >= deadline) return Outcome::Unknown;
    }
  }

  std::vector<std::uint8_t> model() const {
    std::vector<std::uint8_t> m(n, 0);
    for (int v = 0; v < n; ++v) m[v] = val[v] == 1;
    return m;
  }
};

// ====================================================================== wrapper

namespace {

/// Builds sum c*lit <= d rows (on positive literals) from a model row.
void rows_of(const LinearConstraint& c, std::vector<std::pair<std::vector<std::pair<std::int64_t, int>>, std::int64_t>>& out) {
  auto emit = [&](int sign) {
    std::vector<std::pair<std::int64_t, int>> terms;
    for (const Term& t : c.terms) terms.push_back({sign * t.coef, 2 * t.var});
    out.push_back({std::move(terms), sign * c.rhs});
  };
  if (c.rel != Relation::Ge) emit(1);
  if (c.rel != Relation::Le) emit(-1);
}

}  // namespace

IncrementalSolver::IncrementalSolver(const IlpModel& model, std::uint64_t seed)
    : engine_(std::make_unique<Engine>(model.var_count(), seed)), model_(model) {
  for (const auto& c : model.constraints())
    if (!add_constraint(c)) break;
}

IncrementalSolver::~IncrementalSolver() = default;

bool IncrementalSolver::add_constraint(const LinearConstraint& c) {
  std::vector<std::pair<std::vector<std::pair<std::int64_t, int>>, std::int64_t>> rows;
  rows_of(c, rows);
  for (auto& [terms, rhs] : rows) {
    // Negative coefficients become positive ones on complemented literals.
    std::int64_t degree = rhs;
    for (auto& [coef, lit] : terms) {
      if (coef < 0) {
        coef = -coef;
        lit ^= 1;
        degree += coef;
      }
    }
    if (!engine_->add_pb(std::move(terms), degree)) return false;
  }
  return !engine_->unsat;
}

bool IncrementalSolver::add_clause(const std::vector<std::pair<int, bool>>& lits) {
  std::vector<int> cl;
  for (auto [v, want] : lits) cl.push_back(2 * v + (want ? 0 : 1));
  return engine_->add_clause_lits(std::move(cl));
}

const SolveStats& IncrementalSolver::stats() const { return engine_->stats; }

SolveResult IncrementalSolver::solve(Deadline deadline) {
  SolveResult res;
  auto t0 = std::chrono::steady_clock::now();
  auto outcome = engine_->search(deadline);
  engine_->stats.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.stats = engine_->stats;
  switch (outcome) {
    case Engine::Outcome::Sat:
      res.status = SolveStatus::Feasible;
      res.assignment = engine_->model();
      if (int bad = model_.first_violation(res.assignment); bad >= 0)
        throw SolverError("internal error: solver assignment violates row " + std::to_string(bad));
      break;
    case Engine::Outcome::Unsat: res.status = SolveStatus::Infeasible; break;
    case Engine::Outcome::Unknown: res.status = SolveStatus::TimedOut; break;
  }
  return res;
}

SolveResult solve(const IlpModel& model, const SolveConfig& cfg) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  Deadline deadline = deadline_after(cfg.time_limit);
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  if (model.infeasible_by_construction()) {
    SolveResult r;
    r.status = SolveStatus::Infeasible;
    r.message = model.infeasible_reason();
    r.stats.seconds = elapsed();
    return r;
  }
  IncrementalSolver solver(model, cfg.seed);
  if (cfg.mode == SolveMode::Feasibility || model.objective().empty()) {
    SolveResult r = solver.solve(deadline);
    if (r.feasible()) {
      r.objective = model.objective_value(r.assignment);
      r.optimal = cfg.mode == SolveMode::Optimize;
    }
    r.stats.seconds = elapsed();
    return r;
  }

  // Minimisation by successively tightening obj <= best - 1.
  SolveResult best;
  best.status = SolveStatus::Infeasible;
  for (;;) {
    SolveResult r = solver.solve(deadline);
    if (r.status == SolveStatus::Feasible) {
      std::int64_t obj = model.objective_value(r.assignment);
      best.status = SolveStatus::Feasible;
      best.assignment = std::move(r.assignment);
      best.objective = obj;
      LinearConstraint bound{model.objective(), Relation::Le, obj - 1, ConstraintTag::Cut};
      if (!solver.add_constraint(bound)) {
        best.optimal = true;
        break;
      }
      continue;
    }
    if (r.status == SolveStatus::Infeasible) {
      best.optimal = best.status == SolveStatus::Feasible;
      break;
    }
    // Timed out: report honestly, keeping the incumbent for inspection.
    best.status = SolveStatus::TimedOut;
    best.optimal = false;
    break;
  }
  best.stats = solver.stats();
  best.stats.seconds = elapsed();
  return best;
}

SolveResult solve_portfolio(const IlpModel& model, const SolveConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) return solve(model, cfg);
  std::vector<SolveResult> results(seeds.size());
  std::vector<std::string> errors(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
    SolveConfig c = cfg;
    c.seed = seeds[i];
    try {
      results[i] = solve(model, c);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw SolverError(e);
  for (auto& r : results)
    if (r.status != SolveStatus::TimedOut) return r;
  return results.front();
}

SolutionStream::SolutionStream(const IlpModel& model, const SolveConfig& cfg, std::vector<VarClass> projection)
    : model_(model), cfg_(cfg), solver_(model, cfg.seed), deadline_(deadline_after(cfg.time_limit)) {
  cfg_.validate();
  for (int i = 0; i < model.var_count(); ++i)
    if (std::find(projection.begin(), projection.end(), model.var(i).cls) != projection.end())
      projection_.push_back(i);
  if (model.infeasible_by_construction()) {
    done_ = true;
    end_ = SolveStatus::Infeasible;
  }
}

std::optional<SolveResult> SolutionStream::next() {
  if (done_) return std::nullopt;
  if (produced_ >= cfg_.solution_limit) {
    done_ = true;
    end_ = SolveStatus::Feasible;
    return std::nullopt;
  }
  SolveResult r = solver_.solve(deadline_);
  if (r.status != SolveStatus::Feasible) {
    done_ = true;
    end_ = r.status;
    return std::nullopt;
  }
  ++produced_;
  std::vector<std::pair<int, bool>> nogood;
  for (int v : projection_) nogood.push_back({v, r.assignment[v] == 0});
  if (!solver_.add_clause(nogood)) {
    // No other projected assignment remains.
    done_ = true;
    end_ = SolveStatus::Infeasible;
  }
  r.objective = model_.objective_value(r.assignment);
  return r;
}

std::vector<SolveResult> enumerate_solutions(const IlpModel& model, const SolveConfig& cfg,
                                             std::vector<VarClass> projection) {
  SolutionStream stream(model, cfg, std::move(projection));
  std::vector<SolveResult> out;
  while (auto r = stream.next()) out.push_back(std::move(*r));
  return out;
}

// ====================================================================== external

ExternalSolution parse_solution_file(std::string_view text) {
  ExternalSolution sol;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || (ls >> extra))
      throw SolverError("solution file line " + std::to_string(lineno) + ": expected '<var> <value>'");
    if (a == "status") {
      sol.status = b;
      continue;
    }
    char* end = nullptr;
    double v = std::strtod(b.c_str(), &end);
    if (end == b.c_str() || *end != '\0')
      throw SolverError("solution file line " + std::to_string(lineno) + ": bad value '" + b + "'");
    sol.values.emplace_back(a, v);
  }
  return sol;
}

SolveResult interpret_external_solution(const IlpModel& model, const ExternalSolution& sol, const SolveConfig& cfg) {
  SolveResult r;
  if (sol.status == "infeasible") {
    r.status = SolveStatus::Infeasible;
    return r;
  }
  if (sol.status == "timeout" || sol.status == "time_limit") {
    r.status = SolveStatus::TimedOut;
    return r;
  }
  if (!sol.status.empty() && sol.status != "optimal" && sol.status != "feasible")
    throw SolverError("external solver reported status '" + sol.status + "'");
  if (sol.values.empty() && model.var_count() > 0)
    throw SolverError("external solver produced no assignment");
  std::map<std::string, int, std::less<>> by_name;
  for (int i = 0; i < model.var_count(); ++i) by_name.emplace(model.name(i), i);
  r.assignment.assign(model.var_count(), 0);
  for (const auto& [name, value] : sol.values) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw SolverError("external solution names unknown variable '" + name + "'");
    double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-6 || (rounded != 0.0 && rounded != 1.0))
      throw SolverError("external solution gives non-binary value for '" + name + "'");
    r.assignment[it->second] = rounded == 1.0;
  }
  if (int bad = model.first_violation(r.assignment); bad >= 0)
    throw SolverError("external solution violates row " + std::to_string(bad) + " (" +
                      std::string(constraint_tag_name(model.constraints()[bad].tag)) + ")");
  r.status = SolveStatus::Feasible;
  r.objective = model.objective_value(r.assignment);
  r.optimal = cfg.mode == SolveMode::Optimize && sol.status == "optimal";
  return r;
}

namespace {

std::string replace_all(std::string s, std::string_view from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

}  // namespace

SolveResult solve_external(const IlpModel& model, const std::string& command_template, const SolveConfig& cfg) {
  cfg.validate();
  if (command_template.empty()) throw SolverError("no external solver command configured");
  auto t0 = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  fs::path dir = fs::temp_directory_path() /
                 ("cgramap-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};
  fs::path lp = dir / "model.lp", sol = dir / "model.sol";
  {
    std::ofstream out(lp);
    out << export_lp(model);
  }
  std::ostringstream tl;
  tl << cfg.time_limit;
  std::string cmd = command_template;
  cmd = replace_all(cmd, "{lp}", shell_quote(lp.string()));
  cmd = replace_all(cmd, "{sol}", shell_quote(sol.string()));
  cmd = replace_all(cmd, "{time}", tl.str());
  cmd = replace_all(cmd, "{seed}", std::to_string(cfg.seed));
  int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  if (rc != 0) throw SolverError("external solver command failed (status " + std::to_string(rc) + "): " + cmd);
  std::ifstream in(sol);
  if (!in) throw SolverError("external solver wrote no solution file");
  std::stringstream buf;
  buf << in.rdbuf();
  SolveResult r = interpret_external_solution(model, parse_solution_file(buf.str()), cfg);
  r.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace cgra
