#include "cgra/ilp_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace cgra {

std::string_view var_class_name(VarClass c) {
  switch (c) {
    case VarClass::F: return "F";
    case VarClass::E: return "E";
    case VarClass::P: return "P";
    case VarClass::R: return "R";
    case VarClass::X: return "X";
  }
  return "?";
}

std::string_view constraint_tag_name(ConstraintTag t) {
  switch (t) {
    case ConstraintTag::FuExclusivity: return "fu_exclusivity";
    case ConstraintTag::MustMap: return "must_map";
    case ConstraintTag::FaninRequired: return "fanin_required";
    case ConstraintTag::FanoutImpliesUsage: return "fanout_implies_usage";
    case ConstraintTag::PathRequired: return "path_required";
    case ConstraintTag::PathExclusivity: return "path_exclusivity";
    case ConstraintTag::Fixed: return "fixed";
    case ConstraintTag::Cut: return "cut";
    case ConstraintTag::RouteExclusivity: return "route_exclusivity";
    case ConstraintTag::RouteFanout: return "route_fanout";
    case ConstraintTag::RouteFanin: return "route_fanin";
    case ConstraintTag::RouteSource: return "route_source";
    case ConstraintTag::RouteSink: return "route_sink";
    case ConstraintTag::Generic: return "generic";
  }
  return "?";
}

// ---------------------------------------------------------------- IlpModel

int IlpModel::add_variable(const VarId& id, std::string name) {
  if (index_.count(id)) throw ModelError("variable declared twice: " + name);
  // Names must be unique for LP export; disambiguate rare collisions.
  std::string unique = name;
  for (int n = 2; names_taken_.count(unique); ++n) unique = name + "~" + std::to_string(n);
  int idx = var_count();
  vars_.push_back(id);
  names_.push_back(unique);
  names_taken_.emplace(unique, idx);
  index_.emplace(id, idx);
  return idx;
}

int IlpModel::find(const VarId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

namespace {

void canonicalize(LinearConstraint& c, int var_count) {
  std::map<int, std::int64_t> merged;
  for (const Term& t : c.terms) {
    if (t.var < 0 || t.var >= var_count) throw ModelError("constraint references an undeclared variable");
    merged[t.var] += t.coef;
  }
  c.terms.clear();
  for (auto [v, coef] : merged)
    if (coef != 0) c.terms.push_back({coef, v});
}

}  // namespace

void IlpModel::add_constraint(LinearConstraint c) {
  canonicalize(c, var_count());
  cons_.push_back(std::move(c));
}

bool IlpModel::add_unique_constraint(LinearConstraint c) {
  canonicalize(c, var_count());
  std::vector<std::pair<int, std::int64_t>> key;
  key.reserve(c.terms.size());
  for (const Term& t : c.terms) key.emplace_back(t.var, t.coef);
  auto [it, fresh] = canon_.emplace(std::make_tuple(std::move(key), static_cast<int>(c.rel), c.rhs),
                                    static_cast<int>(cons_.size()));
  if (!fresh) return false;
  cons_.push_back(std::move(c));
  return true;
}

void IlpModel::set_objective(std::vector<Term> terms) {
  LinearConstraint tmp{std::move(terms), Relation::Le, 0, ConstraintTag::Generic};
  canonicalize(tmp, var_count());
  objective_ = std::move(tmp.terms);
}

void IlpModel::mark_infeasible(std::string reason) {
  if (!infeasible_) infeasible_ = std::move(reason);
}

const std::string& IlpModel::infeasible_reason() const {
  static const std::string none;
  return infeasible_ ? *infeasible_ : none;
}

int IlpModel::first_violation(const std::vector<std::uint8_t>& assignment) const {
  if (static_cast<int>(assignment.size()) != var_count()) return cons_.empty() ? -1 : 0;
  for (std::size_t i = 0; i < cons_.size(); ++i) {
    const auto& c = cons_[i];
    std::int64_t lhs = 0;
    for (const Term& t : c.terms) lhs += assignment[t.var] ? t.coef : 0;
    bool ok = c.rel == Relation::Le ? lhs <= c.rhs : c.rel == Relation::Ge ? lhs >= c.rhs : lhs == c.rhs;
    if (!ok) return static_cast<int>(i);
  }
  return -1;
}

std::int64_t IlpModel::objective_value(const std::vector<std::uint8_t>& assignment) const {
  std::int64_t v = 0;
  for (const Term& t : objective_) v += assignment[t.var] ? t.coef : 0;
  return v;
}

std::vector<int> IlpModel::vars_of(VarClass c) const {
  std::vector<int> out;
  for (int i = 0; i < var_count(); ++i)
    if (vars_[i].cls == c) out.push_back(i);
  return out;
}

ModelStats model_stats(const IlpModel& model) {
  ModelStats s;
  s.variant = model.meta.variant;
  s.variables = model.var_count();
  s.constraints = static_cast<int>(model.constraints().size());
  for (const auto& v : model.variables()) ++s.by_class[std::string(var_class_name(v.cls))];
  for (const auto& c : model.constraints()) ++s.by_tag[std::string(constraint_tag_name(c.tag))];
  return s;
}

std::string format_model_stats(const ModelStats& s) {
  std::ostringstream os;
  os << "variant: " << (s.variant.empty() ? "-" : s.variant) << "\n";
  os << "constraints / variables: " << s.constraints << " / " << s.variables << "\n";
  os << "variables by class:\n";
  for (const auto& [k, n] : s.by_class) os << "  " << k << ": " << n << "\n";
  os << "constraints by family:\n";
  for (const auto& [k, n] : s.by_tag) os << "  " << k << ": " << n << "\n";
  return os.str();
}

// ---------------------------------------------------------------- builders

ModelContext::ModelContext(const Dfg& g, const Mrrg& m, const NeighborMap* n, const PathCache* c)
    : dfg(g), mrrg(m), nmap(n), cache(c) {
  compat.reserve(g.size());
  for (const auto& op : g.ops()) compat.push_back(compatible_nodes(m, op.opcode));
}

namespace {

std::string sanitize(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '@') out += "_t";
    else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.') out += ch;
    else out += '_';
  }
  return out;
}

const NeighborMap& need_nmap(const ModelContext& ctx) {
  if (!ctx.nmap) throw ModelError("model builder needs a neighbour map");
  return *ctx.nmap;
}

const PathCache& need_cache(const ModelContext& ctx) {
  if (!ctx.cache) throw ModelError("model builder needs a path cache");
  return *ctx.cache;
}

const std::vector<RoutePath>& cached_paths(const ModelContext& ctx, int u, int v) {
  const auto* paths = need_cache(ctx).find(u, v);
  if (!paths)
    throw ModelError("path cache lacks pair " + ctx.mrrg.key(u) + " -> " + ctx.mrrg.key(v));
  return *paths;
}

/// Distinct (u, v) pairs of the declared E variables, sorted.
std::vector<std::pair<int, int>> e_pairs(const IlpModel& model) {
  std::set<std::pair<int, int>> s;
  for (const auto& v : model.variables())
    if (v.cls == VarClass::E) s.emplace(v.b, v.d);
  return {s.begin(), s.end()};
}

/// P variable indices of (u, v) in q order.
std::vector<int> p_vars_of(const IlpModel& model, int u, int v) {
  std::vector<int> out;
  for (int q = 0;; ++q) {
    int idx = model.find(VarId::p(u, v, q));
    if (idx < 0) break;
    out.push_back(idx);
  }
  return out;
}

}  // namespace

std::string var_name(const ModelContext& ctx, const VarId& id) {
  const auto& ops = ctx.dfg.ops();
  auto key = [&](int n) { return sanitize(ctx.mrrg.key(n)); };
  switch (id.cls) {
    case VarClass::F: return "f_" + ops[id.a].id + "_" + key(id.b);
    case VarClass::E: return "e_" + ops[id.a].id + "_" + key(id.b) + "_" + ops[id.c].id + "_" + key(id.d);
    case VarClass::P: return "p_" + key(id.a) + "_" + key(id.b) + "_" + std::to_string(id.c);
    case VarClass::R: return "r_" + ops[id.a].id + "_" + key(id.b);
    case VarClass::X: return "x" + std::to_string(id.a);
  }
  return "?";
}

void declare_f_vars(IlpModel& model, const ModelContext& ctx) {
  for (int o = 0; o < ctx.dfg.size(); ++o)
    for (int u : ctx.compat[o]) model.add_variable(VarId::f(o, u), var_name(ctx, VarId::f(o, u)));
}

void declare_e_vars(IlpModel& model, const ModelContext& ctx) {
  const auto& nmap = need_nmap(ctx);
  for (const auto& pr : ctx.dfg.pairs()) {
    const auto& cp = ctx.compat[pr.sink];
    for (int u : ctx.compat[pr.driver]) {
      for (int v : nmap.of(u)) {
        if (!std::binary_search(cp.begin(), cp.end(), v)) continue;
        VarId id = VarId::e(pr.driver, u, pr.sink, v);
        model.add_variable(id, var_name(ctx, id));
      }
    }
  }
}

void declare_p_vars(IlpModel& model, const ModelContext& ctx, int paths_per_connection) {
  if (paths_per_connection < 1) throw ModelError("paths_per_connection must be positive");
  for (auto [u, v] : e_pairs(model)) {
    const auto& paths = cached_paths(ctx, u, v);
    int n = std::min<int>(paths_per_connection, static_cast<int>(paths.size()));
    for (int q = 0; q < n; ++q) model.add_variable(VarId::p(u, v, q), var_name(ctx, VarId::p(u, v, q)));
  }
}

void add_fu_exclusivity(IlpModel& model, const ModelContext& ctx) {
  std::map<int, std::vector<Term>> per_fu;
  for (int o = 0; o < ctx.dfg.size(); ++o)
    for (int u : ctx.compat[o]) {
      int f = model.find(VarId::f(o, u));
      if (f >= 0) per_fu[u].push_back({1, f});
    }
  for (auto& [u, terms] : per_fu)
    model.add_constraint({std::move(terms), Relation::Le, 1, ConstraintTag::FuExclusivity});
}

void add_must_map(IlpModel& model, const ModelContext& ctx, bool allow_duplication) {
  std::vector<int> cover = cover_set(ctx.dfg);
  std::vector<char> in_cover(ctx.dfg.size(), 0);
  for (int o : cover) in_cover[o] = 1;
  for (int o = 0; o < ctx.dfg.size(); ++o) {
    if (ctx.compat[o].empty()) {
      model.mark_infeasible("operation '" + ctx.dfg.ops()[o].id + "' (" +
                            std::string(opcode_name(ctx.dfg.ops()[o].opcode)) + ") has no compatible FU");
      continue;
    }
    std::vector<Term> terms;
    for (int u : ctx.compat[o]) terms.push_back({1, model.find(VarId::f(o, u))});
    if (in_cover[o])
      model.add_constraint({std::move(terms), allow_duplication ? Relation::Ge : Relation::Eq, 1,
                            ConstraintTag::MustMap});
    else if (!allow_duplication && terms.size() > 1)
      model.add_constraint({std::move(terms), Relation::Le, 1, ConstraintTag::MustMap});
  }
}

void add_fanin_required(IlpModel& model, const ModelContext& ctx) {
  const auto& nmap = need_nmap(ctx);
  for (const auto& pr : ctx.dfg.pairs()) {
    for (int v : ctx.compat[pr.sink]) {
      std::vector<Term> terms{{1, model.find(VarId::f(pr.sink, v))}};
      for (int u : ctx.compat[pr.driver]) {
        if (!nmap.contains(u, v)) continue;
        int e = model.find(VarId::e(pr.driver, u, pr.sink, v));
        if (e >= 0) terms.push_back({-1, e});
      }
      model.add_constraint({std::move(terms), Relation::Le, 0, ConstraintTag::FaninRequired});
    }
  }
}

void add_fanout_implies_usage(IlpModel& model, const ModelContext& ctx) {
  (void)ctx;
  for (int i = 0, n = model.var_count(); i < n; ++i) {
    const VarId id = model.var(i);
    if (id.cls != VarClass::E) continue;
    int f = model.find(VarId::f(id.a, id.b));
    if (f < 0) throw ModelError("E variable without its F variable: " + model.name(i));
    model.add_constraint({{{1, i}, {-1, f}}, Relation::Le, 0, ConstraintTag::FanoutImpliesUsage});
  }
}

void add_path_required(IlpModel& model, const ModelContext& ctx) {
  (void)ctx;
  for (int i = 0, n = model.var_count(); i < n; ++i) {
    const VarId id = model.var(i);
    if (id.cls != VarClass::E) continue;
    std::vector<Term> terms{{1, i}};
    for (int p : p_vars_of(model, id.b, id.d)) terms.push_back({-1, p});
    model.add_constraint({std::move(terms), Relation::Le, 0, ConstraintTag::PathRequired});
  }
}

void add_path_exclusivity(IlpModel& model, const ModelContext& ctx, int overuse_limit) {
  if (overuse_limit < 1) throw ModelError("overuse_limit must be positive");
  struct PathRef {
    int var;
    int driver;
    std::vector<int> interior;
  };
  std::vector<PathRef> refs;
  for (int i = 0; i < model.var_count(); ++i) {
    const VarId& id = model.var(i);
    if (id.cls != VarClass::P) continue;
    const auto& path = cached_paths(ctx, id.a, id.b).at(id.c);
    refs.push_back({i, id.a, path.interior_sorted()});
  }
  // Paths through each routing vertex.
  std::map<int, std::vector<int>> through;
  for (int r = 0; r < static_cast<int>(refs.size()); ++r)
    for (int n : refs[r].interior) through[n].push_back(r);

  if (overuse_limit == 1) {
    // Pairwise exact form. Pairs are discovered per shared vertex; the
    // canonical-form dedup drops repeats across vertices.
    for (const auto& [n, rs] : through)
      for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
          const auto& a = refs[rs[i]];
          const auto& b = refs[rs[j]];
          if (a.driver == b.driver) continue;
          model.add_unique_constraint(
              {{{1, a.var}, {1, b.var}}, Relation::Le, 1, ConstraintTag::PathExclusivity});
        }
    return;
  }

  // Per-vertex relaxation: if path q (driver u) uses n, at most limit - 1
  // paths of other drivers may use n as well:
  //   sum_{q' through n, driver != u} p_q' + M p_q <= (limit - 1) + M
  // with M = max(1, others - (limit - 1)), which is vacuous when p_q = 0.
  const std::int64_t cap = overuse_limit - 1;
  for (const auto& [n, rs] : through) {
    for (int r : rs) {
      std::vector<Term> terms;
      for (int r2 : rs)
        if (refs[r2].driver != refs[r].driver) terms.push_back({1, refs[r2].var});
      if (terms.empty()) continue;
      std::int64_t big_m = std::max<std::int64_t>(1, static_cast<std::int64_t>(terms.size()) - cap);
      terms.push_back({big_m, refs[r].var});
      model.add_unique_constraint({std::move(terms), Relation::Le, cap + big_m, ConstraintTag::PathExclusivity});
    }
  }
}

void set_cost_function(IlpModel& model, const std::map<VarId, std::int64_t>& k_coeffs,
                       const std::map<VarId, std::int64_t>& l_coeffs,
                       const std::map<VarId, std::int64_t>& m_coeffs) {
  std::vector<Term> terms;
  auto add = [&](const std::map<VarId, std::int64_t>& coeffs, VarClass expected, const char* what) {
    for (const auto& [id, coef] : coeffs) {
      if (id.cls != expected) throw ModelError(std::string(what) + " coefficient on a variable of another class");
      int idx = model.find(id);
      if (idx < 0) throw ModelError(std::string(what) + " coefficient for an undeclared variable");
      if (coef != 0) terms.push_back({coef, idx});
    }
  };
  add(k_coeffs, VarClass::F, "k");
  add(l_coeffs, VarClass::E, "l");
  add(m_coeffs, VarClass::P, "m");
  model.set_objective(std::move(terms));
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::PlacementOnly: return "placement_only";
    case Variant::RelaxedPlacement: return "relaxed_placement";
    case Variant::RoutingOnly: return "routing_only";
    case Variant::Combined: return "combined";
  }
  return "?";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (Variant v : {Variant::PlacementOnly, Variant::RelaxedPlacement, Variant::RoutingOnly, Variant::Combined})
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

std::vector<std::pair<int, int>> placement_connections(const Dfg& dfg, const Placement& placement) {
  std::set<std::pair<int, int>> s;
  for (const auto& pr : dfg.pairs()) {
    int u = placement.at(pr.driver), v = placement.at(pr.sink);
    if (u >= 0 && v >= 0) s.emplace(u, v);
  }
  return {s.begin(), s.end()};
}

std::vector<std::pair<int, int>> candidate_connections(const ModelContext& ctx) {
  const auto& nmap = need_nmap(ctx);
  std::set<std::pair<int, int>> s;
  for (const auto& pr : ctx.dfg.pairs()) {
    const auto& cp = ctx.compat[pr.sink];
    for (int u : ctx.compat[pr.driver])
      for (int v : nmap.of(u))
        if (std::binary_search(cp.begin(), cp.end(), v)) s.emplace(u, v);
  }
  return {s.begin(), s.end()};
}

namespace {

IlpModel build_routing_only(const ModelContext& ctx, const ModelParams& params, const Placement& placement) {
  if (static_cast<int>(placement.size()) != ctx.dfg.size())
    throw ModelError("placement size does not match the DFG");
  IlpModel model;
  model.meta = {std::string(variant_name(Variant::RoutingOnly)), ctx.nmap ? ctx.nmap->target_nn : 0,
                ctx.cache ? ctx.cache->k() : 0, params.routing_paths, 1};
  // E variables for the placed connections, fixed to 1.
  for (const auto& pr : ctx.dfg.pairs()) {
    int u = placement[pr.driver], v = placement[pr.sink];
    if (u < 0 || v < 0) continue;
    VarId id = VarId::e(pr.driver, u, pr.sink, v);
    int e = model.add_variable(id, var_name(ctx, id));
    model.add_constraint({{{1, e}}, Relation::Eq, 1, ConstraintTag::Fixed});
  }
  if (model.var_count() == 0) return model;
  declare_p_vars(model, ctx, params.routing_paths);
  add_path_required(model, ctx);
  add_path_exclusivity(model, ctx, 1);
  return model;
}

}  // namespace

IlpModel build_variant(Variant variant, const ModelContext& ctx, const ModelParams& params,
                       const Placement* placement) {
  if (variant == Variant::RoutingOnly) {
    if (!placement) throw ModelError("routing_only needs a fixed placement");
    return build_routing_only(ctx, params, *placement);
  }
  IlpModel model;
  int ppc = variant == Variant::RelaxedPlacement ? params.paths_per_connection
            : variant == Variant::Combined       ? params.combined_paths
                                                 : 0;
  int limit = variant == Variant::RelaxedPlacement ? params.overuse_limit : variant == Variant::Combined ? 1 : 0;
  model.meta = {std::string(variant_name(variant)), need_nmap(ctx).target_nn, ctx.cache ? ctx.cache->k() : 0, ppc,
                limit};
  declare_f_vars(model, ctx);
  declare_e_vars(model, ctx);
  if (variant != Variant::PlacementOnly) declare_p_vars(model, ctx, ppc);

  add_fu_exclusivity(model, ctx);
  add_must_map(model, ctx, params.allow_duplication);
  add_fanin_required(model, ctx);
  add_fanout_implies_usage(model, ctx);
  if (variant != Variant::PlacementOnly) {
    add_path_required(model, ctx);
    add_path_exclusivity(model, ctx, limit);
  }
  return model;
}

}  // namespace cgra
