#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cgra/dfg.hpp"
#include "cgra/mrrg.hpp"
#include "cgra/neighbors.hpp"
#include "cgra/paths.hpp"

namespace cgra {

/// F(o, u): op o on FU u.  E(o, u, p, v): DFG edge (o, p) carried from u to v.
/// P(u, v, q): path q of pathsfor(u, v) in use.  R(net, node): generic-baseline
/// usage of an MRRG node by the value driven by op `net`.  X(i): anonymous
/// variable of an imported model.
enum class VarClass : std::uint8_t { F, E, P, R, X };

struct VarId {
  VarClass cls = VarClass::X;
  int a = -1, b = -1, c = -1, d = -1;

  static VarId f(int op, int fu) { return {VarClass::F, op, fu, -1, -1}; }
  static VarId e(int o, int u, int p, int v) { return {VarClass::E, o, u, p, v}; }
  static VarId p(int u, int v, int q) { return {VarClass::P, u, v, q, -1}; }
  static VarId r(int net, int node) { return {VarClass::R, net, node, -1, -1}; }
  static VarId x(int i) { return {VarClass::X, i, -1, -1, -1}; }

  auto operator<=>(const VarId&) const = default;
};

std::string_view var_class_name(VarClass c);

enum class Relation : std::uint8_t { Le, Eq, Ge };

enum class ConstraintTag : std::uint8_t {
  FuExclusivity,
  MustMap,
  FaninRequired,
  FanoutImpliesUsage,
  PathRequired,
  PathExclusivity,
  Fixed,             // variable fixing
  Cut,               // solver-side no-good / lazy cuts
  RouteExclusivity,  // generic baseline
  RouteFanout,
  RouteFanin,
  RouteSource,
  RouteSink,
  Generic,
};

inline constexpr int kConstraintTagCount = 14;
std::string_view constraint_tag_name(ConstraintTag t);

struct Term {
  std::int64_t coef = 0;
  int var = -1;

  bool operator==(const Term&) const = default;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Relation rel = Relation::Le;
  std::int64_t rhs = 0;
  ConstraintTag tag = ConstraintTag::Generic;

  bool operator==(const LinearConstraint&) const = default;
};

struct ModelMeta {
  std::string variant;
  int nn = 0;
  int k = 0;
  int paths_per_connection = 0;
  int overuse_limit = 0;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 0/1 variables with linear constraints and an optional linear objective.
class IlpModel {
 public:
  ModelMeta meta;

  int add_variable(const VarId& id, std::string name);
  int find(const VarId& id) const;
  int var_count() const { return static_cast<int>(vars_.size()); }
  const VarId& var(int i) const { return vars_[i]; }
  const std::string& name(int i) const { return names_[i]; }
  const std::vector<VarId>& variables() const { return vars_; }

  /// Merges repeated variables and drops zero coefficients.
  void add_constraint(LinearConstraint c);
  /// As add_constraint, but skips a constraint whose canonical form
  /// (sorted terms, relation, rhs) was already added this way. Returns
  /// whether it was added.
  bool add_unique_constraint(LinearConstraint c);
  const std::vector<LinearConstraint>& constraints() const { return cons_; }

  void set_objective(std::vector<Term> terms);
  const std::vector<Term>& objective() const { return objective_; }

  /// Set when a builder proves infeasibility without search (e.g. an
  /// operation with no compatible FU).
  void mark_infeasible(std::string reason);
  bool infeasible_by_construction() const { return infeasible_.has_value(); }
  const std::string& infeasible_reason() const;

  /// Checks an assignment against every constraint; returns the index of the
  /// first violated one or -1.
  int first_violation(const std::vector<std::uint8_t>& assignment) const;
  std::int64_t objective_value(const std::vector<std::uint8_t>& assignment) const;

  /// Variables of the given class, in declaration order.
  std::vector<int> vars_of(VarClass c) const;

 private:
  std::vector<VarId> vars_;
  std::vector<std::string> names_;
  std::map<VarId, int> index_;
  std::vector<LinearConstraint> cons_;
  std::map<std::string, int> names_taken_;
  std::map<std::tuple<std::vector<std::pair<int, std::int64_t>>, int, std::int64_t>, int> canon_;
  std::vector<Term> objective_;
  std::optional<std::string> infeasible_;
};

/// Per-family and per-class counts, in the layout "No. Constraints / No. Variables".
struct ModelStats {
  std::string variant;
  int variables = 0;
  int constraints = 0;
  std::map<std::string, int> by_class;
  std::map<std::string, int> by_tag;
};

ModelStats model_stats(const IlpModel& model);
std::string format_model_stats(const ModelStats& stats);

/// op index -> FU node, -1 when unplaced.
using Placement = std::vector<int>;

/// Everything the constraint builders read. All members must describe the
/// same MRRG.
struct ModelContext {
  const Dfg& dfg;
  const Mrrg& mrrg;
  std::vector<std::vector<int>> compat;  // per op, from compatible_nodes
  const NeighborMap* nmap = nullptr;
  const PathCache* cache = nullptr;

  ModelContext(const Dfg& g, const Mrrg& m, const NeighborMap* n = nullptr, const PathCache* c = nullptr);
};

std::string var_name(const ModelContext& ctx, const VarId& id);

void declare_f_vars(IlpModel& model, const ModelContext& ctx);
/// E vars for every DFG pair (o, p), u in compat(o), v in compat(p) ∩ N(u).
void declare_e_vars(IlpModel& model, const ModelContext& ctx);
/// P vars for the first `paths_per_connection` paths of every (u, v) used by
/// an E variable.
void declare_p_vars(IlpModel& model, const ModelContext& ctx, int paths_per_connection);

/// At most one op per FU.
void add_fu_exclusivity(IlpModel& model, const ModelContext& ctx);
/// Must-map over the cover set: exactly one FU (at least one with duplication).
/// Without duplication the remaining ops get an at-most-one row so placements
/// stay single-valued.
void add_must_map(IlpModel& model, const ModelContext& ctx, bool allow_duplication = false);
/// Fanin required: f_pv <= sum of e_oupv over neighbouring candidate drivers u.
void add_fanin_required(IlpModel& model, const ModelContext& ctx);
/// Fanout implies usage: e_oupv <= f_ou.
void add_fanout_implies_usage(IlpModel& model, const ModelContext& ctx);
/// Path required: e_oupv <= sum_q p_uvq over declared P vars of (u, v).
void add_path_required(IlpModel& model, const ModelContext& ctx);
/// Path exclusivity. With overuse_limit == 1, p_uvq + p_wxz <= 1 for every incompatible
/// pair (deduplicated). With a larger limit the relaxation is per vertex: a
/// used path through vertex n admits at most overuse_limit - 1 paths of other
/// drivers through n.
void add_path_exclusivity(IlpModel& model, const ModelContext& ctx, int overuse_limit);

/// Cost function. Keys must name declared variables; missing entries are zero.
void set_cost_function(IlpModel& model, const std::map<VarId, std::int64_t>& k_coeffs,
                       const std::map<VarId, std::int64_t>& l_coeffs,
                       const std::map<VarId, std::int64_t>& m_coeffs);

enum class Variant { PlacementOnly, RelaxedPlacement, RoutingOnly, Combined };

std::string_view variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

struct ModelParams {
  int paths_per_connection = 3;  // relaxed placement
  int combined_paths = 20;       // combined
  int routing_paths = 20;        // routing only
  int overuse_limit = 2;         // relaxed placement
  bool allow_duplication = false;
};

/// placement_only: exclusivity, must-map, fanin and fanout rows.
/// relaxed_placement: those plus path-required and relaxed path exclusivity.
/// routing_only: E fixed from `placement`, path-required and exact path
/// exclusivity. combined: every family, exact. routing_only requires a placement and cache entries for its pairs.
IlpModel build_variant(Variant variant, const ModelContext& ctx, const ModelParams& params,
                       const Placement* placement = nullptr);

/// (u, v) FU pairs a placement needs routed, one per distinct DFG pair.
std::vector<std::pair<int, int>> placement_connections(const Dfg& dfg, const Placement& placement);

/// FU pairs that E variables could use at the context's neighbour map.
std::vector<std::pair<int, int>> candidate_connections(const ModelContext& ctx);

}  // namespace cgra
