#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cgra/dfg.hpp"

namespace cgra {

enum class NodeKind : std::uint8_t { FunctionUnit, Routing };

/// One (physical node, context) vertex of a modulo routing resource graph.
struct MrrgNode {
  std::string name;  // physical id
  int context = 0;
  NodeKind kind = NodeKind::Routing;
  int latency = 0;
  OpcodeSet ops;  // non-empty iff kind == FunctionUnit
  int x = 0, y = 0;  // grid position of the owning block, for cost functions

  bool is_fu() const { return kind == NodeKind::FunctionUnit; }
};

/// Time-space device graph. Nodes are stored sorted by (name, context), so node
/// indices double as the canonical key order. Immutable once built.
class Mrrg {
 public:
  int ii() const { return ii_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const MrrgNode& node(int v) const { return nodes_[v]; }
  const std::vector<MrrgNode>& nodes() const { return nodes_; }
  const std::vector<int>& fanout(int v) const { return out_[v]; }
  const std::vector<int>& fanin(int v) const { return in_[v]; }
  std::size_t edge_count() const { return edge_count_; }

  /// "name@context"
  std::string key(int v) const;
  int find(std::string_view name, int context) const;
  /// Parses "name@context"; -1 if absent.
  int find_key(std::string_view key) const;

  /// FU vertices in key order.
  const std::vector<int>& fu_nodes() const { return fus_; }

 private:
  friend class MrrgBuilder;
  int ii_ = 1;
  std::vector<MrrgNode> nodes_;
  std::vector<std::vector<int>> out_, in_;
  std::vector<int> fus_;
  std::size_t edge_count_ = 0;
  std::map<std::string, int, std::less<>> index_;
};

/// Describes one context of a device; build() replicates it II times and wires
/// every edge a -> b as (a, t) -> (b, (t + latency(a)) mod II).
class MrrgBuilder {
 public:
  int add_node(std::string name, NodeKind kind, int latency, OpcodeSet ops = {}, int x = 0, int y = 0);
  void add_edge(int from, int to);
  void add_edge(std::string_view from, std::string_view to);
  int find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) >= 0; }
  int physical_count() const { return static_cast<int>(proto_.size()); }

  Mrrg build(int ii) const;

 private:
  std::vector<MrrgNode> proto_;
  std::vector<std::pair<int, int>> edges_;
  std::map<std::string, int, std::less<>> by_name_;
};

enum class Family { Ortho, Adres, HyCube, Clustered };

std::string_view family_name(Family f);

/// Architecture generator parameters. Keys in the text form match field names.
struct ArchSpec {
  Family family = Family::Ortho;
  int rows = 3;
  int cols = 3;
  bool route_through = true;

  // ortho: IO and memory operations run on the PE ALUs; when io_in_pe is off,
  // each west-edge PE gets a dedicated IO unit instead.
  bool io_in_pe = true;
  bool mem_in_pe = true;

  // adres: skip links of this distance; register file IO ports on the top row
  // (0 means one per column); one memory port per row.
  int skip_distance = 2;
  int rf_ports = 0;

  // clustered: cluster shape and inter-cluster links per side.
  int cluster_rows = 2;
  int cluster_cols = 2;
  int inter_cluster_links = 1;

  // hycube: IO units on the north/south/east edges and memory on the west.
  bool io_north = true;
  bool io_south = true;
  bool io_east = true;
  bool mem_west = true;

  bool operator==(const ArchSpec&) const = default;
};

class ArchSpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key=value` lines, `#` comments. Unknown keys and out-of-range values throw.
ArchSpec parse_arch_spec(std::string_view text);
ArchSpec load_arch_spec(const std::string& path);
std::string serialize_arch_spec(const ArchSpec& spec);
void validate_arch_spec(const ArchSpec& spec);
/// Stable 64-bit digest of the canonical text form.
std::uint64_t arch_spec_hash(const ArchSpec& spec);

/// Opcodes executed by PE ALUs in every family.
OpcodeSet alu_opcodes();

Mrrg build_mrrg(const ArchSpec& spec, int ii);

/// FU vertices in (s, t) order.
std::vector<int> fu_nodes(const Mrrg& mrrg);
/// FU vertices that can execute the opcode, in key order.
std::vector<int> compatible_nodes(const Mrrg& mrrg, Opcode opcode);

/// DOT dump with `s@t` node keys, kind and latency.
std::string mrrg_to_dot(const Mrrg& mrrg);

}  // namespace cgra
