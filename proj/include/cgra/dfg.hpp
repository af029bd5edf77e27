#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgra {

/// Closed set of operation kinds understood by the toolkit.
enum class Opcode : std::uint8_t {
  Input,
  Output,
  Const,
  Add,
  Sub,
  Mul,
  Div,
  And,
  Or,
  Xor,
  Shl,
  Shr,
  Cmp,
  Load,
  Store,
};

inline constexpr int kOpcodeCount = 15;

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);

/// Bitset over Opcode.
class OpcodeSet {
 public:
  constexpr OpcodeSet() = default;
  constexpr OpcodeSet(std::initializer_list<Opcode> ops) {
    for (Opcode op : ops) insert(op);
  }

  constexpr void insert(Opcode op) { bits_ |= bit(op); }
  constexpr bool contains(Opcode op) const { return (bits_ & bit(op)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr OpcodeSet operator|(OpcodeSet o) const { return from_bits(bits_ | o.bits_); }
  constexpr bool operator==(const OpcodeSet&) const = default;

  static constexpr OpcodeSet from_bits(std::uint32_t b) {
    OpcodeSet s;
    s.bits_ = b;
    return s;
  }

 private:
  static constexpr std::uint32_t bit(Opcode op) { return 1u << static_cast<unsigned>(op); }
  std::uint32_t bits_ = 0;
};

struct Operation {
  std::string id;
  Opcode opcode = Opcode::Add;
  std::optional<std::int64_t> constant;

  bool operator==(const Operation&) const = default;
};

struct Sink {
  int op = -1;  // index into Dfg::ops()
  int operand = 0;

  bool operator==(const Sink&) const = default;
};

/// One value: a driver and its ordered sinks.
struct HyperEdge {
  int driver = -1;
  std::vector<Sink> sinks;

  bool operator==(const HyperEdge&) const = default;
};

/// A two-point view of the hypergraph, deduplicated on (driver, sink op).
struct OpPair {
  int driver = -1;
  int sink = -1;

  auto operator<=>(const OpPair&) const = default;
};

/// Directed hypergraph of operations. Immutable after construction.
///
/// Construction does not enforce the invariants; call validate_dfg() or use
/// parse_dfg(), which rejects malformed input.
class Dfg {
 public:
  Dfg() = default;
  Dfg(std::vector<Operation> ops, std::vector<HyperEdge> edges);

  const std::vector<Operation>& ops() const { return ops_; }
  const std::vector<HyperEdge>& edges() const { return edges_; }
  int size() const { return static_cast<int>(ops_.size()); }

  /// Index of the operation with the given id, or -1.
  int find(std::string_view id) const;

  /// Distinct (driver, sink) operation pairs, sorted.
  const std::vector<OpPair>& pairs() const { return pairs_; }
  /// Sink operations reachable through one edge from op (sorted, unique).
  const std::vector<int>& fanout(int op) const { return fanout_[op]; }
  /// Driver operations of op's operands (sorted, unique).
  const std::vector<int>& fanin(int op) const { return fanin_[op]; }

  bool operator==(const Dfg& o) const { return ops_ == o.ops_ && edges_ == o.edges_; }

 private:
  std::vector<Operation> ops_;
  std::vector<HyperEdge> edges_;
  std::map<std::string, int, std::less<>> by_id_;
  std::vector<OpPair> pairs_;
  std::vector<std::vector<int>> fanout_;
  std::vector<std::vector<int>> fanin_;
};

enum class DfgErrorKind { Syntax, UnknownOpcode, DuplicateDriver, DanglingEndpoint, DuplicateId };

std::string_view dfg_error_kind_name(DfgErrorKind kind);

class DfgParseError : public std::runtime_error {
 public:
  DfgParseError(DfgErrorKind kind, int line, int column, const std::string& what);

  DfgErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  DfgErrorKind kind_;
  int line_;
  int column_;
};

/// Parses the line-oriented DFG text format:
///
///   # comment
///   op <id> <opcode> [const=<int>]
///   edge <driver> -> <sink>:<operand>[, <sink>:<operand>...]
///
/// Edges may reference operations declared later in the file.
Dfg parse_dfg(std::string_view text);
Dfg load_dfg(const std::string& path);

/// Canonical text form. parse_dfg(serialize_dfg(g)) == g.
std::string serialize_dfg(const Dfg& dfg);

struct DfgViolation {
  DfgErrorKind kind;
  std::string message;
};

std::vector<DfgViolation> validate_dfg(const Dfg& dfg);

/// Operations whose combined fanin cones cover every operation: all sinks,
/// plus the lowest-id member of each closed cycle that no sink reaches.
/// Returned as sorted operation indices.
std::vector<int> cover_set(const Dfg& dfg);

/// Backward-reachable set of each given root (including the roots).
std::vector<bool> fanin_cone(const Dfg& dfg, const std::vector<int>& roots);

}  // namespace cgra
