#include "cgra/dfg.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace cgra {

namespace {

constexpr std::array<std::string_view, kOpcodeCount> kOpcodeNames = {
    "input", "output", "const", "add", "sub", "mul", "div", "and",
    "or",    "xor",    "shl",   "shr", "cmp", "load", "store",
};

bool is_id_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_id_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Token {
  std::string text;
  int column;  // 1-based
};

// Splits a line into tokens; "->", ",", ":" and "=" are their own tokens.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') break;
    int col = static_cast<int>(i) + 1;
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({"->", col});
      i += 2;
      continue;
    }
    if (c == ',' || c == ':' || c == '=') {
      out.push_back({std::string(1, c), col});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != ',' &&
           line[j] != ':' && line[j] != '=' && line[j] != '#' &&
           !(line[j] == '-' && j + 1 < line.size() && line[j + 1] == '>' && j > i)) {
      ++j;
    }
    out.push_back({std::string(line.substr(i, j - i)), col});
    i = j;
  }
  return out;
}

bool valid_id(std::string_view s) {
  if (s.empty() || !is_id_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_id_char);
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

struct PendingSink {
  std::string id;
  int operand;
  int line, column;
};

struct PendingEdge {
  std::string driver;
  int line, column;
  std::vector<PendingSink> sinks;
};

}  // namespace

std::string_view opcode_name(Opcode op) { return kOpcodeNames[static_cast<std::size_t>(op)]; }

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpcodeNames.size(); ++i) {
    if (kOpcodeNames[i] == name) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

std::string_view dfg_error_kind_name(DfgErrorKind kind) {
  switch (kind) {
    case DfgErrorKind::Syntax: return "syntax";
    case DfgErrorKind::UnknownOpcode: return "unknown-opcode";
    case DfgErrorKind::DuplicateDriver: return "duplicate-driver";
    case DfgErrorKind::DanglingEndpoint: return "dangling-endpoint";
    case DfgErrorKind::DuplicateId: return "duplicate-id";
  }
  return "?";
}

DfgParseError::DfgParseError(DfgErrorKind kind, int line, int column, const std::string& what)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " +
                         std::string(dfg_error_kind_name(kind)) + ": " + what),
      kind_(kind),
      line_(line),
      column_(column) {}

Dfg::Dfg(std::vector<Operation> ops, std::vector<HyperEdge> edges)
    : ops_(std::move(ops)), edges_(std::move(edges)) {
  for (int i = 0; i < size(); ++i) by_id_.emplace(ops_[i].id, i);
  fanout_.assign(ops_.size(), {});
  fanin_.assign(ops_.size(), {});
  std::set<OpPair> pairs;
  for (const HyperEdge& e : edges_) {
    for (const Sink& s : e.sinks) {
      if (e.driver < 0 || e.driver >= size() || s.op < 0 || s.op >= size()) continue;
      pairs.insert({e.driver, s.op});
    }
  }
  pairs_.assign(pairs.begin(), pairs.end());
  for (const OpPair& p : pairs_) {
    fanout_[p.driver].push_back(p.sink);
    fanin_[p.sink].push_back(p.driver);
  }
  for (auto& v : fanin_) std::sort(v.begin(), v.end());
}

int Dfg::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? -1 : it->second;
}

Dfg parse_dfg(std::string_view text) {
  std::vector<Operation> ops;
  std::map<std::string, int, std::less<>> ids;
  std::vector<PendingEdge> pending;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto toks = tokenize(line);
    if (toks.empty()) continue;
    auto fail = [&](const Token& t, const std::string& msg) -> DfgParseError {
      return DfgParseError(DfgErrorKind::Syntax, line_no, t.column, msg);
    };
    auto end_col = static_cast<int>(line.size()) + 1;

    if (toks[0].text == "op") {
      if (toks.size() < 3) throw DfgParseError(DfgErrorKind::Syntax, line_no, end_col, "expected 'op <id> <opcode>'");
      if (!valid_id(toks[1].text)) throw fail(toks[1], "invalid operation id '" + toks[1].text + "'");
      auto opc = opcode_from_name(toks[2].text);
      if (!opc) {
        throw DfgParseError(DfgErrorKind::UnknownOpcode, line_no, toks[2].column,
                            "unknown opcode '" + toks[2].text + "'");
      }
      Operation op{toks[1].text, *opc, std::nullopt};
      if (toks.size() > 3) {
        if (toks.size() != 6 || toks[3].text != "const" || toks[4].text != "=") {
          throw fail(toks[3], "expected 'const=<int>'");
        }
        if (*opc != Opcode::Const) throw fail(toks[3], "const payload on non-const operation");
        std::int64_t v = 0;
        if (!parse_int(toks[5].text, v)) throw fail(toks[5], "invalid integer '" + toks[5].text + "'");
        op.constant = v;
      }
      if (ids.count(op.id)) {
        throw DfgParseError(DfgErrorKind::DuplicateId, line_no, toks[1].column, "duplicate operation id '" + op.id + "'");
      }
      ids.emplace(op.id, static_cast<int>(ops.size()));
      ops.push_back(std::move(op));
    } else if (toks[0].text == "edge") {
      if (toks.size() < 4) throw DfgParseError(DfgErrorKind::Syntax, line_no, end_col, "expected 'edge <driver> -> <sink>:<operand>'");
      if (!valid_id(toks[1].text)) throw fail(toks[1], "invalid driver id '" + toks[1].text + "'");
      if (toks[2].text != "->") throw fail(toks[2], "expected '->'");
      PendingEdge edge{toks[1].text, line_no, toks[1].column, {}};
      std::size_t i = 3;
      while (true) {
        if (i + 2 >= toks.size()) {
          throw DfgParseError(DfgErrorKind::Syntax, line_no, i < toks.size() ? toks[i].column : end_col,
                              "expected '<sink>:<operand>'");
        }
        const Token& sid = toks[i];
        if (!valid_id(sid.text)) throw fail(sid, "invalid sink id '" + sid.text + "'");
        if (toks[i + 1].text != ":") throw fail(toks[i + 1], "expected ':'");
        int operand = 0;
        if (!parse_int(toks[i + 2].text, operand) || operand < 0) {
          throw fail(toks[i + 2], "invalid operand index '" + toks[i + 2].text + "'");
        }
        edge.sinks.push_back({sid.text, operand, line_no, sid.column});
        i += 3;
        if (i == toks.size()) break;
        if (toks[i].text != ",") throw fail(toks[i], "expected ','");
        ++i;
        if (i == toks.size()) throw DfgParseError(DfgErrorKind::Syntax, line_no, end_col, "trailing ','");
      }
      pending.push_back(std::move(edge));
    } else {
      throw fail(toks[0], "expected 'op' or 'edge'");
    }
  }

  std::vector<HyperEdge> edges;
  std::set<std::pair<int, int>> driven;
  for (const PendingEdge& pe : pending) {
    auto d = ids.find(pe.driver);
    if (d == ids.end()) {
      throw DfgParseError(DfgErrorKind::DanglingEndpoint, pe.line, pe.column, "unknown driver '" + pe.driver + "'");
    }
    HyperEdge e{d->second, {}};
    for (const PendingSink& ps : pe.sinks) {
      auto s = ids.find(ps.id);
      if (s == ids.end()) {
        throw DfgParseError(DfgErrorKind::DanglingEndpoint, ps.line, ps.column, "unknown sink '" + ps.id + "'");
      }
      if (!driven.insert({s->second, ps.operand}).second) {
        throw DfgParseError(DfgErrorKind::DuplicateDriver, ps.line, ps.column,
                            "operand " + ps.id + ":" + std::to_string(ps.operand) + " already has a driver");
      }
      e.sinks.push_back({s->second, ps.operand});
    }
    edges.push_back(std::move(e));
  }
  return Dfg(std::move(ops), std::move(edges));
}

Dfg load_dfg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open DFG file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_dfg(ss.str());
  } catch (const DfgParseError& e) {
    throw DfgParseError(e.kind(), e.line(), e.column(), path + ": " + e.what());
  }
}

std::string serialize_dfg(const Dfg& dfg) {
  std::string out;
  for (const Operation& op : dfg.ops()) {
    out += "op " + op.id + " " + std::string(opcode_name(op.opcode));
    if (op.constant) out += " const=" + std::to_string(*op.constant);
    out += '\n';
  }
  for (const HyperEdge& e : dfg.edges()) {
    out += "edge " + dfg.ops()[e.driver].id + " ->";
    for (std::size_t i = 0; i < e.sinks.size(); ++i) {
      out += (i == 0 ? " " : ", ");
      out += dfg.ops()[e.sinks[i].op].id + ":" + std::to_string(e.sinks[i].operand);
    }
    out += '\n';
  }
  return out;
}

std::vector<DfgViolation> validate_dfg(const Dfg& dfg) {
  std::vector<DfgViolation> out;
  std::set<std::string> seen;
  for (const Operation& op : dfg.ops()) {
    if (!seen.insert(op.id).second) out.push_back({DfgErrorKind::DuplicateId, "duplicate operation id '" + op.id + "'"});
    if (op.constant && op.opcode != Opcode::Const) {
      out.push_back({DfgErrorKind::Syntax, "operation '" + op.id + "' carries a constant but is not const"});
    }
  }
  auto name = [&](int i) { return (i >= 0 && i < dfg.size()) ? dfg.ops()[i].id : "#" + std::to_string(i); };
  std::set<std::pair<int, int>> driven;
  for (const HyperEdge& e : dfg.edges()) {
    if (e.driver < 0 || e.driver >= dfg.size()) {
      out.push_back({DfgErrorKind::DanglingEndpoint, "edge driver " + name(e.driver) + " does not exist"});
    }
    for (const Sink& s : e.sinks) {
      if (s.op < 0 || s.op >= dfg.size()) {
        out.push_back({DfgErrorKind::DanglingEndpoint,
                       "edge " + name(e.driver) + " -> " + name(s.op) + " names a missing sink"});
        continue;
      }
      if (!driven.insert({s.op, s.operand}).second) {
        out.push_back({DfgErrorKind::DuplicateDriver,
                       "operand " + name(s.op) + ":" + std::to_string(s.operand) + " has more than one driver"});
      }
    }
  }
  return out;
}

std::vector<bool> fanin_cone(const Dfg& dfg, const std::vector<int>& roots) {
  std::vector<bool> seen(dfg.size(), false);
  std::vector<int> stack;
  for (int r : roots) {
    if (!seen[r]) {
      seen[r] = true;
      stack.push_back(r);
    }
  }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : dfg.fanin(v)) {
      if (!seen[u]) {
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  return seen;
}

std::vector<int> cover_set(const Dfg& dfg) {
  const int n = dfg.size();
  std::vector<int> cover;
  for (int v = 0; v < n; ++v) {
    if (dfg.fanout(v).empty()) cover.push_back(v);
  }
  std::vector<bool> covered = fanin_cone(dfg, cover);

  // Tarjan over the uncovered subgraph. Uncovered vertices cannot reach covered
  // ones, so every closed SCC of the remainder needs exactly one representative.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  std::function<void(int)> strongconnect = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : dfg.fanout(v)) {
      if (covered[w]) continue;
      if (index[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (int v = 0; v < n; ++v) {
    if (!covered[v] && index[v] < 0) strongconnect(v);
  }

  std::vector<bool> closed(ncomp, true);
  std::vector<int> rep(ncomp, -1);
  for (int v = 0; v < n; ++v) {
    if (covered[v]) continue;
    int c = comp[v];
    if (rep[c] < 0 || dfg.ops()[v].id < dfg.ops()[rep[c]].id) rep[c] = v;
    for (int w : dfg.fanout(v)) {
      if (!covered[w] && comp[w] != c) closed[c] = false;
    }
  }
  for (int c = 0; c < ncomp; ++c) {
    if (closed[c]) cover.push_back(rep[c]);
  }
  std::sort(cover.begin(), cover.end());
  return cover;
}

}  // namespace cgra
