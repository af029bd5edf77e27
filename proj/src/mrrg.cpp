#include "cgra/mrrg.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cgra {

std::string Mrrg::key(int v) const { return nodes_[v].name + "@" + std::to_string(nodes_[v].context); }

int Mrrg::find(std::string_view name, int context) const {
  std::string k(name);
  k += "@" + std::to_string(context);
  return find_key(k);
}

int Mrrg::find_key(std::string_view key) const {
  auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

int MrrgBuilder::add_node(std::string name, NodeKind kind, int latency, OpcodeSet ops, int x, int y) {
  if (by_name_.count(name)) throw std::logic_error("duplicate MRRG node '" + name + "'");
  if (latency < 0) throw std::logic_error("negative latency on '" + name + "'");
  if ((kind == NodeKind::FunctionUnit) == ops.empty()) {
    throw std::logic_error("FU nodes need opcodes and routing nodes must have none: '" + name + "'");
  }
  int id = physical_count();
  by_name_.emplace(name, id);
  proto_.push_back({std::move(name), 0, kind, latency, ops, x, y});
  return id;
}

void MrrgBuilder::add_edge(int from, int to) { edges_.emplace_back(from, to); }

void MrrgBuilder::add_edge(std::string_view from, std::string_view to) {
  int a = find(from), b = find(to);
  if (a < 0 || b < 0) throw std::logic_error("edge between unknown nodes " + std::string(from) + " -> " + std::string(to));
  add_edge(a, b);
}

int MrrgBuilder::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

Mrrg MrrgBuilder::build(int ii) const {
  if (ii < 1) throw std::invalid_argument("II must be positive");
  const int n = physical_count();
  // Canonical order: by physical name, then context.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return proto_[a].name < proto_[b].name; });
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[order[i]] = i;
  auto id = [&](int phys, int t) { return rank[phys] * ii + t; };

  Mrrg g;
  g.ii_ = ii;
  g.nodes_.resize(static_cast<std::size_t>(n) * ii);
  for (int p = 0; p < n; ++p) {
    for (int t = 0; t < ii; ++t) {
      MrrgNode node = proto_[p];
      node.context = t;
      g.nodes_[id(p, t)] = std::move(node);
    }
  }
  std::set<std::pair<int, int>> edges;
  for (auto [a, b] : edges_) {
    for (int t = 0; t < ii; ++t) {
      edges.emplace(id(a, t), id(b, (t + proto_[a].latency) % ii));
    }
  }
  g.out_.assign(g.nodes_.size(), {});
  g.in_.assign(g.nodes_.size(), {});
  for (auto [a, b] : edges) {
    g.out_[a].push_back(b);
    g.in_[b].push_back(a);
  }
  for (auto& v : g.in_) std::sort(v.begin(), v.end());
  g.edge_count_ = edges.size();
  for (int v = 0; v < g.size(); ++v) {
    g.index_.emplace(g.key(v), v);
    if (g.nodes_[v].is_fu()) g.fus_.push_back(v);
  }
  return g;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Ortho: return "ortho";
    case Family::Adres: return "adres";
    case Family::HyCube: return "hycube";
    case Family::Clustered: return "clustered";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") {
    out = true;
    return true;
  }
  if (v == "false" || v == "0" || v == "off" || v == "no") {
    out = false;
    return true;
  }
  return false;
}

bool parse_int(const std::string& v, int& out) {
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  return ec == std::errc() && p == v.data() + v.size();
}

std::string b2s(bool b) { return b ? "true" : "false"; }

}  // namespace

ArchSpec parse_arch_spec(std::string_view text) {
  ArchSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ArchSpecError("line " + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    auto bad = [&] { return ArchSpecError("line " + std::to_string(line_no) + ": bad value '" + val + "' for " + key); };
    bool ok = true;
    if (key == "family") {
      if (val == "ortho") spec.family = Family::Ortho;
      else if (val == "adres") spec.family = Family::Adres;
      else if (val == "hycube") spec.family = Family::HyCube;
      else if (val == "clustered") spec.family = Family::Clustered;
      else throw bad();
    } else if (key == "rows") ok = parse_int(val, spec.rows);
    else if (key == "cols") ok = parse_int(val, spec.cols);
    else if (key == "route_through") ok = parse_bool(val, spec.route_through);
    else if (key == "io_in_pe") ok = parse_bool(val, spec.io_in_pe);
    else if (key == "mem_in_pe") ok = parse_bool(val, spec.mem_in_pe);
    else if (key == "skip_distance") ok = parse_int(val, spec.skip_distance);
    else if (key == "rf_ports") ok = parse_int(val, spec.rf_ports);
    else if (key == "cluster_rows") ok = parse_int(val, spec.cluster_rows);
    else if (key == "cluster_cols") ok = parse_int(val, spec.cluster_cols);
    else if (key == "inter_cluster_links") ok = parse_int(val, spec.inter_cluster_links);
    else if (key == "io_north") ok = parse_bool(val, spec.io_north);
    else if (key == "io_south") ok = parse_bool(val, spec.io_south);
    else if (key == "io_east") ok = parse_bool(val, spec.io_east);
    else if (key == "mem_west") ok = parse_bool(val, spec.mem_west);
    else throw ArchSpecError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!ok) throw bad();
  }
  validate_arch_spec(spec);
  return spec;
}

ArchSpec load_arch_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArchSpecError("cannot open architecture file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_arch_spec(ss.str());
  } catch (const ArchSpecError& e) {
    throw ArchSpecError(path + ": " + e.what());
  }
}

std::string serialize_arch_spec(const ArchSpec& s) {
  std::ostringstream o;
  o << "family=" << family_name(s.family) << "\nrows=" << s.rows << "\ncols=" << s.cols
    << "\nroute_through=" << b2s(s.route_through) << "\n";
  switch (s.family) {
    case Family::Ortho:
      o << "io_in_pe=" << b2s(s.io_in_pe) << "\nmem_in_pe=" << b2s(s.mem_in_pe) << "\n";
      break;
    case Family::Adres:
      o << "skip_distance=" << s.skip_distance << "\nrf_ports=" << s.rf_ports << "\n";
      break;
    case Family::Clustered:
      o << "cluster_rows=" << s.cluster_rows << "\ncluster_cols=" << s.cluster_cols
        << "\ninter_cluster_links=" << s.inter_cluster_links << "\n";
      break;
    case Family::HyCube:
      o << "io_north=" << b2s(s.io_north) << "\nio_south=" << b2s(s.io_south) << "\nio_east=" << b2s(s.io_east)
        << "\nmem_west=" << b2s(s.mem_west) << "\n";
      break;
  }
  return o.str();
}

void validate_arch_spec(const ArchSpec& s) {
  auto need = [](bool cond, const std::string& msg) {
    if (!cond) throw ArchSpecError(msg);
  };
  need(s.rows >= 1 && s.rows <= 64, "rows must be in [1, 64]");
  need(s.cols >= 1 && s.cols <= 64, "cols must be in [1, 64]");
  switch (s.family) {
    case Family::Ortho: break;
    case Family::Adres:
      need(s.skip_distance >= 2, "skip_distance must be at least 2");
      need(s.rf_ports >= 0 && s.rf_ports <= 64, "rf_ports must be in [0, 64]");
      break;
    case Family::Clustered:
      need(s.cluster_rows >= 1 && s.cluster_cols >= 1, "cluster dimensions must be positive");
      need(s.rows % s.cluster_rows == 0 && s.cols % s.cluster_cols == 0,
           "rows/cols must be multiples of the cluster dimensions");
      need(s.inter_cluster_links >= 1 && s.inter_cluster_links <= 8, "inter_cluster_links must be in [1, 8]");
      break;
    case Family::HyCube: break;
  }
}

std::uint64_t arch_spec_hash(const ArchSpec& spec) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize_arch_spec(spec)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

OpcodeSet alu_opcodes() {
  return {Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::Div, Opcode::And, Opcode::Or,
          Opcode::Xor, Opcode::Shl, Opcode::Shr, Opcode::Cmp};
}

namespace {

const OpcodeSet kIoOps{Opcode::Input, Opcode::Output};
const OpcodeSet kMemOps{Opcode::Load, Opcode::Store};
const OpcodeSet kConstOps{Opcode::Const};
constexpr int kMemLatency = 1;

std::string pe_name(int r, int c) { return "pe_" + std::to_string(r) + "_" + std::to_string(c); }

// PE block: two input muxes forming a full crossbar from the PE's input ports
// (plus its const unit and its own registered output) into a latency-one ALU;
// an optional registered route-through from the input ports to the output.
struct PeBlock {
  MrrgBuilder& b;
  std::string name;
  bool route_through;
  int x = 0, y = 0;

  void create(OpcodeSet alu_ops, int px, int py) {
    x = px;
    y = py;
    b.add_node(name + ".alu", NodeKind::FunctionUnit, 1, alu_ops, x, y);
    b.add_node(name + ".const", NodeKind::FunctionUnit, 0, kConstOps, x, y);
    b.add_node(name + ".mux_a", NodeKind::Routing, 0, {}, x, y);
    b.add_node(name + ".mux_b", NodeKind::Routing, 0, {}, x, y);
    b.add_node(name + ".out", NodeKind::Routing, 0, {}, x, y);
    b.add_edge(name + ".mux_a", name + ".alu");
    b.add_edge(name + ".mux_b", name + ".alu");
    b.add_edge(name + ".alu", name + ".out");
    for (const char* m : {".mux_a", ".mux_b"}) {
      b.add_edge(name + ".const", name + m);
      b.add_edge(name + ".out", name + m);
    }
    if (route_through) {
      b.add_node(name + ".rt", NodeKind::Routing, 1, {}, x, y);
      b.add_edge(name + ".rt", name + ".out");
    }
  }

  // Adds an input port and returns its node name.
  std::string input(const std::string& tag) {
    std::string port = name + ".in_" + tag;
    b.add_node(port, NodeKind::Routing, 0, {}, x, y);
    b.add_edge(port, name + ".mux_a");
    b.add_edge(port, name + ".mux_b");
    if (route_through) b.add_edge(port, name + ".rt");
    return port;
  }

  std::string out() const { return name + ".out"; }
};

void build_ortho_like(MrrgBuilder& b, const ArchSpec& s, bool adres) {
  OpcodeSet ops = alu_opcodes();
  if (!adres && s.io_in_pe) ops = ops | kIoOps;
  if (!adres && s.mem_in_pe) ops = ops | kMemOps;

  std::vector<PeBlock> pes;
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      pes.push_back({b, pe_name(r, c), s.route_through});
      pes.back().create(ops, c, r);
    }
  }
  auto pe = [&](int r, int c) -> PeBlock& { return pes[r * s.cols + c]; };

  struct Dir {
    const char* tag;
    int dr, dc;
  };
  // tag names the side the signal arrives from.
  std::vector<Dir> dirs = {{"S", -1, 0}, {"N", 1, 0}, {"W", 0, -1}, {"E", 0, 1}};
  if (adres) {
    int k = s.skip_distance;
    dirs.push_back({"S2", -k, 0});
    dirs.push_back({"N2", k, 0});
    dirs.push_back({"W2", 0, -k});
    dirs.push_back({"E2", 0, k});
  }
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      for (const Dir& d : dirs) {
        int sr = r + d.dr, sc = c + d.dc;
        if (sr < 0 || sr >= s.rows || sc < 0 || sc >= s.cols) continue;
        std::string port = pe(r, c).input(d.tag);
        b.add_edge(pe(sr, sc).out(), port);
      }
    }
  }

  if (!adres && !s.io_in_pe) {
    for (int r = 0; r < s.rows; ++r) {
      std::string io = "io_w_" + std::to_string(r);
      b.add_node(io, NodeKind::FunctionUnit, 0, kIoOps, -1, r);
      b.add_edge(io, pe(r, 0).input("io"));
      b.add_edge(pe(r, 0).out(), io);
    }
  }

  if (adres) {
    // Register file: IO units fully connected to the top PE row.
    int ports = s.rf_ports == 0 ? s.cols : s.rf_ports;
    int top = s.rows - 1;
    std::vector<std::string> rf;
    for (int j = 0; j < ports; ++j) {
      rf.push_back("rf_" + std::to_string(j));
      b.add_node(rf.back(), NodeKind::FunctionUnit, 0, kIoOps, j, s.rows);
    }
    for (int c = 0; c < s.cols; ++c) {
      std::string pa = pe(top, c).input("rf0"), pb = pe(top, c).input("rf1");
      for (const std::string& port : rf) {
        b.add_edge(port, pa);
        b.add_edge(port, pb);
        b.add_edge(pe(top, c).out(), port);
      }
    }
    // One memory port per row, shared by every PE in the row.
    for (int r = 0; r < s.rows; ++r) {
      std::string mem = "mem_" + std::to_string(r);
      b.add_node(mem, NodeKind::FunctionUnit, kMemLatency, kMemOps, -1, r);
      for (int c = 0; c < s.cols; ++c) {
        b.add_edge(mem, pe(r, c).input("mem"));
        b.add_edge(pe(r, c).out(), mem);
      }
    }
  }
}

// A crossbar is one mux node per output; every output is fed by every input.
struct Crossbar {
  MrrgBuilder& b;
  std::string name;
  std::vector<std::string> inputs;
  // output node name -> inputs to exclude (U-turns)
  std::vector<std::pair<std::string, std::string>> outputs;  // (node, excluded input or "")

  std::string add_output(const std::string& tag, int x, int y, const std::string& exclude = "") {
    std::string node = name + ".to_" + tag;
    b.add_node(node, NodeKind::Routing, 0, {}, x, y);
    outputs.emplace_back(node, exclude);
    return node;
  }

  void wire() {
    for (auto& [out, excl] : outputs) {
      for (const std::string& in : inputs) {
        if (in != excl) b.add_edge(in, out);
      }
    }
  }
};

void attach_mem(MrrgBuilder& b, Crossbar& xb, const std::string& mem, int x, int y) {
  b.add_node(mem, NodeKind::FunctionUnit, kMemLatency, kMemOps, x, y);
  b.add_edge(xb.add_output(mem + "_a", x, y), mem);
  b.add_edge(xb.add_output(mem + "_b", x, y), mem);
  xb.inputs.push_back(mem);
}

void attach_io(MrrgBuilder& b, Crossbar& xb, const std::string& io, int x, int y) {
  b.add_node(io, NodeKind::FunctionUnit, 0, kIoOps, x, y);
  b.add_edge(xb.add_output(io, x, y), io);
  xb.inputs.push_back(io);
}

void attach_pe(MrrgBuilder& b, Crossbar& xb, PeBlock& pe, int x, int y) {
  b.add_edge(xb.add_output(pe.name + "_a", x, y), pe.input("a"));
  b.add_edge(xb.add_output(pe.name + "_b", x, y), pe.input("b"));
  xb.inputs.push_back(pe.out());
}

void build_clustered(MrrgBuilder& b, const ArchSpec& s) {
  const int crs = s.rows / s.cluster_rows, ccs = s.cols / s.cluster_cols;
  std::vector<PeBlock> pes;
  pes.reserve(static_cast<std::size_t>(s.rows) * s.cols);
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      pes.push_back({b, pe_name(r, c), s.route_through});
      pes.back().create(alu_opcodes(), c, r);
    }
  }
  std::vector<Crossbar> xbs;
  xbs.reserve(static_cast<std::size_t>(crs) * ccs);
  for (int i = 0; i < crs; ++i) {
    for (int j = 0; j < ccs; ++j) {
      std::string id = std::to_string(i) + "_" + std::to_string(j);
      xbs.push_back({b, "xb_" + id, {}, {}});
      Crossbar& xb = xbs.back();
      int x = j * s.cluster_cols, y = i * s.cluster_rows;
      for (int r = 0; r < s.cluster_rows; ++r) {
        for (int c = 0; c < s.cluster_cols; ++c) {
          int pr = y + r, pc = x + c;
          attach_pe(b, xb, pes[pr * s.cols + pc], pc, pr);
        }
      }
      attach_mem(b, xb, "mem_" + id, x, y);
      attach_io(b, xb, "io_" + id, x, y);
    }
  }
  auto xb = [&](int i, int j) -> Crossbar& { return xbs[i * ccs + j]; };
  // Inter-cluster links: output "to_<D><l>" of one crossbar is an input of the
  // neighbouring crossbar, which does not send it straight back.
  struct Dir {
    const char* tag;
    const char* back;
    int di, dj;
  };
  const Dir dirs[] = {{"N", "S", 1, 0}, {"S", "N", -1, 0}, {"E", "W", 0, 1}, {"W", "E", 0, -1}};
  std::map<std::string, std::string> link_out;  // "<xb>/<tag><l>" -> node
  for (int i = 0; i < crs; ++i) {
    for (int j = 0; j < ccs; ++j) {
      for (const Dir& d : dirs) {
        int ni = i + d.di, nj = j + d.dj;
        if (ni < 0 || ni >= crs || nj < 0 || nj >= ccs) continue;
        for (int l = 0; l < s.inter_cluster_links; ++l) {
          std::string tag = std::string(d.tag) + std::to_string(l);
          std::string back_tag = std::string(d.back) + std::to_string(l);
          std::string node = xb(i, j).name + ".to_" + tag;
          std::string back_node = xb(ni, nj).name + ".to_" + back_tag;
          xb(i, j).add_output(tag, j * s.cluster_cols, i * s.cluster_rows, back_node);
          xb(ni, nj).inputs.push_back(node);
        }
      }
    }
  }
  for (Crossbar& x : xbs) x.wire();
}

void build_hycube(MrrgBuilder& b, const ArchSpec& s) {
  std::vector<PeBlock> pes;
  pes.reserve(static_cast<std::size_t>(s.rows) * s.cols);
  std::vector<Crossbar> xbs;
  xbs.reserve(pes.capacity());
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      pes.push_back({b, pe_name(r, c), s.route_through});
      pes.back().create(alu_opcodes(), c, r);
      xbs.push_back({b, "xb_" + std::to_string(r) + "_" + std::to_string(c), {}, {}});
      attach_pe(b, xbs.back(), pes.back(), c, r);
    }
  }
  auto xb = [&](int r, int c) -> Crossbar& { return xbs[r * s.cols + c]; };
  for (int r = 0; r < s.rows; ++r) {
    if (s.mem_west) attach_mem(b, xb(r, 0), "mem_w_" + std::to_string(r), -1, r);
    if (s.io_east) attach_io(b, xb(r, s.cols - 1), "io_e_" + std::to_string(r), s.cols, r);
  }
  for (int c = 0; c < s.cols; ++c) {
    if (s.io_north) attach_io(b, xb(s.rows - 1, c), "io_n_" + std::to_string(c), c, s.rows);
    if (s.io_south) attach_io(b, xb(0, c), "io_s_" + std::to_string(c), c, -1);
  }
  struct Dir {
    const char* tag;
    const char* back;
    int dr, dc;
  };
  const Dir dirs[] = {{"N", "S", 1, 0}, {"S", "N", -1, 0}, {"E", "W", 0, 1}, {"W", "E", 0, -1}};
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      for (const Dir& d : dirs) {
        int nr = r + d.dr, nc = c + d.dc;
        if (nr < 0 || nr >= s.rows || nc < 0 || nc >= s.cols) continue;
        std::string node = xb(r, c).name + ".to_" + d.tag;
        xb(r, c).add_output(d.tag, c, r, xb(nr, nc).name + ".to_" + d.back);
        xb(nr, nc).inputs.push_back(node);
      }
    }
  }
  for (Crossbar& x : xbs) x.wire();
}

}  // namespace

Mrrg build_mrrg(const ArchSpec& spec, int ii) {
  validate_arch_spec(spec);
  if (ii < 1) throw ArchSpecError("II must be at least 1");
  MrrgBuilder b;
  switch (spec.family) {
    case Family::Ortho: build_ortho_like(b, spec, false); break;
    case Family::Adres: build_ortho_like(b, spec, true); break;
    case Family::Clustered: build_clustered(b, spec); break;
    case Family::HyCube: build_hycube(b, spec); break;
  }
  return b.build(ii);
}

std::vector<int> fu_nodes(const Mrrg& mrrg) { return mrrg.fu_nodes(); }

std::vector<int> compatible_nodes(const Mrrg& mrrg, Opcode opcode) {
  std::vector<int> out;
  for (int v : mrrg.fu_nodes()) {
    if (mrrg.node(v).ops.contains(opcode)) out.push_back(v);
  }
  return out;
}

std::string mrrg_to_dot(const Mrrg& g) {
  std::ostringstream o;
  o << "digraph mrrg {\n";
  for (int v = 0; v < g.size(); ++v) {
    const MrrgNode& n = g.node(v);
    o << "  \"" << g.key(v) << "\" [label=\"" << g.key(v) << "\\n" << (n.is_fu() ? "fu" : "route")
      << " lat=" << n.latency << "\"" << (n.is_fu() ? ", shape=box" : "") << "];\n";
  }
  for (int v = 0; v < g.size(); ++v) {
    for (int w : g.fanout(v)) o << "  \"" << g.key(v) << "\" -> \"" << g.key(w) << "\";\n";
  }
  o << "}\n";
  return o.str();
}

}  // namespace cgra
