#include "apa/cfg.hpp"

#include "apa/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace apa {
namespace {

const IdSet kEmptySet;

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Splits a record into whitespace-separated fields; a double-quoted field
// may contain spaces and backslash escapes.
std::vector<std::string> fields(std::string_view line, int lineno) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') { ++i; continue; }
    if (line[i] == '"') {
      std::string f;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '\\' && i < line.size()) { f += line[i++]; continue; }
        if (c == '"') { closed = true; break; }
        f += c;
      }
      if (!closed) throw ParseError("unterminated string", lineno, static_cast<int>(i));
      out.push_back("\"" + f);  // leading quote marks a string field
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_string(const std::string& f) { return !f.empty() && f[0] == '"'; }
std::string unquote(const std::string& f) { return f.substr(1); }

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

bool skippable(const std::vector<std::string>& f) { return f.empty() || f[0][0] == '#'; }

lang::EdgeStmt parse_stmt_field(const std::string& text, bool condition, int lineno) {
  try {
    return lang::parse_edge_stmt(text, condition);
  } catch (const ParseError& e) {
    throw ParseError("bad statement \"" + text + "\": " + e.message(), lineno, 1);
  }
}

} // namespace

NodeId Cfg::add_node(std::string name) {
  if (node_names_.count(name)) throw Error("duplicate node id '" + name + "'");
  NodeId id = static_cast<NodeId>(nodes_.size());
  node_names_.emplace(name, id);
  nodes_.push_back(CfgNode{std::move(name), true, {}, {}});
  return id;
}

EdgeId Cfg::add_edge(std::string name, NodeId src, NodeId dst, lang::EdgeStmt stmt,
                     std::optional<Polarity> cond) {
  if (edge_names_.count(name)) throw Error("duplicate edge id '" + name + "'");
  if (src >= nodes_.size() || dst >= nodes_.size() || !nodes_[src].live || !nodes_[dst].live)
    throw Error("edge '" + name + "' has an unknown endpoint");
  return new_edge(name, src, dst, std::move(stmt), cond);
}

EdgeId Cfg::add_retired_edge(std::string name) {
  if (edge_names_.count(name)) throw Error("duplicate edge id '" + name + "'");
  EdgeId id = static_cast<EdgeId>(edges_.size());
  edge_names_.emplace(name, id);
  CfgEdge e;
  e.name = std::move(name);
  e.live = false;
  edges_.push_back(std::move(e));
  return id;
}

void Cfg::rename_node(NodeId n, std::string name) {
  auto& node = nodes_.at(n);
  if (node.name == name) return;
  if (node_names_.count(name)) throw Error("duplicate node id '" + name + "'");
  node_names_.erase(node.name);
  node_names_.emplace(name, n);
  node.name = std::move(name);
}

void Cfg::add_secret(std::string_view var) {
  intern(var);
  if (std::find(secrets_.begin(), secrets_.end(), var) == secrets_.end())
    secrets_.emplace_back(var);
}

NodeId Cfg::exit() const {
  for (NodeId n = 0; n < nodes_.size(); ++n) {
    if (!nodes_[n].live || !nodes_[n].out.empty()) continue;
    if (n != entry_ || live_edges_ == 0) return n;
  }
  return live_edges_ == 0 ? entry_ : kNoNode;
}

std::vector<EdgeId> Cfg::live_edges() const {
  std::vector<EdgeId> out;
  out.reserve(live_edges_);
  for (EdgeId e = 0; e < edges_.size(); ++e)
    if (edges_[e].live) out.push_back(e);
  return out;
}

std::vector<NodeId> Cfg::live_nodes() const {
  std::vector<NodeId> out;
  for (NodeId n = 0; n < nodes_.size(); ++n)
    if (nodes_[n].live) out.push_back(n);
  return out;
}

std::optional<EdgeId> Cfg::find_edge(std::string_view name) const {
  auto it = edge_names_.find(std::string(name));
  if (it == edge_names_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> Cfg::find_node(std::string_view name) const {
  auto it = node_names_.find(std::string(name));
  if (it == node_names_.end()) return std::nullopt;
  return it->second;
}

VarId Cfg::intern(std::string_view var) {
  auto it = var_ids_.find(std::string(var));
  if (it != var_ids_.end()) return it->second;
  VarId id = static_cast<VarId>(vars_.size());
  vars_.emplace_back(var);
  var_ids_.emplace(std::string(var), id);
  defs_.emplace_back();
  return id;
}

std::optional<VarId> Cfg::find_var(std::string_view var) const {
  auto it = var_ids_.find(std::string(var));
  if (it == var_ids_.end()) return std::nullopt;
  return it->second;
}

const IdSet& Cfg::defs_of(VarId v) const { return v < defs_.size() ? defs_[v] : kEmptySet; }

void Cfg::set_stmt(EdgeId id, lang::EdgeStmt stmt) {
  CfgEdge& e = edges_[id];
  if (e.def != kNoVar) defs_[e.def].erase(id);
  e.def = kNoVar;
  e.uses = IdSet();
  if (stmt.kind == lang::EdgeStmt::Kind::Assign) e.def = intern(stmt.target);
  std::vector<std::uint32_t> uses;
  for (const auto& u : stmt.uses) uses.push_back(intern(u));
  e.uses = IdSet(std::move(uses));
  e.stmt = std::move(stmt);
  if (e.def != kNoVar && e.live) defs_[e.def].insert(id);
}

void Cfg::unlink(EdgeId id) {
  CfgEdge& e = edges_[id];
  auto drop = [id](std::vector<EdgeId>& v) { v.erase(std::find(v.begin(), v.end(), id)); };
  drop(nodes_[e.src].out);
  drop(nodes_[e.dst].in);
}

void Cfg::link(EdgeId id) {
  CfgEdge& e = edges_[id];
  nodes_[e.src].out.push_back(id);
  nodes_[e.dst].in.push_back(id);
}

NodeId Cfg::fresh_node() {
  std::size_t k = nodes_.size() + 1;
  while (node_names_.count("n" + std::to_string(k))) ++k;
  return add_node("n" + std::to_string(k));
}

EdgeId Cfg::new_edge(const std::string& name, NodeId src, NodeId dst, lang::EdgeStmt stmt,
                     std::optional<Polarity> cond) {
  EdgeId id = static_cast<EdgeId>(edges_.size());
  edge_names_.emplace(name, id);
  CfgEdge e;
  e.name = name;
  e.src = src;
  e.dst = dst;
  e.cond = cond;
  edges_.push_back(std::move(e));
  ++live_edges_;
  set_stmt(id, std::move(stmt));
  link(id);
  return id;
}

bool Cfg::connected() const {
  if (live_edges_ == 0) return true;
  NodeId t = exit();
  if (t == kNoNode) return false;
  // Every live node must be reachable from the entry and reach the exit.
  auto sweep = [&](NodeId start, bool forward) {
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<NodeId> work{start};
    seen[start] = 1;
    while (!work.empty()) {
      NodeId n = work.front();
      work.pop_front();
      for (EdgeId e : forward ? nodes_[n].out : nodes_[n].in) {
        NodeId m = forward ? edges_[e].dst : edges_[e].src;
        if (!seen[m]) { seen[m] = 1; work.push_back(m); }
      }
    }
    return seen;
  };
  auto fwd = sweep(entry_, true);
  auto bwd = sweep(t, false);
  for (NodeId n = 0; n < nodes_.size(); ++n)
    if (nodes_[n].live && (!fwd[n] || !bwd[n])) return false;
  return true;
}

AppliedChange Cfg::apply(const ChangeOp& op) {
  Cfg scratch = *this;
  AppliedChange r = scratch.apply_unchecked(op);
  if (!scratch.connected())
    throw ChangeError("change would disconnect the graph");
  *this = std::move(scratch);
  return r;
}

AppliedChange Cfg::apply_unchecked(const ChangeOp& op) {
  auto live_edge = [&](const std::string& name) -> EdgeId {
    auto id = find_edge(name);
    if (!id) throw ChangeError("unknown edge '" + name + "'");
    if (!edges_[*id].live) throw ChangeError("edge '" + name + "' is deleted");
    return *id;
  };
  auto fresh_name = [&](const std::string& name) {
    if (name.empty() || name == "^" || name == "-")
      throw ChangeError("invalid edge id '" + name + "'");
    if (edge_name_taken(name)) throw ChangeError("edge id '" + name + "' already used");
  };
  auto plain_stmt = [](const std::string& text) {
    try {
      return lang::parse_edge_stmt(text, false);
    } catch (const ParseError& e) {
      throw ChangeError("bad statement \"" + text + "\": " + e.message());
    }
  };

  AppliedChange r;
  r.kind = op.kind;
  switch (op.kind) {
  case ChangeOp::Kind::Add: {
    fresh_name(op.id);
    lang::EdgeStmt stmt = plain_stmt(op.stmt_text);
    if (op.anchor == "^") {
      r.at_start = true;
      if (op.before == "-" || op.before.empty()) {
        if (live_edges_ != 0) throw ChangeError("'^' add needs the edge it precedes");
        NodeId n = fresh_node();
        r.created = new_edge(op.id, entry_, n, std::move(stmt), std::nullopt);
      } else {
        EdgeId b = live_edge(op.before);
        NodeId u = edges_[b].src;
        NodeId n = fresh_node();
        unlink(b);
        edges_[b].src = n;
        link(b);
        r.anchor = b;
        r.created = new_edge(op.id, u, n, std::move(stmt), std::nullopt);
      }
    } else {
      EdgeId a = live_edge(op.anchor);
      NodeId v = edges_[a].dst;
      NodeId n = fresh_node();
      unlink(a);
      edges_[a].dst = n;
      link(a);
      r.anchor = a;
      r.created = new_edge(op.id, n, v, std::move(stmt), std::nullopt);
    }
    r.new_def = edges_[r.created].def;
    break;
  }
  case ChangeOp::Kind::Delete: {
    EdgeId id = live_edge(op.anchor);
    CfgEdge& e = edges_[id];
    r.anchor = id;
    r.old_def = e.def;
    NodeId u = e.src, v = e.dst;
    unlink(id);
    e.live = false;
    --live_edges_;
    if (e.def != kNoVar) defs_[e.def].erase(id);
    if (u == v) break;
    if (nodes_[u].out.empty()) {
      // u falls through to v: fuse u into v.
      for (EdgeId in : std::vector<EdgeId>(nodes_[u].in)) {
        unlink(in);
        edges_[in].dst = v;
        link(in);
      }
      nodes_[u].live = false;
      if (entry_ == u) entry_ = v;
    } else if (nodes_[v].in.empty()) {
      if (nodes_[v].out.empty()) throw ChangeError("deleting '" + op.anchor + "' removes the exit");
      // v is entered only through the edge: fuse v into u.
      for (EdgeId out : std::vector<EdgeId>(nodes_[v].out)) {
        unlink(out);
        edges_[out].src = u;
        link(out);
      }
      nodes_[v].live = false;
    }
    break;
  }
  case ChangeOp::Kind::Update: {
    EdgeId id = live_edge(op.anchor);
    bool condition = edges_[id].cond.has_value();
    lang::EdgeStmt stmt;
    try {
      stmt = lang::parse_edge_stmt(op.stmt_text, condition);
    } catch (const ParseError& e) {
      throw ChangeError("bad statement \"" + op.stmt_text + "\": " + e.message());
    }
    r.anchor = id;
    r.old_def = edges_[id].def;
    set_stmt(id, std::move(stmt));
    r.new_def = edges_[id].def;
    break;
  }
  case ChangeOp::Kind::AddLoop: {
    fresh_name(op.id);
    EdgeId a = live_edge(op.anchor);
    NodeId u = edges_[a].src;
    if (nodes_[u].out.size() != 1 || u == edges_[a].dst)
      throw ChangeError("loop site '" + op.anchor + "' must be the only edge leaving its source");
    r.anchor = a;
    r.created = new_edge(op.id, u, u, plain_stmt(op.stmt_text), std::nullopt);
    r.new_def = edges_[r.created].def;
    break;
  }
  case ChangeOp::Kind::AddBranch: {
    fresh_name(op.id);
    EdgeId a = live_edge(op.anchor);
    r.anchor = a;
    r.created = new_edge(op.id, edges_[a].src, edges_[a].dst, plain_stmt(op.stmt_text),
                         std::nullopt);
    r.new_def = edges_[r.created].def;
    break;
  }
  }
  return r;
}

Cfg apply_change(const Cfg& g, const ChangeOp& op) {
  Cfg out = g;
  out.apply(op);
  return out;
}

Cfg parse_cfg_text(std::string_view text) {
  Cfg g;
  bool have_entry = false;
  std::string entry_name;
  int entry_line = 0;
  int lineno = 0;
  for (std::string_view line : lines_of(text)) {
    ++lineno;
    auto f = fields(line, lineno);
    if (skippable(f)) continue;
    const std::string& kind = f[0];
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (f.size() < lo || f.size() > hi)
        throw ParseError("wrong number of fields for '" + kind + "'", lineno, 1);
    };
    auto name_field = [&](std::size_t i) {
      if (is_string(f[i])) throw ParseError("expected an id, found a string", lineno, 1);
      return f[i];
    };
    if (kind == "entry") {
      arity(2, 2);
      if (have_entry) throw ParseError("duplicate entry record", lineno, 1);
      have_entry = true;
      entry_name = name_field(1);
      entry_line = lineno;
    } else if (kind == "node") {
      arity(2, 2);
      try {
        g.add_node(name_field(1));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno, 1);
      }
    } else if (kind == "secret") {
      arity(2, 2);
      g.add_secret(name_field(1));
    } else if (kind == "retired") {
      arity(2, 2);
      try {
        g.add_retired_edge(name_field(1));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno, 1);
      }
    } else if (kind == "edge") {
      arity(5, 6);
      std::string id = name_field(1);
      auto src = g.find_node(name_field(2));
      auto dst = g.find_node(name_field(3));
      if (!src || !dst) throw ParseError("edge '" + id + "' references an undeclared node", lineno, 1);
      if (!is_string(f[4])) throw ParseError("expected a quoted statement", lineno, 1);
      std::optional<Polarity> cond;
      if (f.size() == 6) {
        if (f[5] == "cond:then") cond = Polarity::Then;
        else if (f[5] == "cond:else") cond = Polarity::Else;
        else throw ParseError("expected cond:then or cond:else", lineno, 1);
      }
      lang::EdgeStmt stmt = parse_stmt_field(unquote(f[4]), cond.has_value(), lineno);
      try {
        g.add_edge(id, *src, *dst, std::move(stmt), cond);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno, 1);
      }
    } else {
      throw ParseError("unknown record '" + kind + "'", lineno, 1);
    }
  }
  if (!have_entry) throw ParseError("missing entry record", lineno + 1, 1);
  auto entry = g.find_node(entry_name);
  if (!entry) throw ParseError("entry node '" + entry_name + "' is not declared", entry_line, 1);
  g.set_entry(*entry);
  return g;
}

std::string emit_cfg_text(const Cfg& g) {
  std::string out = "entry " + g.node(g.entry()).name + "\n";
  for (const auto& s : g.secrets()) out += "secret " + s + "\n";
  for (NodeId n : g.live_nodes()) out += "node " + g.node(n).name + "\n";
  for (EdgeId id = 0; id < g.edge_slots(); ++id) {
    const CfgEdge& e = g.edge(id);
    if (!e.live) {
      out += "retired " + e.name + "\n";
      continue;
    }
    out += "edge " + e.name + " " + g.node(e.src).name + " " + g.node(e.dst).name + " " +
           quote(e.stmt.text);
    if (e.cond) out += *e.cond == Polarity::Then ? " cond:then" : " cond:else";
    out += "\n";
  }
  return out;
}

std::vector<ChangeOp> parse_change_script(std::string_view text) {
  std::vector<ChangeOp> ops;
  int lineno = 0;
  for (std::string_view line : lines_of(text)) {
    ++lineno;
    auto f = fields(line, lineno);
    if (skippable(f)) continue;
    auto want = [&](std::size_t n, std::size_t stmt_at) {
      if (f.size() != n) throw ParseError("wrong number of fields for '" + f[0] + "'", lineno, 1);
      for (std::size_t i = 1; i < n; ++i) {
        if ((i == stmt_at) != is_string(f[i]))
          throw ParseError(i == stmt_at ? "expected a quoted statement" : "expected an id",
                           lineno, 1);
      }
    };
    ChangeOp op;
    if (f[0] == "add") {
      want(5, 4);
      op.kind = ChangeOp::Kind::Add;
      op.anchor = f[1];
      op.id = f[2];
      op.before = f[3];
      if (op.anchor != "^" && op.before != "-")
        throw ParseError("an add after an edge takes '-' as its source hint", lineno, 1);
      if (op.anchor != "^") op.before.clear();
      op.stmt_text = unquote(f[4]);
    } else if (f[0] == "del") {
      want(2, 0);
      op.kind = ChangeOp::Kind::Delete;
      op.anchor = f[1];
    } else if (f[0] == "upd") {
      want(3, 2);
      op.kind = ChangeOp::Kind::Update;
      op.anchor = f[1];
      op.stmt_text = unquote(f[2]);
    } else if (f[0] == "loop" || f[0] == "branch") {
      want(4, 3);
      op.kind = f[0] == "loop" ? ChangeOp::Kind::AddLoop : ChangeOp::Kind::AddBranch;
      op.anchor = f[1];
      op.id = f[2];
      op.stmt_text = unquote(f[3]);
    } else {
      throw ParseError("unknown change '" + f[0] + "'", lineno, 1);
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

std::string emit_change_script(const std::vector<ChangeOp>& ops) {
  std::string out;
  for (const auto& op : ops) {
    switch (op.kind) {
    case ChangeOp::Kind::Add:
      out += "add " + op.anchor + " " + op.id + " " +
             (op.anchor == "^" ? (op.before.empty() ? "-" : op.before) : "-") + " " +
             quote(op.stmt_text) + "\n";
      break;
    case ChangeOp::Kind::Delete:
      out += "del " + op.anchor + "\n";
      break;
    case ChangeOp::Kind::Update:
      out += "upd " + op.anchor + " " + quote(op.stmt_text) + "\n";
      break;
    case ChangeOp::Kind::AddLoop:
      out += "loop " + op.anchor + " " + op.id + " " + quote(op.stmt_text) + "\n";
      break;
    case ChangeOp::Kind::AddBranch:
      out += "branch " + op.anchor + " " + op.id + " " + quote(op.stmt_text) + "\n";
      break;
    }
  }
  return out;
}

std::string canonical_shape(const Cfg& g) {
  // Depth-first numbering from the entry; out-edges visited in order of
  // (polarity, statement text, slot).
  std::vector<int> label(g.node_slots(), -1);
  std::vector<std::string> rows;
  int next = 0;
  std::vector<NodeId> stack{g.entry()};
  label[g.entry()] = next++;
  auto order = [&](NodeId n) {
    std::vector<EdgeId> out = g.node(n).out;
    std::sort(out.begin(), out.end(), [&](EdgeId a, EdgeId b) {
      const CfgEdge& x = g.edge(a);
      const CfgEdge& y = g.edge(b);
      int px = x.cond ? static_cast<int>(*x.cond) + 1 : 0;
      int py = y.cond ? static_cast<int>(*y.cond) + 1 : 0;
      if (px != py) return px < py;
      if (x.stmt.text != y.stmt.text) return x.stmt.text < y.stmt.text;
      return a < b;
    });
    return out;
  };
  std::vector<std::pair<NodeId, std::vector<EdgeId>>> frames;
  frames.emplace_back(g.entry(), order(g.entry()));
  std::vector<EdgeId> visit_order;
  while (!frames.empty()) {
    auto& [n, out] = frames.back();
    if (out.empty()) {
      frames.pop_back();
      continue;
    }
    EdgeId e = out.front();
    out.erase(out.begin());
    visit_order.push_back(e);
    NodeId d = g.edge(e).dst;
    if (label[d] < 0) {
      label[d] = next++;
      frames.emplace_back(d, order(d));
    }
  }
  std::string result;
  for (EdgeId id : visit_order) {
    const CfgEdge& e = g.edge(id);
    result += std::to_string(label[e.src]) + " -> " + std::to_string(label[e.dst]) + " " +
              quote(e.stmt.text);
    if (e.cond) result += *e.cond == Polarity::Then ? " cond:then" : " cond:else";
    result += "\n";
  }
  return result;
}

} // namespace apa
