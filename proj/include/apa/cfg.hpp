#pragma once

#include "apa/idset.hpp"
#include "apa/lang.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace apa {

inline constexpr VarId kNoVar = static_cast<VarId>(-1);

enum class Polarity { Then, Else };

struct CfgEdge {
  std::string name;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  lang::EdgeStmt stmt;
  std::optional<Polarity> cond;
  bool live = true;
  VarId def = kNoVar; // variable assigned by the statement, if any
  IdSet uses;         // variables read by the statement or condition
};

struct CfgNode {
  std::string name;
  bool live = true;
  std::vector<EdgeId> out;
  std::vector<EdgeId> in;
};

/// One program change. Edge references are by name.
struct ChangeOp {
  enum class Kind { Add, Delete, Update, AddLoop, AddBranch };
  Kind kind = Kind::Add;
  std::string anchor;    // after-edge ("^" = subprogram start), target, around, beside
  std::string before;    // for "^" adds: the edge the new one is placed in front of
  std::string id;        // name of the edge created by Add/AddLoop/AddBranch
  std::string stmt_text; // statement source for Add/Update/AddLoop/AddBranch

  friend bool operator==(const ChangeOp&, const ChangeOp&) = default;
};

/// What a successfully applied ChangeOp did, in resolved ids.
struct AppliedChange {
  ChangeOp::Kind kind = ChangeOp::Kind::Add;
  EdgeId anchor = kNoEdge;  // after/target/around/beside; for "^" adds the `before` edge
  bool at_start = false;    // "^" add
  EdgeId created = kNoEdge;
  VarId old_def = kNoVar;   // definition removed or replaced
  VarId new_def = kNoVar;   // definition introduced
};

/// Control-flow graph G = (N, E, s) with statements attached to edges.
/// Edge and node slots are never reused; deleted ones stay as dead slots so
/// ids are stable across changes.
class Cfg {
public:
  NodeId add_node(std::string name);
  EdgeId add_edge(std::string name, NodeId src, NodeId dst, lang::EdgeStmt stmt,
                  std::optional<Polarity> cond = std::nullopt);
  /// Reserves a dead edge slot under `name` (used when restoring sessions).
  EdgeId add_retired_edge(std::string name);
  void rename_node(NodeId n, std::string name);
  void set_entry(NodeId n) { entry_ = n; }
  void add_secret(std::string_view var);

  NodeId entry() const { return entry_; }
  /// The unique live node without successors; the entry for an empty graph.
  NodeId exit() const;

  const CfgEdge& edge(EdgeId e) const { return edges_.at(e); }
  const CfgNode& node(NodeId n) const { return nodes_.at(n); }
  std::size_t edge_slots() const { return edges_.size(); }
  std::size_t node_slots() const { return nodes_.size(); }
  std::vector<EdgeId> live_edges() const;
  std::vector<NodeId> live_nodes() const;
  std::size_t live_edge_count() const { return live_edges_; }

  std::optional<EdgeId> find_edge(std::string_view name) const;
  std::optional<NodeId> find_node(std::string_view name) const;
  bool edge_name_taken(std::string_view name) const { return find_edge(name).has_value(); }

  VarId intern(std::string_view var);
  std::optional<VarId> find_var(std::string_view var) const;
  const std::string& var_name(VarId v) const { return vars_.at(v); }
  std::size_t var_count() const { return vars_.size(); }
  /// Live edges assigning `v`.
  const IdSet& defs_of(VarId v) const;
  const std::vector<std::string>& secrets() const { return secrets_; }

  /// Applies one change in place. Throws ChangeError and leaves the graph
  /// untouched when the change is invalid.
  AppliedChange apply(const ChangeOp& op);

  /// Every live node is reachable from the entry.
  bool connected() const;

private:
  void set_stmt(EdgeId e, lang::EdgeStmt stmt);
  void unlink(EdgeId e);
  void link(EdgeId e);
  NodeId fresh_node();
  EdgeId new_edge(const std::string& name, NodeId src, NodeId dst, lang::EdgeStmt stmt,
                  std::optional<Polarity> cond);
  AppliedChange apply_unchecked(const ChangeOp& op);

  std::vector<CfgNode> nodes_;
  std::vector<CfgEdge> edges_;
  std::unordered_map<std::string, NodeId> node_names_;
  std::unordered_map<std::string, EdgeId> edge_names_;
  std::vector<std::string> vars_;
  std::unordered_map<std::string, VarId> var_ids_;
  std::vector<IdSet> defs_;
  std::vector<std::string> secrets_;
  NodeId entry_ = kNoNode;
  std::size_t live_edges_ = 0;
};

/// Value-semantics wrapper around Cfg::apply.
Cfg apply_change(const Cfg& g, const ChangeOp& op);

/// Line-oriented text format; see docs/formats.md.
Cfg parse_cfg_text(std::string_view text);
std::string emit_cfg_text(const Cfg& g);

std::vector<ChangeOp> parse_change_script(std::string_view text);
std::string emit_change_script(const std::vector<ChangeOp>& ops);

/// Name-independent rendering of the graph reached from the entry; two graphs
/// with the same shape and statements render identically.
std::string canonical_shape(const Cfg& g);

} // namespace apa
