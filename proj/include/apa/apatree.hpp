#pragma once

#include "apa/pathexpr.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace apa {

using TreeIdx = std::int32_t;
inline constexpr TreeIdx kNil = -1;

enum class TreeOp { Leaf, Seq, Choice, Star };

struct TreeNode {
  TreeOp op = TreeOp::Leaf;
  TreeIdx parent = kNil;
  TreeIdx left = kNil;  // Star keeps its operand here
  TreeIdx right = kNil;
  EdgeId edge = kNoEdge; // Leaf
  std::uint32_t weight = 1;
  std::uint32_t mark = 0;
  std::uint32_t maxelem = 1; // Seq: weight of the heaviest element of its chain below
  EdgeId key = kNoEdge;      // smallest live edge id below
  bool modified = true;
  bool deleted = false;  // Leaf tombstone
  bool has_fact = false; // the engine holds a fact for this slot
  bool alive = false;    // slot in use
};

struct TreeConfig {
  double alpha = 0.25;
  int max_structural_depth = 64; // diagnostics only
};

struct TreeStats {
  std::size_t nodes_created = 0;
  std::size_t rebuilds = 0;
  std::size_t rebuild_nodes = 0; // nodes visited plus nodes created by rebuilds
};

/// Weight-balanced expression tree over a path expression. Seq chains are
/// split at the weighted midpoint; Choice and Star nodes keep the shape of the
/// expression. Deleted leaves stay as tombstones until a rebuild purges them.
class ApaTree {
public:
  ApaTree() = default;
  explicit ApaTree(TreeConfig cfg) : cfg_(cfg) {}

  static ApaTree build(const Expr& rho, TreeConfig cfg = {});

  const TreeConfig& config() const { return cfg_; }
  TreeIdx root() const { return root_; }
  bool empty() const { return root_ == kNil; }
  const TreeNode& node(TreeIdx i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  /// Flag access for interpretation (modified / has_fact).
  TreeNode& flags(TreeIdx i) { return nodes_.at(static_cast<std::size_t>(i)); }
  std::size_t capacity() const { return nodes_.size(); }
  std::size_t size() const { return live_; }

  /// Leaf of a live or tombstoned edge; nullopt for unknown or purged edges.
  std::optional<TreeIdx> leaf_of(EdgeId e) const;
  bool is_retired(EdgeId e) const;

  // Structural changes. Each marks the touched leaf-to-root path modified and
  // then rebalances. Throws ChangeError on bad references.
  void add_after(EdgeId anchor, EdgeId created);
  void add_before(EdgeId before, EdgeId created);
  void add_first(EdgeId created);
  void add_loop(EdgeId around, EdgeId created);
  void add_branch(EdgeId beside, EdgeId created);
  void remove(EdgeId e);
  /// Payload change: marks the path modified, shape untouched.
  void touch(EdgeId e);
  /// Marks i and its ancestors modified.
  void mark_path(TreeIdx i);

  /// Context identity of a fully deleted child: true for the ⊗/⊛/root
  /// identity 1, false for the ⊕ identity 0.
  bool vanishes_to_one(TreeIdx child) const;
  bool fully_deleted(TreeIdx i) const {
    const auto& n = node(i);
    return n.mark == n.weight;
  }

  /// Expression of the subtree with tombstones replaced by their identities.
  Expr extract(TreeIdx i) const;
  Expr expression() const { return root_ == kNil ? make_eps() : extract(root_); }

  int height() const;
  /// Largest number of Choice/Star nodes on a root-to-leaf path.
  int structural_depth() const;
  std::vector<TreeIdx> preorder() const;

  /// Full recount of weights, marks, keys and links; returns an error message
  /// or an empty string.
  std::string audit() const;
  /// Seq nodes violating the add trigger that are not exempt.
  std::size_t unbalanced_seq_nodes() const;

  const TreeStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  using FactText = std::function<std::string(TreeIdx)>;
  /// One node per line, two spaces of indent per depth.
  std::string dump(const EdgeNamer& name, const FactText& fact = {}) const;
  /// Inverse of dump. Facts are ignored; has_fact is set when the line
  /// carries one. `preorder_facts` receives the fact text of each node.
  static ApaTree load(std::string_view text, const std::function<EdgeId(const std::string&)>& edge,
                      TreeConfig cfg, std::vector<std::string>* preorder_facts = nullptr);

private:
  TreeIdx alloc(TreeOp op);
  void release(TreeIdx i);
  TreeIdx build_expr(const Expr& e);
  TreeIdx build_run(TreeOp op, const std::vector<Expr>& parts, std::size_t lo, std::size_t hi);
  void pull(TreeIdx i);
  void replace_child(TreeIdx parent, TreeIdx from, TreeIdx to);
  TreeIdx live_leaf(EdgeId e, const char* what) const;
  TreeIdx wrap(TreeIdx at, TreeOp op, TreeIdx left, TreeIdx right);
  void after_change(TreeIdx start);
  bool violates(TreeIdx i) const;
  void rebuild(TreeIdx x, TreeIdx& resume);
  void collect(TreeIdx i, std::vector<TreeIdx>& out) const;
  void set_leaf(EdgeId e, TreeIdx i);

  TreeConfig cfg_;
  std::vector<TreeNode> nodes_;
  std::vector<TreeIdx> free_;
  std::vector<TreeIdx> leaf_of_;   // by edge id
  std::vector<char> retired_;      // by edge id
  TreeIdx root_ = kNil;
  std::size_t live_ = 0;
  TreeStats stats_;
};

} // namespace apa
