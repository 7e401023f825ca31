#pragma once

#include "apa/analyses.hpp"
#include "apa/apatree.hpp"
#include "apa/cfg.hpp"
#include "apa/error.hpp"
#include "apa/pathexpr.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace apa {

struct Counters {
  std::size_t tree_nodes = 0;
  std::size_t nodes_created = 0;
  std::size_t modified = 0;         // modified nodes visited by interpretation
  std::size_t facts_recomputed = 0; // edge_fact / ⊗ / ⊕ / ⊛ evaluations
  std::size_t rebuilds = 0;
  std::size_t rebuild_nodes = 0;

  friend bool operator==(const Counters&, const Counters&) = default;
};

nlohmann::json to_json(const Counters& c);

struct EngineOptions {
  TreeConfig tree;
  bool early_stop = true;
};

/// Direct recursive evaluation of a path expression, independent of any tree.
/// n-ary unions fold from the left.
template <SemanticAlgebra A>
Fact<A> evaluate(const A& alg, const Cfg& g, const PathExpr& e) {
  switch (e.kind) {
  case PathExpr::Kind::Empty: return lifted::zero(alg);
  case PathExpr::Kind::Eps: return lifted::one(alg);
  case PathExpr::Kind::Atom: return alg.edge_fact(g, e.edge);
  case PathExpr::Kind::Star: return lifted::star(alg, evaluate(alg, g, *e.kids[0]));
  case PathExpr::Kind::Concat:
  case PathExpr::Kind::Union: {
    Fact<A> acc = evaluate(alg, g, *e.kids[0]);
    for (std::size_t k = 1; k < e.kids.size(); ++k) {
      Fact<A> next = evaluate(alg, g, *e.kids[k]);
      acc = e.kind == PathExpr::Kind::Concat ? lifted::seq(alg, acc, next) : lifted::choice(alg, acc, next);
    }
    return acc;
  }
  }
  return lifted::one(alg);
}

/// Modified-only interpretation. Unmodified nodes with a cached fact are
/// skipped; a modified node is re-evaluated when it has no fact or one of its
/// children's facts changed. Fully deleted subtrees contribute the identity
/// of their context. Clears every modified flag it visits.
template <SemanticAlgebra A>
class Interpreter {
public:
  Interpreter(ApaTree& t, std::vector<Fact<A>>& facts, const A& alg, const Cfg& g, bool early_stop,
              Counters& c)
      : t_(t), facts_(facts), alg_(alg), g_(g), early_stop_(early_stop), c_(c) {}

  void run() {
    facts_.resize(t_.capacity());
    if (!t_.empty()) visit(t_.root());
  }

private:
  bool stale(TreeIdx i) const { return t_.node(i).modified || !t_.node(i).has_fact; }

  bool visit(TreeIdx i) {
    if (!stale(i)) return false;
    ++c_.modified;
    const bool had = t_.node(i).has_fact;
    const TreeNode n = t_.node(i);
    Fact<A> v;
    if (t_.fully_deleted(i)) {
      v = t_.vanishes_to_one(i) ? lifted::one(alg_) : lifted::zero(alg_);
    } else if (n.op == TreeOp::Leaf) {
      v = alg_.edge_fact(g_, n.edge);
      ++c_.facts_recomputed;
    } else {
      bool moved = false;
      if (stale(n.left)) moved |= visit(n.left);
      if (n.right != kNil && stale(n.right)) moved |= visit(n.right);
      if (had && !moved && early_stop_) {
        t_.flags(i).modified = false;
        return false;
      }
      const auto& l = facts_[static_cast<std::size_t>(n.left)];
      switch (n.op) {
      case TreeOp::Seq: v = lifted::seq(alg_, l, facts_[static_cast<std::size_t>(n.right)]); break;
      case TreeOp::Choice: v = lifted::choice(alg_, l, facts_[static_cast<std::size_t>(n.right)]); break;
      default: v = lifted::star(alg_, l); break;
      }
      ++c_.facts_recomputed;
    }
    auto& slot = facts_[static_cast<std::size_t>(i)];
    bool changed = !had || !lifted::equal(alg_, slot, v) || !early_stop_;
    slot = std::move(v);
    TreeNode& f = t_.flags(i);
    f.has_fact = true;
    f.modified = false;
    return changed;
  }

  ApaTree& t_;
  std::vector<Fact<A>>& facts_;
  const A& alg_;
  const Cfg& g_;
  bool early_stop_;
  Counters& c_;
};

/// Incremental analysis state: the graph, its APA-Tree and one cached fact per
/// tree node. Every public operation leaves the root fact equal to a
/// from-scratch analysis of the current graph.
template <SemanticAlgebra A>
class Session {
public:
  explicit Session(Cfg g, EngineOptions opt = {})
      : cfg_(std::move(g)), opt_(opt), alg_(make_algebra<A>(cfg_)) {
    tree_ = ApaTree::build(compute_path_expression(cfg_), opt_.tree);
    interpret();
    last_.nodes_created = tree_.stats().nodes_created;
    tree_.reset_stats();
  }

  /// Restores a persisted session; facts are given in tree preorder (nullopt
  /// entries for nodes without a fact).
  Session(Cfg g, ApaTree t, const std::vector<std::optional<Fact<A>>>& preorder_facts, EngineOptions opt)
      : cfg_(std::move(g)), tree_(std::move(t)), opt_(opt), alg_(make_algebra<A>(cfg_)) {
    facts_.resize(tree_.capacity());
    auto order = tree_.preorder();
    if (order.size() != preorder_facts.size()) throw Error("fact count does not match the tree");
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (preorder_facts[k]) facts_[static_cast<std::size_t>(order[k])] = *preorder_facts[k];
      tree_.flags(order[k]).has_fact = preorder_facts[k].has_value();
    }
  }

  const Cfg& cfg() const { return cfg_; }
  const ApaTree& tree() const { return tree_; }
  const A& algebra() const { return alg_; }
  const EngineOptions& options() const { return opt_; }
  const Counters& last_counters() const { return last_; }

  Fact<A> root_fact() const {
    if (tree_.empty()) return lifted::one(alg_);
    return facts_[static_cast<std::size_t>(tree_.root())];
  }
  const Fact<A>& fact_of(TreeIdx i) const { return facts_.at(static_cast<std::size_t>(i)); }

  /// Applies a batch of changes. All-or-nothing: on ChangeError the session
  /// is untouched.
  Counters apply(const std::vector<ChangeOp>& ops) {
    Cfg next = cfg_;
    std::vector<AppliedChange> applied;
    for (const auto& op : ops) applied.push_back(next.apply(op));
    cfg_ = std::move(next);

    tree_.reset_stats();
    IdSet redefined;
    for (const auto& a : applied) {
      switch (a.kind) {
      case ChangeOp::Kind::Add:
        if (a.at_start && a.anchor == kNoEdge) tree_.add_first(a.created);
        else if (a.at_start) tree_.add_before(a.anchor, a.created);
        else tree_.add_after(a.anchor, a.created);
        break;
      case ChangeOp::Kind::Delete: tree_.remove(a.anchor); break;
      case ChangeOp::Kind::Update: tree_.touch(a.anchor); break;
      case ChangeOp::Kind::AddLoop: tree_.add_loop(a.anchor, a.created); break;
      case ChangeOp::Kind::AddBranch: tree_.add_branch(a.anchor, a.created); break;
      }
      if (a.old_def != kNoVar) redefined.insert(a.old_def);
      if (a.new_def != kNoVar) redefined.insert(a.new_def);
    }

    if constexpr (std::is_same_v<A, ReachDefAlgebra>) {
      // Kill sets name every definition of the variable.
      for (VarId v : redefined)
        for (EdgeId e : cfg_.defs_of(v)) tree_.touch(e);
    }
    if constexpr (std::is_same_v<A, ConstTimeAlgebra>) {
      IdSet taint = compute_taint(cfg_);
      if (!(taint == alg_.taint)) {
        alg_.taint = std::move(taint);
        invalidate_where([](const TreeNode& n) { return n.op == TreeOp::Choice || n.op == TreeOp::Star; });
      }
    }

    Counters c;
    c.nodes_created = tree_.stats().nodes_created;
    c.rebuilds = tree_.stats().rebuilds;
    c.rebuild_nodes = tree_.stats().rebuild_nodes;
    Interpreter<A>(tree_, facts_, alg_, cfg_, opt_.early_stop, c).run();
    c.tree_nodes = tree_.size();
    last_ = c;
    return c;
  }

  /// Drops every cached fact (used to cross-check against full interpretation).
  void invalidate_all() {
    invalidate_where([](const TreeNode&) { return true; });
  }

  /// Interprets a copy of the current tree with every fact dropped.
  Fact<A> reinterpret_from_scratch() const {
    Session copy = *this;
    copy.invalidate_all();
    Counters c;
    Interpreter<A>(copy.tree_, copy.facts_, copy.alg_, copy.cfg_, true, c).run();
    return copy.root_fact();
  }

  /// Ordered (preorder) facts, for persistence and diffing.
  std::vector<std::optional<Fact<A>>> preorder_facts() const {
    std::vector<std::optional<Fact<A>>> out;
    for (TreeIdx i : tree_.preorder())
      out.push_back(tree_.node(i).has_fact ? std::optional<Fact<A>>(facts_[static_cast<std::size_t>(i)])
                                           : std::nullopt);
    return out;
  }

private:
  template <class Pred>
  void invalidate_where(Pred pred) {
    for (TreeIdx i = 0; i < static_cast<TreeIdx>(tree_.capacity()); ++i) {
      const TreeNode& n = tree_.node(i);
      if (!n.alive || !pred(n)) continue;
      tree_.flags(i).has_fact = false;
      tree_.mark_path(i);
    }
  }

  void interpret() {
    Counters c;
    Interpreter<A>(tree_, facts_, alg_, cfg_, opt_.early_stop, c).run();
    c.tree_nodes = tree_.size();
    last_ = c;
  }

  Cfg cfg_;
  ApaTree tree_;
  EngineOptions opt_;
  A alg_;
  std::vector<Fact<A>> facts_;
  Counters last_;
};

template <SemanticAlgebra A>
struct BaselineResult {
  Fact<A> root;
  Counters counters;
};

/// From-scratch analysis: path expression, tree, full interpretation.
template <SemanticAlgebra A>
BaselineResult<A> baseline_apa(const Cfg& g, EngineOptions opt = {}) {
  Session<A> s(g, opt);
  return {s.root_fact(), s.last_counters()};
}

/// Runtime-selected analysis behind one interface (CLI, Python, bench).
class AnySession {
public:
  virtual ~AnySession() = default;

  static std::unique_ptr<AnySession> create(Analysis a, Cfg g, EngineOptions opt = {});
  /// Reads a session directory written by save().
  static std::unique_ptr<AnySession> load(const std::filesystem::path& dir);

  virtual Analysis analysis() const = 0;
  virtual const Cfg& cfg() const = 0;
  virtual const ApaTree& tree() const = 0;
  virtual const EngineOptions& options() const = 0;
  virtual Counters apply(const std::vector<ChangeOp>& ops) = 0;
  virtual const Counters& last_counters() const = 0;

  virtual std::string root_text() const = 0;
  virtual nlohmann::json root_json() const = 0;
  /// Set for consttime only.
  virtual std::optional<Verdict> verdict() const = 0;
  /// Root fact of a from-scratch analysis of the current graph.
  virtual std::string baseline_text() const = 0;
  virtual bool matches_baseline() const = 0;
  virtual std::string dump_tree() const = 0;

  /// {analysis, root-fact, root, verdict?, counters}
  nlohmann::json result_record() const;
  /// Writes cfg.txt, tree.dump, facts.json and meta.json into dir.
  virtual void save(const std::filesystem::path& dir) const = 0;
};

} // namespace apa
