#include "apa/apatree.hpp"

#include "apa/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace apa {
namespace {

std::uint32_t element_weight(const TreeNode& n) {
  return n.op == TreeOp::Seq ? n.maxelem : n.weight;
}

const char* op_name(TreeOp op) {
  switch (op) {
  case TreeOp::Leaf: return "leaf";
  case TreeOp::Seq: return "seq";
  case TreeOp::Choice: return "choice";
  case TreeOp::Star: return "star";
  }
  return "?";
}

} // namespace

TreeIdx ApaTree::alloc(TreeOp op) {
  TreeIdx i;
  if (!free_.empty()) {
    i = free_.back();
    free_.pop_back();
    nodes_[static_cast<std::size_t>(i)] = TreeNode{};
  } else {
    i = static_cast<TreeIdx>(nodes_.size());
    nodes_.emplace_back();
  }
  TreeNode& n = nodes_[static_cast<std::size_t>(i)];
  n.op = op;
  n.alive = true;
  ++live_;
  ++stats_.nodes_created;
  return i;
}

void ApaTree::release(TreeIdx i) {
  TreeNode& n = nodes_[static_cast<std::size_t>(i)];
  n.alive = false;
  n.has_fact = false;
  free_.push_back(i);
  --live_;
}

void ApaTree::set_leaf(EdgeId e, TreeIdx i) {
  if (e >= leaf_of_.size()) {
    leaf_of_.resize(e + 1, kNil);
    retired_.resize(e + 1, 0);
  }
  leaf_of_[e] = i;
}

std::optional<TreeIdx> ApaTree::leaf_of(EdgeId e) const {
  if (e >= leaf_of_.size() || leaf_of_[e] == kNil) return std::nullopt;
  return leaf_of_[e];
}

bool ApaTree::is_retired(EdgeId e) const { return e < retired_.size() && retired_[e]; }

void ApaTree::pull(TreeIdx i) {
  TreeNode& n = nodes_[static_cast<std::size_t>(i)];
  switch (n.op) {
  case TreeOp::Leaf:
    n.weight = 1;
    n.mark = n.deleted ? 1 : 0;
    n.maxelem = 1;
    n.key = n.deleted ? kNoEdge : n.edge;
    break;
  case TreeOp::Star: {
    const TreeNode& c = node(n.left);
    n.weight = c.weight;
    n.mark = c.mark;
    n.maxelem = c.weight;
    n.key = c.key;
    break;
  }
  case TreeOp::Seq:
  case TreeOp::Choice: {
    if (n.op == TreeOp::Choice) {
      const TreeNode& l = node(n.left);
      const TreeNode& r = node(n.right);
      // Choice operands stay ordered by their smallest live edge.
      if (l.key != kNoEdge && r.key != kNoEdge && r.key < l.key) {
        std::swap(n.left, n.right);
        n.has_fact = false;
        n.modified = true;
      }
    }
    const TreeNode& l = node(n.left);
    const TreeNode& r = node(n.right);
    n.weight = l.weight + r.weight;
    n.mark = l.mark + r.mark;
    n.key = std::min(l.key, r.key);
    n.maxelem = n.op == TreeOp::Seq ? std::max(element_weight(l), element_weight(r)) : n.weight;
    break;
  }
  }
}

TreeIdx ApaTree::build_run(TreeOp op, const std::vector<Expr>& parts, std::size_t lo,
                           std::size_t hi) {
  if (hi - lo == 1) return build_expr(parts[lo]);
  std::size_t total = 0;
  for (std::size_t k = lo; k < hi; ++k) total += parts[k]->atoms;
  // Split at the boundary whose prefix weight is closest to half; ties go
  // to the earlier boundary.
  std::size_t best = lo + 1, prefix = 0;
  long long best_gap = -1;
  for (std::size_t b = lo + 1; b < hi; ++b) {
    prefix += parts[b - 1]->atoms;
    long long gap = std::llabs(2 * static_cast<long long>(prefix) - static_cast<long long>(total));
    if (best_gap < 0 || gap < best_gap) {
      best_gap = gap;
      best = b;
    }
  }
  TreeIdx l = build_run(op, parts, lo, best);
  TreeIdx r = build_run(op, parts, best, hi);
  TreeIdx n = alloc(op);
  nodes_[static_cast<std::size_t>(n)].left = l;
  nodes_[static_cast<std::size_t>(n)].right = r;
  nodes_[static_cast<std::size_t>(l)].parent = n;
  nodes_[static_cast<std::size_t>(r)].parent = n;
  pull(n);
  return n;
}

TreeIdx ApaTree::build_expr(const Expr& e) {
  switch (e->kind) {
  case PathExpr::Kind::Atom: {
    TreeIdx n = alloc(TreeOp::Leaf);
    nodes_[static_cast<std::size_t>(n)].edge = e->edge;
    set_leaf(e->edge, n);
    pull(n);
    return n;
  }
  case PathExpr::Kind::Concat: return build_run(TreeOp::Seq, e->kids, 0, e->kids.size());
  case PathExpr::Kind::Union: return build_run(TreeOp::Choice, e->kids, 0, e->kids.size());
  case PathExpr::Kind::Star: {
    TreeIdx c = build_expr(e->kids[0]);
    TreeIdx n = alloc(TreeOp::Star);
    nodes_[static_cast<std::size_t>(n)].left = c;
    nodes_[static_cast<std::size_t>(c)].parent = n;
    pull(n);
    return n;
  }
  default:
    throw std::logic_error("ε or ∅ cannot appear inside a tree");
  }
}

ApaTree ApaTree::build(const Expr& rho, TreeConfig cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5)) throw Error("alpha must lie in (0, 0.5]");
  ApaTree t(cfg);
  if (rho->kind != PathExpr::Kind::Eps && rho->kind != PathExpr::Kind::Empty)
    t.root_ = t.build_expr(rho);
  return t;
}

void ApaTree::replace_child(TreeIdx parent, TreeIdx from, TreeIdx to) {
  if (to != kNil) nodes_[static_cast<std::size_t>(to)].parent = parent;
  if (parent == kNil) {
    root_ = to;
    return;
  }
  TreeNode& p = nodes_[static_cast<std::size_t>(parent)];
  if (p.left == from) p.left = to;
  else if (p.right == from) p.right = to;
  else throw std::logic_error("replace_child: not a child");
}

TreeIdx ApaTree::live_leaf(EdgeId e, const char* what) const {
  auto l = leaf_of(e);
  if (!l) throw ChangeError(std::string(what) + ": edge " + std::to_string(e) + " has no leaf");
  if (node(*l).deleted) throw ChangeError(std::string(what) + ": edge " + std::to_string(e) + " is deleted");
  return *l;
}

TreeIdx ApaTree::wrap(TreeIdx at, TreeOp op, TreeIdx left, TreeIdx right) {
  TreeIdx parent = node(at).parent;
  TreeIdx n = alloc(op);
  replace_child(parent, at, n);
  TreeNode& w = nodes_[static_cast<std::size_t>(n)];
  w.left = left;
  w.right = right;
  nodes_[static_cast<std::size_t>(left)].parent = n;
  if (right != kNil) nodes_[static_cast<std::size_t>(right)].parent = n;
  return n;
}

void ApaTree::add_after(EdgeId anchor, EdgeId created) {
  TreeIdx a = live_leaf(anchor, "add");
  if (leaf_of(created) || is_retired(created)) throw ChangeError("add: edge id already in the tree");
  TreeIdx leaf = alloc(TreeOp::Leaf);
  nodes_[static_cast<std::size_t>(leaf)].edge = created;
  set_leaf(created, leaf);
  wrap(a, TreeOp::Seq, a, leaf);
  after_change(leaf);
}

void ApaTree::add_before(EdgeId before, EdgeId created) {
  TreeIdx b = live_leaf(before, "add");
  if (leaf_of(created) || is_retired(created)) throw ChangeError("add: edge id already in the tree");
  TreeIdx leaf = alloc(TreeOp::Leaf);
  nodes_[static_cast<std::size_t>(leaf)].edge = created;
  set_leaf(created, leaf);
  wrap(b, TreeOp::Seq, leaf, b);
  after_change(leaf);
}

void ApaTree::add_first(EdgeId created) {
  if (leaf_of(created) || is_retired(created)) throw ChangeError("add: edge id already in the tree");
  if (root_ != kNil) {
    if (!fully_deleted(root_)) throw ChangeError("add: '^' needs the edge it precedes");
    std::vector<TreeIdx> old;
    collect(root_, old);
    stats_.rebuilds++;
    stats_.rebuild_nodes += old.size();
    for (TreeIdx i : old) {
      const TreeNode& n = node(i);
      if (n.op == TreeOp::Leaf) {
        leaf_of_[n.edge] = kNil;
        retired_[n.edge] = 1;
      }
      release(i);
    }
    root_ = kNil;
  }
  TreeIdx leaf = alloc(TreeOp::Leaf);
  nodes_[static_cast<std::size_t>(leaf)].edge = created;
  set_leaf(created, leaf);
  root_ = leaf;
  after_change(leaf);
}

void ApaTree::add_loop(EdgeId around, EdgeId created) {
  TreeIdx a = live_leaf(around, "loop");
  if (leaf_of(created) || is_retired(created)) throw ChangeError("loop: edge id already in the tree");
  TreeIdx leaf = alloc(TreeOp::Leaf);
  nodes_[static_cast<std::size_t>(leaf)].edge = created;
  set_leaf(created, leaf);
  pull(leaf);
  TreeIdx star = alloc(TreeOp::Star);
  nodes_[static_cast<std::size_t>(star)].left = leaf;
  nodes_[static_cast<std::size_t>(leaf)].parent = star;
  wrap(a, TreeOp::Seq, star, a);
  after_change(leaf);
}

void ApaTree::add_branch(EdgeId beside, EdgeId created) {
  TreeIdx a = live_leaf(beside, "branch");
  if (leaf_of(created) || is_retired(created)) throw ChangeError("branch: edge id already in the tree");
  TreeIdx leaf = alloc(TreeOp::Leaf);
  nodes_[static_cast<std::size_t>(leaf)].edge = created;
  set_leaf(created, leaf);
  wrap(a, TreeOp::Choice, a, leaf);
  after_change(leaf);
}

void ApaTree::remove(EdgeId e) {
  TreeIdx a = live_leaf(e, "delete");
  nodes_[static_cast<std::size_t>(a)].deleted = true;
  after_change(a);
}

void ApaTree::touch(EdgeId e) { mark_path(live_leaf(e, "update")); }

void ApaTree::mark_path(TreeIdx i) {
  for (; i != kNil; i = node(i).parent) nodes_[static_cast<std::size_t>(i)].modified = true;
}

bool ApaTree::vanishes_to_one(TreeIdx child) const {
  TreeIdx p = node(child).parent;
  return p == kNil || node(p).op != TreeOp::Choice;
}

bool ApaTree::violates(TreeIdx i) const {
  const TreeNode& n = node(i);
  if (n.op == TreeOp::Leaf) return false;
  double w = n.weight;
  if (n.mark >= (1.0 - cfg_.alpha) * w) return true;
  if (n.op != TreeOp::Seq) return false;
  double lighter = std::min(node(n.left).weight, node(n.right).weight);
  // A rebuild guarantees the lighter side at least (w - heaviest element) / 2,
  // so nodes already meeting that bound are left alone.
  return lighter < cfg_.alpha * w && lighter < (w - n.maxelem) / 2.0;
}

void ApaTree::after_change(TreeIdx start) {
  for (TreeIdx i = start; i != kNil; i = node(i).parent) {
    pull(i);
    nodes_[static_cast<std::size_t>(i)].modified = true;
  }
  TreeIdx from = start;
  while (from != kNil) {
    TreeIdx highest = kNil;
    for (TreeIdx i = from; i != kNil; i = node(i).parent)
      if (violates(i)) highest = i;
    if (highest == kNil) break;
    TreeIdx resume = kNil;
    rebuild(highest, resume);
    for (TreeIdx i = resume; i != kNil; i = node(i).parent) {
      pull(i);
      nodes_[static_cast<std::size_t>(i)].modified = true;
    }
    from = resume;
  }
}

void ApaTree::collect(TreeIdx i, std::vector<TreeIdx>& out) const {
  std::vector<TreeIdx> stack{i};
  while (!stack.empty()) {
    TreeIdx k = stack.back();
    stack.pop_back();
    out.push_back(k);
    const TreeNode& n = node(k);
    if (n.right != kNil) stack.push_back(n.right);
    if (n.left != kNil) stack.push_back(n.left);
  }
}

void ApaTree::rebuild(TreeIdx x, TreeIdx& resume) {
  Expr e = extract(x);
  std::vector<TreeIdx> old;
  collect(x, old);
  ++stats_.rebuilds;
  stats_.rebuild_nodes += old.size();
  TreeIdx parent = node(x).parent;
  for (TreeIdx i : old) {
    const TreeNode& n = node(i);
    if (n.op == TreeOp::Leaf) {
      leaf_of_[n.edge] = kNil;
      if (n.deleted) retired_[n.edge] = 1;
    }
    release(i);
  }
  if (e->kind == PathExpr::Kind::Eps || e->kind == PathExpr::Kind::Empty) {
    // The whole subtree was tombstones: its parent reduces to the sibling.
    if (parent == kNil) {
      root_ = kNil;
      resume = kNil;
      return;
    }
    TreeNode& p = nodes_[static_cast<std::size_t>(parent)];
    TreeIdx sibling = p.left == x ? p.right : p.left;
    TreeIdx grand = p.parent;
    replace_child(grand, parent, sibling);
    release(parent);
    ++stats_.rebuild_nodes;
    if (grand != kNil) nodes_[static_cast<std::size_t>(grand)].has_fact = false;
    resume = grand;
    return;
  }
  std::size_t before = stats_.nodes_created;
  TreeIdx y = build_expr(e);
  stats_.rebuild_nodes += stats_.nodes_created - before;
  replace_child(parent, x, y);
  resume = y;
}

Expr ApaTree::extract(TreeIdx i) const {
  const TreeNode& n = node(i);
  if (n.mark == n.weight) return vanishes_to_one(i) ? make_eps() : make_empty();
  switch (n.op) {
  case TreeOp::Leaf: return make_atom(n.edge);
  case TreeOp::Seq: return make_concat({extract(n.left), extract(n.right)});
  case TreeOp::Choice: return make_union({extract(n.left), extract(n.right)});
  case TreeOp::Star: return make_star(extract(n.left));
  }
  return make_eps();
}

int ApaTree::height() const {
  if (root_ == kNil) return 0;
  int best = 0;
  std::vector<std::pair<TreeIdx, int>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const TreeNode& n = node(i);
    if (n.left != kNil) stack.emplace_back(n.left, d + 1);
    if (n.right != kNil) stack.emplace_back(n.right, d + 1);
  }
  return best;
}

int ApaTree::structural_depth() const {
  if (root_ == kNil) return 0;
  int best = 0;
  std::vector<std::pair<TreeIdx, int>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = node(i);
    if (n.op == TreeOp::Choice || n.op == TreeOp::Star) ++d;
    best = std::max(best, d);
    if (n.left != kNil) stack.emplace_back(n.left, d);
    if (n.right != kNil) stack.emplace_back(n.right, d);
  }
  return best;
}

std::vector<TreeIdx> ApaTree::preorder() const {
  std::vector<TreeIdx> out;
  if (root_ != kNil) collect(root_, out);
  return out;
}

std::string ApaTree::audit() const {
  if (root_ == kNil) return live_ == 0 ? "" : "empty root with live nodes";
  if (node(root_).parent != kNil) return "root has a parent";
  std::vector<TreeIdx> all = preorder();
  if (all.size() != live_) return "live node count mismatch";
  std::ostringstream err;
  // Children before parents.
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    TreeIdx i = *it;
    const TreeNode& n = node(i);
    if (!n.alive) return "dead node reachable";
    std::uint32_t w = 1, m = 0, me = 1;
    EdgeId key = kNoEdge;
    auto child_ok = [&](TreeIdx c) { return c != kNil && node(c).parent == i; };
    switch (n.op) {
    case TreeOp::Leaf:
      if (n.left != kNil || n.right != kNil) return "leaf with children";
      m = n.deleted ? 1 : 0;
      key = n.deleted ? kNoEdge : n.edge;
      if (!leaf_of(n.edge) || *leaf_of(n.edge) != i) return "leaf index out of sync";
      break;
    case TreeOp::Star:
      if (!child_ok(n.left) || n.right != kNil) return "bad star links";
      w = node(n.left).weight;
      m = node(n.left).mark;
      me = w;
      key = node(n.left).key;
      break;
    default: {
      if (!child_ok(n.left) || !child_ok(n.right)) return "bad binary links";
      const TreeNode& l = node(n.left);
      const TreeNode& r = node(n.right);
      w = l.weight + r.weight;
      m = l.mark + r.mark;
      key = std::min(l.key, r.key);
      me = n.op == TreeOp::Seq ? std::max(element_weight(l), element_weight(r)) : w;
      if (n.op == TreeOp::Choice && l.key != kNoEdge && r.key != kNoEdge && r.key < l.key)
        return "choice operands out of order";
    }
    }
    if (n.deleted && n.op != TreeOp::Leaf) return "deleted flag on internal node";
    if (w != n.weight || m != n.mark || me != n.maxelem || key != n.key) {
      err << "stale attributes at " << i << ": weight " << n.weight << "/" << w << " mark "
          << n.mark << "/" << m;
      return err.str();
    }
  }
  for (EdgeId e = 0; e < leaf_of_.size(); ++e) {
    TreeIdx l = leaf_of_[e];
    if (l == kNil) continue;
    if (!node(l).alive || node(l).op != TreeOp::Leaf || node(l).edge != e) return "dangling leaf index";
  }
  return "";
}

std::size_t ApaTree::unbalanced_seq_nodes() const {
  std::size_t count = 0;
  for (TreeIdx i : preorder()) {
    const TreeNode& n = node(i);
    if (n.op == TreeOp::Seq && violates(i) && n.mark < (1.0 - cfg_.alpha) * n.weight) ++count;
  }
  return count;
}

std::string ApaTree::dump(const EdgeNamer& name, const FactText& fact) const {
  std::string out;
  if (root_ == kNil) return out;
  std::vector<std::pair<TreeIdx, int>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = node(i);
    out.append(static_cast<std::size_t>(2 * d), ' ');
    out += op_name(n.op);
    if (n.op == TreeOp::Leaf) out += " " + name(n.edge);
    out += " w=" + std::to_string(n.weight) + " m=" + std::to_string(n.mark);
    if (n.modified) out += " [MOD]";
    if (n.deleted) out += " [DEL]";
    out += " fact=";
    out += n.has_fact && fact ? fact(i) : "-";
    out += "\n";
    if (n.right != kNil) stack.emplace_back(n.right, d + 1);
    if (n.left != kNil) stack.emplace_back(n.left, d + 1);
  }
  return out;
}

ApaTree ApaTree::load(std::string_view text, const std::function<EdgeId(const std::string&)>& edge,
                      TreeConfig cfg, std::vector<std::string>* preorder_facts) {
  ApaTree t(cfg);
  std::vector<std::pair<TreeIdx, int>> stack; // open nodes and their depth
  std::vector<std::pair<std::uint32_t, std::uint32_t>> recorded;
  std::vector<TreeIdx> order;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineno;
    if (line.empty()) continue;
    std::size_t indent = line.find_first_not_of(' ');
    if (indent == std::string_view::npos || indent % 2) throw ParseError("bad indentation", lineno, 1);
    int depth = static_cast<int>(indent / 2);
    std::size_t fact_at = line.find(" fact=");
    if (fact_at == std::string_view::npos) throw ParseError("missing fact field", lineno, 1);
    std::string fact_text(line.substr(fact_at + 6));
    std::istringstream in{std::string(line.substr(indent, fact_at - indent))};
    std::string op;
    in >> op;
    TreeOp kind;
    if (op == "leaf") kind = TreeOp::Leaf;
    else if (op == "seq") kind = TreeOp::Seq;
    else if (op == "choice") kind = TreeOp::Choice;
    else if (op == "star") kind = TreeOp::Star;
    else throw ParseError("unknown node type '" + op + "'", lineno, 1);
    TreeIdx i = t.alloc(kind);
    TreeNode* n = &t.nodes_[static_cast<std::size_t>(i)];
    if (kind == TreeOp::Leaf) {
      std::string name;
      in >> name;
      n->edge = edge(name);
      if (t.leaf_of(n->edge)) throw ParseError("edge '" + name + "' appears twice", lineno, 1);
      t.set_leaf(n->edge, i);
      n = &t.nodes_[static_cast<std::size_t>(i)];
    }
    std::string tok;
    std::uint32_t w = 0, m = 0;
    n->modified = false;
    while (in >> tok) {
      if (tok.rfind("w=", 0) == 0) w = static_cast<std::uint32_t>(std::stoul(tok.substr(2)));
      else if (tok.rfind("m=", 0) == 0) m = static_cast<std::uint32_t>(std::stoul(tok.substr(2)));
      else if (tok == "[MOD]") n->modified = true;
      else if (tok == "[DEL]") n->deleted = true;
      else throw ParseError("unexpected field '" + tok + "'", lineno, 1);
    }
    n->has_fact = fact_text != "-";
    if (preorder_facts) preorder_facts->push_back(fact_text);
    recorded.emplace_back(w, m);
    order.push_back(i);
    while (!stack.empty() && stack.back().second >= depth) stack.pop_back();
    if (stack.empty()) {
      if (t.root_ != kNil || depth != 0) throw ParseError("more than one root", lineno, 1);
      t.root_ = i;
    } else {
      if (stack.back().second != depth - 1) throw ParseError("indentation skips a level", lineno, 1);
      TreeNode& p = t.nodes_[static_cast<std::size_t>(stack.back().first)];
      n = &t.nodes_[static_cast<std::size_t>(i)];
      n->parent = stack.back().first;
      if (p.left == kNil) p.left = i;
      else if (p.right == kNil && p.op != TreeOp::Star) p.right = i;
      else throw ParseError("too many children", lineno, 1);
    }
    if (kind != TreeOp::Leaf) stack.emplace_back(i, depth);
  }
  for (std::size_t k = order.size(); k-- > 0;) {
    TreeIdx i = order[k];
    const TreeNode& n = t.node(i);
    bool arity_ok = n.op == TreeOp::Leaf || (n.op == TreeOp::Star ? n.left != kNil && n.right == kNil
                                                                  : n.left != kNil && n.right != kNil);
    if (!arity_ok) throw ParseError("node has the wrong number of children", static_cast<int>(k) + 1, 1);
    bool modified = n.modified, has_fact = n.has_fact;
    t.pull(i);
    TreeNode& m = t.nodes_[static_cast<std::size_t>(i)];
    if (m.modified != modified || m.has_fact != has_fact)
      throw ParseError("choice operands out of order", static_cast<int>(k) + 1, 1);
    if (m.weight != recorded[k].first || m.mark != recorded[k].second)
      throw ParseError("recorded weight or mark disagrees with the subtree", static_cast<int>(k) + 1, 1);
  }
  t.stats_ = {};
  return t;
}

} // namespace apa
