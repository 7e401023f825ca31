#include "apa/pathexpr.hpp"

#include "apa/cfg.hpp"
#include "apa/error.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace apa {
namespace {

Expr leaf(PathExpr::Kind k) {
  auto e = std::make_shared<PathExpr>();
  e->kind = k;
  return e;
}

Expr compound(PathExpr::Kind k, std::vector<Expr> kids) {
  auto e = std::make_shared<PathExpr>();
  e->kind = k;
  for (const auto& c : kids) {
    e->atoms += c->atoms;
    e->key = std::min(e->key, c->key);
  }
  e->kids = std::move(kids);
  return e;
}

int prec(const PathExpr& e) {
  switch (e.kind) {
  case PathExpr::Kind::Union: return 1;
  case PathExpr::Kind::Concat: return 2;
  case PathExpr::Kind::Star: return 3;
  default: return 4;
  }
}

void print(const PathExpr& e, const EdgeNamer& name, int min_prec, std::string& out) {
  bool paren = prec(e) < min_prec;
  if (paren) out += '(';
  switch (e.kind) {
  case PathExpr::Kind::Empty: out += "∅"; break;
  case PathExpr::Kind::Eps: out += "ε"; break;
  case PathExpr::Kind::Atom: out += name(e.edge); break;
  case PathExpr::Kind::Concat:
    for (const auto& k : e.kids) print(*k, name, 3, out);
    break;
  case PathExpr::Kind::Union:
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
      if (i) out += '+';
      print(*e.kids[i], name, 2, out);
    }
    break;
  case PathExpr::Kind::Star:
    print(*e.kids[0], name, 4, out);
    out += '*';
    break;
  }
  if (paren) out += ')';
}

// End positions reachable by matching `e` from each position in `from`.
std::vector<char> advance(const PathExpr& e, const std::vector<EdgeId>& w, std::vector<char> from) {
  std::size_t n = w.size() + 1;
  switch (e.kind) {
  case PathExpr::Kind::Empty: return std::vector<char>(n, 0);
  case PathExpr::Kind::Eps: return from;
  case PathExpr::Kind::Atom: {
    std::vector<char> to(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (from[i] && w[i] == e.edge) to[i + 1] = 1;
    return to;
  }
  case PathExpr::Kind::Concat:
    for (const auto& k : e.kids) from = advance(*k, w, std::move(from));
    return from;
  case PathExpr::Kind::Union: {
    std::vector<char> to(n, 0);
    for (const auto& k : e.kids) {
      auto r = advance(*k, w, from);
      for (std::size_t i = 0; i < n; ++i) to[i] |= r[i];
    }
    return to;
  }
  case PathExpr::Kind::Star: {
    std::vector<char> acc = from;
    std::vector<char> frontier = from;
    for (;;) {
      auto r = advance(*e.kids[0], w, frontier);
      bool grew = false;
      for (std::size_t i = 0; i < n; ++i) {
        frontier[i] = r[i] && !acc[i];
        if (frontier[i]) { acc[i] = 1; grew = true; }
      }
      if (!grew) return acc;
    }
  }
  }
  return from;
}

using Lang = std::set<std::vector<EdgeId>>;

Lang cat(const Lang& a, const Lang& b, std::size_t max_len) {
  Lang out;
  for (const auto& x : a)
    for (const auto& y : b) {
      if (x.size() + y.size() > max_len) continue;
      auto z = x;
      z.insert(z.end(), y.begin(), y.end());
      out.insert(std::move(z));
    }
  return out;
}

Lang words(const PathExpr& e, int unroll, std::size_t max_len) {
  switch (e.kind) {
  case PathExpr::Kind::Empty: return {};
  case PathExpr::Kind::Eps: return {{}};
  case PathExpr::Kind::Atom:
    if (max_len == 0) return {};
    return {{e.edge}};
  case PathExpr::Kind::Concat: {
    Lang acc{{}};
    for (const auto& k : e.kids) acc = cat(acc, words(*k, unroll, max_len), max_len);
    return acc;
  }
  case PathExpr::Kind::Union: {
    Lang acc;
    for (const auto& k : e.kids) {
      auto w = words(*k, unroll, max_len);
      acc.insert(w.begin(), w.end());
    }
    return acc;
  }
  case PathExpr::Kind::Star: {
    Lang body = words(*e.kids[0], unroll, max_len);
    Lang acc{{}};
    Lang power{{}};
    for (int i = 0; i < unroll; ++i) {
      power = cat(power, body, max_len);
      acc.insert(power.begin(), power.end());
    }
    return acc;
  }
  }
  return {};
}

// --- reducer ----------------------------------------------------------------

struct REdge {
  std::uint32_t src, dst;
  Expr expr;
  bool alive = true;
  EdgeId origin = kNoEdge; // CFG edge for original edges
};

class Reducer {
public:
  Reducer(const Cfg& g, NodeId t, const ReduceOptions& opt) : g_(g), opt_(opt) {
    NodeId s = g.entry();
    if (t == kNoNode || t >= g.node_slots() || !g.node(t).live)
      throw Error("target node is not in the graph");
    auto fwd = sweep(s, true);
    if (!fwd[t]) throw Error("target node " + g.node(t).name + " is unreachable from the entry");
    auto bwd = sweep(t, false);
    // Real nodes keep their ids; the virtual source and sink come after.
    std::size_t n = g.node_slots();
    src_ = static_cast<std::uint32_t>(n);
    sink_ = static_cast<std::uint32_t>(n + 1);
    out_.resize(n + 2);
    in_.resize(n + 2);
    if (opt_.trace) opt_.trace->consumed.assign(g.edge_slots(), 0);
    for (EdgeId e = 0; e < g.edge_slots(); ++e) {
      const CfgEdge& ce = g.edge(e);
      if (!ce.live || !fwd[ce.src] || !bwd[ce.src] || !fwd[ce.dst] || !bwd[ce.dst]) continue;
      add(ce.src, ce.dst, make_atom(e), e);
    }
    add(src_, s, make_eps(), kNoEdge);
    add(t, sink_, make_eps(), kNoEdge);
    for (NodeId v = 0; v < n; ++v)
      if (fwd[v] && bwd[v]) push(v);
  }

  Expr run() {
    while (!work_.empty()) {
      std::uint32_t v = pop();
      while (step(v)) {}
    }
    std::vector<std::uint32_t> rest;
    for (std::uint32_t i = 0; i < edges_.size(); ++i)
      if (edges_[i].alive) rest.push_back(i);
    if (rest.size() != 1 || edges_[rest[0]].src != src_ || edges_[rest[0]].dst != sink_) {
      std::string names;
      for (auto i : rest) {
        std::string piece = pretty(*edges_[i].expr, g_);
        names += (names.empty() ? "" : ", ") + piece;
      }
      throw IrreducibleError("irreducible control flow; residual edges: " + names);
    }
    return edges_[rest[0]].expr;
  }

private:
  std::vector<char> sweep(NodeId start, bool forward) const {
    std::vector<char> seen(g_.node_slots(), 0);
    std::deque<NodeId> q{start};
    seen[start] = 1;
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      for (EdgeId e : forward ? g_.node(v).out : g_.node(v).in) {
        NodeId m = forward ? g_.edge(e).dst : g_.edge(e).src;
        if (!seen[m]) { seen[m] = 1; q.push_back(m); }
      }
    }
    return seen;
  }

  std::uint32_t add(std::uint32_t s, std::uint32_t d, Expr x, EdgeId origin) {
    auto id = static_cast<std::uint32_t>(edges_.size());
    edges_.push_back(REdge{s, d, std::move(x), true, origin});
    out_[s].push_back(id);
    in_[d].push_back(id);
    return id;
  }

  void consume(std::uint32_t id) {
    REdge& e = edges_[id];
    if (!e.alive) throw std::logic_error("reduction consumed an edge twice");
    e.alive = false;
    if (opt_.trace && e.origin != kNoEdge) ++opt_.trace->consumed[e.origin];
  }

  void push(std::uint32_t v) {
    if (v >= src_) return;
    work_.push(opt_.descending ? -static_cast<long long>(v) : static_cast<long long>(v));
  }

  std::uint32_t pop() {
    long long k = work_.top();
    work_.pop();
    return static_cast<std::uint32_t>(k < 0 ? -k : k);
  }

  std::vector<std::uint32_t> live(std::vector<std::uint32_t>& adj) {
    adj.erase(std::remove_if(adj.begin(), adj.end(), [&](auto i) { return !edges_[i].alive; }),
              adj.end());
    return adj;
  }

  // Applies one rule at v; returns whether anything changed.
  bool step(std::uint32_t v) {
    auto outs = live(out_[v]);
    // Parallel edges to the same destination (self-loops included).
    for (std::size_t i = 0; i < outs.size(); ++i) {
      std::vector<std::uint32_t> group{outs[i]};
      for (std::size_t j = i + 1; j < outs.size(); ++j)
        if (edges_[outs[j]].dst == edges_[outs[i]].dst) group.push_back(outs[j]);
      if (group.size() < 2) continue;
      std::vector<Expr> arms;
      for (auto id : group) {
        const Expr& x = edges_[id].expr;
        if (x->kind == PathExpr::Kind::Union) arms.insert(arms.end(), x->kids.begin(), x->kids.end());
        else arms.push_back(x);
        consume(id);
      }
      std::stable_sort(arms.begin(), arms.end(), [](const Expr& a, const Expr& b) { return a->key < b->key; });
      std::uint32_t d = edges_[group[0]].dst;
      add(v, d, make_union(std::move(arms)), kNoEdge);
      if (opt_.trace) ++opt_.trace->parallel_merges;
      push(d);
      return true;
    }
    auto ins = live(in_[v]);
    std::optional<std::uint32_t> loop;
    std::vector<std::uint32_t> o, n;
    for (auto id : outs) {
      if (edges_[id].dst == v) loop = id;
      else o.push_back(id);
    }
    for (auto id : ins)
      if (edges_[id].src != v) n.push_back(id);
    if (loop) {
      Expr star = make_star(edges_[*loop].expr);
      if (o.size() == 1) {
        consume(*loop);
        consume(o[0]);
        add(v, edges_[o[0]].dst, make_concat({star, edges_[o[0]].expr}), kNoEdge);
      } else if (n.size() == 1) {
        consume(*loop);
        consume(n[0]);
        add(edges_[n[0]].src, v, make_concat({edges_[n[0]].expr, star}), kNoEdge);
      } else {
        return false;
      }
      if (opt_.trace) ++opt_.trace->loop_folds;
      for (auto id : o) push(edges_[id].dst);
      for (auto id : n) push(edges_[id].src);
      return true;
    }
    if (n.size() == 1 && o.size() == 1) {
      const REdge a = edges_[n[0]];
      const REdge b = edges_[o[0]];
      consume(n[0]);
      consume(o[0]);
      add(a.src, b.dst, make_concat({a.expr, b.expr}), kNoEdge);
      if (opt_.trace) ++opt_.trace->series_merges;
      push(a.src);
      push(b.dst);
      return false;
    }
    return false;
  }

  const Cfg& g_;
  ReduceOptions opt_;
  std::uint32_t src_ = 0, sink_ = 0;
  std::vector<REdge> edges_;
  std::vector<std::vector<std::uint32_t>> out_, in_;
  std::priority_queue<long long, std::vector<long long>, std::greater<>> work_;
};

} // namespace

Expr make_empty() {
  static const Expr e = leaf(PathExpr::Kind::Empty);
  return e;
}

Expr make_eps() {
  static const Expr e = leaf(PathExpr::Kind::Eps);
  return e;
}

Expr make_atom(EdgeId id) {
  auto e = std::make_shared<PathExpr>();
  e->kind = PathExpr::Kind::Atom;
  e->edge = id;
  e->atoms = 1;
  e->key = id;
  return e;
}

Expr make_concat(std::vector<Expr> parts) {
  std::vector<Expr> flat;
  for (auto& p : parts) {
    switch (p->kind) {
    case PathExpr::Kind::Empty: return make_empty();
    case PathExpr::Kind::Eps: break;
    case PathExpr::Kind::Concat: flat.insert(flat.end(), p->kids.begin(), p->kids.end()); break;
    default: flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return make_eps();
  if (flat.size() == 1) return flat[0];
  return compound(PathExpr::Kind::Concat, std::move(flat));
}

Expr make_union(std::vector<Expr> arms) {
  std::vector<Expr> flat;
  for (auto& a : arms) {
    if (a->kind == PathExpr::Kind::Empty) continue;
    if (a->kind == PathExpr::Kind::Union) flat.insert(flat.end(), a->kids.begin(), a->kids.end());
    else flat.push_back(std::move(a));
  }
  if (flat.empty()) return make_empty();
  if (flat.size() == 1) return flat[0];
  return compound(PathExpr::Kind::Union, std::move(flat));
}

Expr make_star(Expr inner) {
  if (inner->kind == PathExpr::Kind::Empty || inner->kind == PathExpr::Kind::Eps) return make_eps();
  return compound(PathExpr::Kind::Star, {std::move(inner)});
}

std::string pretty(const PathExpr& e, const EdgeNamer& name) {
  std::string out;
  print(e, name, 0, out);
  return out;
}

std::string pretty(const PathExpr& e, const Cfg& g) {
  return pretty(e, [&](EdgeId id) { return g.edge(id).name; });
}

namespace {

class ExprParser {
public:
  ExprParser(std::string_view text, const Cfg& g) : s_(text), g_(g) {
    for (EdgeId e = 0; e < g.edge_slots(); ++e) names_.push_back(g.edge(e).name);
    // Longest names first so a prefix never shadows a longer edge name.
    std::sort(names_.begin(), names_.end(),
              [](const std::string& a, const std::string& b) { return a.size() > b.size() || (a.size() == b.size() && a < b); });
  }

  Expr run() {
    Expr e = alt();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(s_.substr(i_, 1)) + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, 1, static_cast<int>(i_) + 1); }
  void skip() {
    while (i_ < s_.size() && s_[i_] == ' ') ++i_;
  }
  bool eat(std::string_view tok) {
    skip();
    if (s_.substr(i_, tok.size()) != tok) return false;
    i_ += tok.size();
    return true;
  }
  bool at_primary() {
    skip();
    if (i_ >= s_.size()) return false;
    char c = s_[i_];
    return c != '+' && c != ')' && c != '*';
  }

  Expr alt() {
    std::vector<Expr> arms{seq()};
    while (eat("+")) arms.push_back(seq());
    return arms.size() == 1 ? arms[0] : make_union(std::move(arms));
  }
  Expr seq() {
    std::vector<Expr> parts;
    while (at_primary()) parts.push_back(postfix());
    if (parts.empty()) fail("expected an edge, '(', 'ε' or '∅'");
    return parts.size() == 1 ? parts[0] : make_concat(std::move(parts));
  }
  Expr postfix() {
    Expr e = primary();
    while (eat("*")) e = make_star(e);
    return e;
  }
  Expr primary() {
    if (eat("(")) {
      Expr e = alt();
      if (!eat(")")) fail("expected ')'");
      return e;
    }
    if (eat("ε")) return make_eps();
    if (eat("∅")) return make_empty();
    for (const auto& n : names_) {
      if (!n.empty() && s_.substr(i_, n.size()) == n) {
        i_ += n.size();
        return make_atom(*g_.find_edge(n));
      }
    }
    fail("unknown edge");
  }

  std::string_view s_;
  const Cfg& g_;
  std::vector<std::string> names_;
  std::size_t i_ = 0;
};

} // namespace

Expr parse_path_expression(std::string_view text, const Cfg& g) { return ExprParser(text, g).run(); }

bool same(const PathExpr& a, const PathExpr& b) {
  if (a.kind != b.kind || a.edge != b.edge || a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!same(*a.kids[i], *b.kids[i])) return false;
  return true;
}

bool matches(const PathExpr& e, const std::vector<EdgeId>& word) {
  std::vector<char> from(word.size() + 1, 0);
  from[0] = 1;
  return advance(e, word, std::move(from))[word.size()] != 0;
}

std::set<std::vector<EdgeId>> bounded_language(const PathExpr& e, int unroll, std::size_t max_len) {
  return words(e, unroll, max_len);
}

Expr compute_path_expression(const Cfg& g, NodeId t, const ReduceOptions& opt) {
  if (g.live_edge_count() == 0 && t == g.entry()) return make_eps();
  return Reducer(g, t, opt).run();
}

Expr compute_path_expression(const Cfg& g, const ReduceOptions& opt) {
  return compute_path_expression(g, g.exit(), opt);
}

} // namespace apa
