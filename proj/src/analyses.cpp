#include "apa/analyses.hpp"

#include "apa/error.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace apa {

Analysis parse_analysis(std::string_view name) {
  if (name == "uninit") return Analysis::Uninit;
  if (name == "reachdef") return Analysis::ReachDef;
  if (name == "consttime") return Analysis::ConstTime;
  throw Error("unknown analysis '" + std::string(name) + "' (expected uninit, reachdef or consttime)");
}

std::string_view analysis_name(Analysis a) {
  switch (a) {
  case Analysis::Uninit: return "uninit";
  case Analysis::ReachDef: return "reachdef";
  case Analysis::ConstTime: return "consttime";
  }
  return "?";
}

namespace {

// Digit runs compare numerically so e2 sorts before e10.
bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t i2 = i, j2 = j;
      while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
      while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
      std::string_view da(a.data() + i, i2 - i), db(b.data() + j, j2 - j);
      while (da.size() > 1 && da.front() == '0') da.remove_prefix(1);
      while (db.size() > 1 && db.front() == '0') db.remove_prefix(1);
      if (da.size() != db.size()) return da.size() < db.size();
      if (da != db) return da < db;
      i = i2;
      j = j2;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

using Namer = std::function<std::string(std::uint32_t)>;

std::vector<std::string> names_of(const IdSet& s, const Namer& name) {
  std::vector<std::string> out;
  for (auto id : s) out.push_back(name(id));
  std::sort(out.begin(), out.end(), natural_less);
  return out;
}

std::string set_text(const IdSet& s, const Namer& name) {
  std::string out = "{";
  bool first = true;
  for (const auto& n : names_of(s, name)) {
    out += (first ? "" : ",") + n;
    first = false;
  }
  return out + "}";
}

Namer var_namer(const Cfg* g) {
  if (g) return [g](std::uint32_t v) { return g->var_name(v); };
  return [](std::uint32_t v) { return "v" + std::to_string(v); };
}

Namer edge_namer(const Cfg* g) {
  if (g) return [g](std::uint32_t e) { return g->edge(e).name; };
  return [](std::uint32_t e) { return "#" + std::to_string(e); };
}

IdSet uses_of(const CfgEdge& ed) { return ed.uses; }

IdSet vars_from_json(const nlohmann::json& j, Cfg& g) {
  std::vector<std::uint32_t> ids;
  for (const auto& v : j) ids.push_back(g.intern(v.get<std::string>()));
  return IdSet(std::move(ids));
}

IdSet edges_from_json(const nlohmann::json& j, const Cfg& g) {
  std::vector<std::uint32_t> ids;
  for (const auto& v : j) {
    auto name = v.get<std::string>();
    auto e = g.find_edge(name);
    if (!e) throw Error("fact refers to unknown edge '" + name + "'");
    ids.push_back(*e);
  }
  return IdSet(std::move(ids));
}

std::string bound_text(std::uint64_t b) { return b == kInfinity ? "∞" : std::to_string(b); }

nlohmann::json bound_json(std::uint64_t b) {
  if (b == kInfinity) return "inf";
  return b;
}

std::uint64_t bound_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf") throw Error("bad interval bound " + j.dump());
    return kInfinity;
  }
  return j.get<std::uint64_t>();
}

std::vector<IdSet> subsets(const IdSet& ids) {
  std::vector<IdSet> out;
  const auto& v = ids.ids();
  for (std::size_t mask = 0; mask < (std::size_t{1} << v.size()); ++mask) {
    IdSet s;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (mask >> k & 1) s.insert(v[k]);
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace

// ---- uninit ---------------------------------------------------------------

UninitAlgebra::Value UninitAlgebra::edge_fact(const Cfg& g, EdgeId e) const {
  const CfgEdge& ed = g.edge(e);
  Value v;
  if (ed.def != kNoVar) v.di.insert(ed.def);
  v.pu = uses_of(ed);
  return v;
}

std::string UninitAlgebra::render(const Value& v, const Cfg* g) const {
  auto name = var_namer(g);
  return "(DI=" + set_text(v.di, name) + ", PU=" + set_text(v.pu, name) + ")";
}

nlohmann::json UninitAlgebra::to_json(const Value& v, const Cfg& g) const {
  auto name = var_namer(&g);
  return {{"DI", names_of(v.di, name)}, {"PU", names_of(v.pu, name)}};
}

UninitAlgebra::Value UninitAlgebra::from_json(const nlohmann::json& j, Cfg& g) const {
  return {vars_from_json(j.at("DI"), g), vars_from_json(j.at("PU"), g)};
}

std::vector<Fact<UninitAlgebra>> enumerate_universe(const UninitAlgebra&, const IdSet& ids) {
  std::vector<Fact<UninitAlgebra>> out{std::nullopt};
  auto subs = subsets(ids);
  for (const auto& di : subs)
    for (const auto& pu : subs) out.push_back(UninitAlgebra::Value{di, pu});
  return out;
}

// ---- reaching definitions -------------------------------------------------

ReachDefAlgebra::Value ReachDefAlgebra::edge_fact(const Cfg& g, EdgeId e) const {
  const CfgEdge& ed = g.edge(e);
  if (ed.def == kNoVar) return {};
  IdSet self{e};
  return {self, g.defs_of(ed.def) - self};
}

std::string ReachDefAlgebra::render(const Value& v, const Cfg* g) const {
  auto name = edge_namer(g);
  return "(G=" + set_text(v.gen, name) + ", K=" + set_text(v.kill, name) + ")";
}

nlohmann::json ReachDefAlgebra::to_json(const Value& v, const Cfg& g) const {
  auto name = edge_namer(&g);
  return {{"G", names_of(v.gen, name)}, {"K", names_of(v.kill, name)}};
}

ReachDefAlgebra::Value ReachDefAlgebra::from_json(const nlohmann::json& j, Cfg& g) const {
  return {edges_from_json(j.at("G"), g), edges_from_json(j.at("K"), g)};
}

std::vector<Fact<ReachDefAlgebra>> enumerate_universe(const ReachDefAlgebra&, const IdSet& ids) {
  std::vector<Fact<ReachDefAlgebra>> out{std::nullopt};
  auto subs = subsets(ids);
  for (const auto& gen : subs)
    for (const auto& kill : subs)
      if (!gen.intersects(kill)) out.push_back(ReachDefAlgebra::Value{gen, kill});
  return out;
}

// ---- constant time --------------------------------------------------------

ConstTimeAlgebra::Value ConstTimeAlgebra::edge_fact(const Cfg& g, EdgeId e) const {
  const CfgEdge& ed = g.edge(e);
  if (ed.cond) return {0, 0, uses_of(ed)};
  return {1, 1, {}};
}

std::string ConstTimeAlgebra::render(const Value& v, const Cfg* g) const {
  return "([" + bound_text(v.lb) + "," + bound_text(v.ub) + "], " + set_text(v.ctrl, var_namer(g)) + ")";
}

nlohmann::json ConstTimeAlgebra::to_json(const Value& v, const Cfg& g) const {
  return {{"LB", bound_json(v.lb)}, {"UB", bound_json(v.ub)}, {"C", names_of(v.ctrl, var_namer(&g))}};
}

ConstTimeAlgebra::Value ConstTimeAlgebra::from_json(const nlohmann::json& j, Cfg& g) const {
  return {bound_from_json(j.at("LB")), bound_from_json(j.at("UB")), vars_from_json(j.at("C"), g)};
}

std::vector<Fact<ConstTimeAlgebra>> enumerate_universe(const ConstTimeAlgebra&, const IdSet& ids) {
  std::vector<Fact<ConstTimeAlgebra>> out{std::nullopt};
  const std::uint64_t bounds[] = {0, 1, 2, kInfinity};
  for (auto lb : bounds)
    for (auto ub : bounds)
      if (lb <= ub)
        for (const auto& c : subsets(ids)) out.push_back(ConstTimeAlgebra::Value{lb, ub, c});
  return out;
}

Verdict leak_verdict(const ConstTimeAlgebra::Value& f) {
  return f.lb == f.ub ? Verdict::ConstantTime : Verdict::Leaky;
}

std::string_view verdict_name(Verdict v) {
  return v == Verdict::Leaky ? "leaky" : "constant-time";
}

// ---- taint ----------------------------------------------------------------

namespace {

// Immediate post-dominators over live nodes (Cooper, Harvey and Kennedy's
// iterative scheme on the reversed graph). kNoNode where undefined.
std::vector<NodeId> post_dominators(const Cfg& g) {
  std::vector<NodeId> ipdom(g.node_slots(), kNoNode);
  NodeId exit = g.exit();
  if (exit == kNoNode) return ipdom;

  // Postorder of the reversed graph from the exit.
  std::vector<NodeId> order;
  std::vector<int> rank(g.node_slots(), -1);
  std::vector<char> seen(g.node_slots(), 0);
  std::vector<std::pair<NodeId, std::size_t>> stack{{exit, 0}};
  seen[exit] = 1;
  while (!stack.empty()) {
    auto& [n, k] = stack.back();
    const auto& in = g.node(n).in;
    if (k < in.size()) {
      NodeId m = g.edge(in[k++]).src;
      if (!seen[m]) {
        seen[m] = 1;
        stack.push_back({m, 0});
      }
    } else {
      rank[n] = static_cast<int>(order.size());
      order.push_back(n);
      stack.pop_back();
    }
  }

  auto intersect = [&](NodeId a, NodeId b) {
    while (a != b) {
      while (rank[a] < rank[b]) a = ipdom[a];
      while (rank[b] < rank[a]) b = ipdom[b];
    }
    return a;
  };

  ipdom[exit] = exit;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      NodeId n = *it;
      if (n == exit) continue;
      NodeId best = kNoNode;
      for (EdgeId e : g.node(n).out) {
        NodeId s = g.edge(e).dst;
        if (ipdom[s] == kNoNode) continue;
        best = best == kNoNode ? s : intersect(s, best);
      }
      if (best != kNoNode && ipdom[n] != best) {
        ipdom[n] = best;
        changed = true;
      }
    }
  }
  ipdom[exit] = kNoNode;
  return ipdom;
}

struct Branch {
  IdSet uses;                 // variables read by the branch's conditions
  std::vector<EdgeId> region; // edges control dependent on the branch
};

std::vector<Branch> branches(const Cfg& g) {
  std::vector<Branch> out;
  std::vector<NodeId> ipdom = post_dominators(g);
  for (NodeId b : g.live_nodes()) {
    const auto& outs = g.node(b).out;
    if (outs.size() < 2) continue;
    Branch br;
    for (EdgeId e : outs)
      if (g.edge(e).cond) br.uses = br.uses | g.edge(e).uses;
    if (br.uses.empty()) continue;
    // Nodes reachable from the branch without passing its post-dominator.
    NodeId stop = ipdom[b];
    std::vector<char> seen(g.node_slots(), 0);
    std::vector<NodeId> work;
    for (EdgeId e : outs) {
      NodeId s = g.edge(e).dst;
      if (s != stop && !seen[s]) {
        seen[s] = 1;
        work.push_back(s);
      }
    }
    while (!work.empty()) {
      NodeId n = work.back();
      work.pop_back();
      for (EdgeId e : g.node(n).out) {
        br.region.push_back(e);
        NodeId s = g.edge(e).dst;
        if (s != stop && !seen[s]) {
          seen[s] = 1;
          work.push_back(s);
        }
      }
    }
    std::sort(br.region.begin(), br.region.end());
    br.region.erase(std::unique(br.region.begin(), br.region.end()), br.region.end());
    out.push_back(std::move(br));
  }
  return out;
}

} // namespace

IdSet compute_taint(const Cfg& g, bool reverse_order) {
  IdSet taint;
  for (const auto& s : g.secrets())
    if (auto v = g.find_var(s)) taint.insert(*v);

  std::vector<EdgeId> edges = g.live_edges();
  std::vector<Branch> brs = branches(g);
  if (reverse_order) {
    std::reverse(edges.begin(), edges.end());
    std::reverse(brs.begin(), brs.end());
  }

  for (bool changed = true; changed;) {
    changed = false;
    auto taint_def = [&](EdgeId e) {
      VarId d = g.edge(e).def;
      if (d != kNoVar && !taint.contains(d)) {
        taint.insert(d);
        changed = true;
      }
    };
    for (EdgeId e : edges)
      if (g.edge(e).uses.intersects(taint)) taint_def(e);
    for (const auto& br : brs)
      if (br.uses.intersects(taint))
        for (EdgeId e : br.region) taint_def(e);
  }
  return taint;
}

} // namespace apa
