#include "support.hpp"

#include "apa/changegen.hpp"
#include "apa/engine.hpp"
#include "apa/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace apa;
namespace fs = std::filesystem;

namespace {

UninitAlgebra::Value uv(const Cfg& g, std::initializer_list<const char*> di,
                        std::initializer_list<const char*> pu) {
  UninitAlgebra::Value v;
  for (const char* n : di) v.di.insert(*g.find_var(n));
  for (const char* n : pu) v.pu.insert(*g.find_var(n));
  return v;
}

std::vector<ChangeOp> script(const std::string& text) { return parse_change_script(text); }

// Every cached fact equals direct evaluation of the node's own expression.
template <class A>
void check_node_facts(const Session<A>& s) {
  const ApaTree& t = s.tree();
  for (TreeIdx i : t.preorder()) {
    CAPTURE(pretty(*t.extract(i), s.cfg()));
    REQUIRE(t.node(i).has_fact);
    CHECK(lifted::equal(s.algebra(), s.fact_of(i), evaluate(s.algebra(), s.cfg(), *t.extract(i))));
  }
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("apa_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class A>
void random_equivalence(std::uint64_t seeds, std::size_t edges) {
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    SynthOptions so;
    so.edges = edges;
    Cfg g = synth_cfg(seed, so);
    Session<A> s(g);
    ChangeMix mix;
    mix.loop = seed % 3 == 0;
    mix.branch = seed % 4 == 0;
    for (int round = 0; round < 3; ++round) {
      auto plan = generate_ops(s.cfg(), 1 + (seed * 7 + round) % 12, seed * 31 + round, mix);
      CAPTURE(emit_change_script(plan.ops));
      s.apply(plan.ops);
      auto base = baseline_apa<A>(s.cfg());
      CHECK(lifted::equal(s.algebra(), s.root_fact(), base.root));
      CHECK(lifted::equal(s.algebra(), s.root_fact(), s.reinterpret_from_scratch()));
      // No cached fact is stale anywhere in the tree.
      Session<A> fresh = s;
      fresh.invalidate_all();
      fresh.apply({});
      auto a = s.preorder_facts(), b = fresh.preorder_facts();
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        REQUIRE(a[k]);
        CHECK(lifted::equal(s.algebra(), *a[k], *b[k]));
      }
    }
  }
}

} // namespace

TEST_CASE("baseline interpretation reproduces every row of the reference fact table") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  UninitAlgebra u;
  struct Row {
    const char* expr;
    std::initializer_list<const char*> di, pu;
  };
  const Row rows[] = {
      {"e1", {}, {}},
      {"e2", {"a"}, {}},
      {"e1e2", {"a"}, {}},
      {"e3", {"b"}, {"a"}},
      {"e1e2e3", {"a", "b"}, {}},
      {"e4", {}, {"a"}},
      {"e6", {}, {"a"}},
      {"e7", {"d"}, {"b"}},
      {"e6e7", {"d"}, {"a", "b"}},
      {"e8", {"a"}, {"a"}},
      {"e6'e8", {"a"}, {"a"}},
      {"e6e7+e6'e8", {}, {"a", "b"}},
      {"e9", {}, {"d"}},
      {"(e6e7+e6'e8)e9", {}, {"a", "b", "d"}},
      {"e4(e6e7+e6'e8)e9", {}, {"a", "b", "d"}},
      {"(e4(e6e7+e6'e8)e9)*", {}, {"a", "b", "d"}},
      {"e11", {"c"}, {"a"}},
      {"e12", {}, {"b", "c", "e"}},
      {"e11e12", {"c"}, {"a", "b", "e"}},
      {"(e4(e6e7+e6'e8)e9)*e4'e11e12", {"c"}, {"a", "b", "d", "e"}},
      {"e1e2e3(e4(e6e7+e6'e8)e9)*e4'e11e12", {"a", "b", "c"}, {"d", "e"}},
  };
  for (const Row& r : rows) {
    CAPTURE(r.expr);
    auto f = evaluate(u, g, *parse_path_expression(r.expr, g));
    REQUIRE(f);
    CHECK(*f == uv(g, r.di, r.pu));
  }

  Session<UninitAlgebra> s(g);
  CHECK(*s.root_fact() == uv(g, {"a", "b", "c"}, {"d", "e"}));
  CHECK(u.render(*s.root_fact(), &g) == "(DI={a,b,c}, PU={d,e})");
  check_node_facts(s);
  // Every compound row except e1e2 is a subtree of the balanced tree.
  std::set<std::string> subtrees;
  for (TreeIdx i : s.tree().preorder()) subtrees.insert(pretty(*s.tree().extract(i), g));
  for (const Row& r : rows) {
    if (std::string(r.expr) == "e1e2") continue;
    std::string canon = pretty(*parse_path_expression(r.expr, g), g);
    CHECK_MESSAGE(subtrees.count(canon), canon);
  }
}

TEST_CASE("inserting e5 recomputes only the leaf-to-root path up to early stop") {
  Session<UninitAlgebra> s(test::fixture_cfg("fig2.cfg"));
  Counters c = s.apply(parse_change_script(test::fixture_text("fig3_add_e5.chg")));
  const Cfg& g = s.cfg();
  CHECK(c.nodes_created == 2);
  CHECK(c.tree_nodes == 26);
  CHECK(c.rebuilds == 0);
  check_node_facts(s);
  CHECK(*s.root_fact() == uv(g, {"a", "b", "c"}, {"d", "e"}));

  const ApaTree& t = s.tree();
  TreeIdx e5 = *t.leaf_of(test::edge(g, "e5"));
  TreeIdx e4e5 = t.node(e5).parent;
  TreeIdx body = t.node(e4e5).parent;
  TreeIdx star = t.node(body).parent;
  CHECK(t.node(star).op == TreeOp::Star);
  CHECK(*s.fact_of(e5) == uv(g, {"b"}, {"a"}));
  CHECK(*s.fact_of(e4e5) == uv(g, {"b"}, {"a"}));
  // b is defined by e5 before e7 reads it, so b leaves the body's PU.
  CHECK(*s.fact_of(body) == uv(g, {"b"}, {"a", "d"}));
  CHECK(*s.fact_of(star) == uv(g, {}, {"a", "d"}));
  // e5, e4e5, body, star, and the star's parent, whose fact is unchanged.
  CHECK(c.facts_recomputed == 5);
  CHECK(c.modified == 6);
}

TEST_CASE("an insertion that leaves the body fact alone stops below the star") {
  Session<UninitAlgebra> s(test::fixture_cfg("fig2.cfg"));
  Counters c = s.apply(script("add e4 e5 - \"print(a)\"\n"));
  CHECK(c.nodes_created == 2);
  CHECK(c.facts_recomputed == 3); // e5, e4e5, body
  check_node_facts(s);
}

TEST_CASE("early stop changes the work, never the facts") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Cfg g = synth_cfg(seed, SynthOptions{150});
    EngineOptions off;
    off.early_stop = false;
    Session<UninitAlgebra> a(g), b(g, off);
    auto ops = generate_ops(g, 6, seed).ops;
    Counters ca = a.apply(ops), cb = b.apply(ops);
    CHECK(ca.facts_recomputed <= cb.facts_recomputed);
    CHECK(a.preorder_facts() == b.preorder_facts());
  }
}

TEST_CASE("an empty batch does no work") {
  Session<ReachDefAlgebra> s(test::fixture_cfg("fig2.cfg"));
  Counters c = s.apply({});
  CHECK(c.nodes_created == 0);
  CHECK(c.facts_recomputed == 0);
  CHECK(c.modified == 0);
  CHECK(c.tree_nodes == 24);
}

TEST_CASE("incremental results equal from-scratch analysis") {
  SUBCASE("uninit") { random_equivalence<UninitAlgebra>(15, 120); }
  SUBCASE("reachdef") { random_equivalence<ReachDefAlgebra>(15, 120); }
  SUBCASE("consttime") { random_equivalence<ConstTimeAlgebra>(15, 120); }
}

TEST_CASE("a batch with a bad op changes nothing") {
  Session<UninitAlgebra> s(test::fixture_cfg("fig2.cfg"));
  std::string cfg_before = emit_cfg_text(s.cfg());
  auto root_before = s.root_fact();
  std::string tree_before = s.tree().dump([&](EdgeId e) { return s.cfg().edge(e).name; });
  CHECK_THROWS_AS(s.apply(script("add e4 e5 - \"b := a + 5\"\ndel e99\n")), ChangeError);
  CHECK(emit_cfg_text(s.cfg()) == cfg_before);
  CHECK(s.root_fact() == root_before);
  CHECK(s.tree().dump([&](EdgeId e) { return s.cfg().edge(e).name; }) == tree_before);
  s.apply(script("add e4 e5 - \"b := a + 5\"\n"));
  CHECK(s.tree().size() == 26);
}

TEST_CASE("sessions persist byte for byte") {
  for (Analysis a : {Analysis::Uninit, Analysis::ReachDef, Analysis::ConstTime}) {
    CAPTURE(analysis_name(a));
    Cfg g = synth_cfg(3, SynthOptions{80});
    auto s = AnySession::create(a, g);
    auto ops = generate_ops(g, 10, 3).ops;
    s->apply(ops);
    fs::path d1 = scratch("persist1"), d2 = scratch("persist2");
    s->save(d1);
    auto t = AnySession::load(d1);
    t->save(d2);
    for (const char* f : {"cfg.txt", "tree.dump", "facts.json", "meta.json"}) {
      CAPTURE(f);
      CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    CHECK(t->root_text() == s->root_text());
    CHECK(t->matches_baseline());
    // Both continue identically.
    auto more = generate_ops(s->cfg(), 8, 4).ops;
    Counters cs = s->apply(more), ct = t->apply(more);
    CHECK(cs == ct);
    CHECK(s->dump_tree() == t->dump_tree());
    fs::remove_all(d1);
    fs::remove_all(d2);
  }
}

TEST_CASE("a corrupt session directory is reported") {
  fs::path d = scratch("corrupt");
  auto s = AnySession::create(Analysis::Uninit, test::fixture_cfg("fig2.cfg"));
  s->save(d);
  std::ofstream(d / "meta.json") << "{\"format\": \"other\"}";
  CHECK_THROWS_AS(AnySession::load(d), Error);
  fs::remove_all(d);
}

TEST_CASE("lazy deletion matches the physically edited program") {
  SUBCASE("deleting e5 restores the original facts") {
    Session<UninitAlgebra> s(test::fixture_cfg("fig2.cfg"));
    auto before = s.root_fact();
    s.apply(script("add e4 e5 - \"b := a + 5\"\n"));
    s.apply(script("del e5\n"));
    CHECK(s.root_fact() == before);
    CHECK(s.root_fact() == baseline_apa<UninitAlgebra>(test::fixture_cfg("fig2.cfg")).root);
    check_node_facts(s);
  }
  SUBCASE("deleting one arm of a branch leaves the other") {
    Cfg g = parse_cfg_text("entry n1\nnode n1\nnode n2\n"
                           "edge e1 n1 n2 \"x := 1\"\n"
                           "edge e2 n1 n2 \"y := x\"\n");
    Session<UninitAlgebra> s(g);
    s.apply(script("del e1\n"));
    UninitAlgebra u;
    CHECK(s.root_fact() == Fact<UninitAlgebra>(u.edge_fact(s.cfg(), test::edge(s.cfg(), "e2"))));
  }
  SUBCASE("deleting a loop body leaves an empty loop") {
    Cfg g = parse_cfg_text("entry n1\nnode n1\nnode n2\nnode n3\n"
                           "edge a n1 n2 \"skip\"\n"
                           "edge l n2 n2 \"x := y\"\n"
                           "edge b n2 n3 \"skip\"\n");
    Session<UninitAlgebra> s(g);
    CHECK(s.root_fact()->pu.size() == 1);
    s.apply(script("del l\n"));
    CHECK(*s.root_fact() == UninitAlgebra::Value{});
    CHECK(s.root_fact() == baseline_apa<UninitAlgebra>(s.cfg()).root);

    // A tombstoned star body, interpreted before any purge, acts as 1.
    auto id = [&](const std::string& n) { return test::edge(g, n); };
    ApaTree t = ApaTree::load("seq w=3 m=1 [MOD] fact=-\n"
                              "  leaf a w=1 m=0 [MOD] fact=-\n"
                              "  seq w=2 m=1 [MOD] fact=-\n"
                              "    star w=1 m=1 [MOD] fact=-\n"
                              "      leaf l w=1 m=1 [MOD] [DEL] fact=-\n"
                              "    leaf b w=1 m=0 [MOD] fact=-\n",
                              id, TreeConfig{});
    std::vector<Fact<UninitAlgebra>> facts;
    Counters c;
    UninitAlgebra u;
    Interpreter<UninitAlgebra>(t, facts, u, g, true, c).run();
    TreeIdx star = t.node(*t.leaf_of(id("l"))).parent;
    CHECK(facts[static_cast<std::size_t>(star)] == Fact<UninitAlgebra>(UninitAlgebra::Value{}));
    CHECK(facts[static_cast<std::size_t>(t.root())] == Fact<UninitAlgebra>(UninitAlgebra::Value{}));
  }
}

TEST_CASE("a single update touches about one root path") {
  Cfg g = synth_cfg(9, SynthOptions{500});
  Session<ReachDefAlgebra> r(g);
  Session<UninitAlgebra> s(g);
  EdgeId target = g.live_edges()[g.live_edges().size() / 2];
  ChangeOp op;
  op.kind = ChangeOp::Kind::Update;
  op.anchor = g.edge(target).name;
  op.stmt_text = g.edge(target).cond ? "v0 < 1" : "print(v0)";
  Counters c = s.apply({op});
  CHECK(c.facts_recomputed <= static_cast<std::size_t>(s.tree().height() + 1));
  CHECK(c.facts_recomputed < s.tree().size() / 10);
  r.apply({op});
  CHECK(r.root_fact() == baseline_apa<ReachDefAlgebra>(r.cfg()).root);
}

TEST_CASE("the constant-time example is leaky") {
  auto s = AnySession::create(Analysis::ConstTime, test::fixture_cfg("fig6.cfg"));
  REQUIRE(s->verdict());
  CHECK(*s->verdict() == Verdict::Leaky);
  auto rec = s->result_record();
  CHECK(rec["analysis"] == "consttime");
  CHECK(rec["verdict"] == "leaky");
  CHECK(rec["counters"]["tree-nodes"] == s->tree().size());
  CHECK(s->matches_baseline());
}
