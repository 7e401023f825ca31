#include "support.hpp"

#include "apa/analyses.hpp"
#include "apa/lawpool.hpp"

#include <doctest.h>

#include <random>

using namespace apa;

namespace {

IdSet vars(const Cfg& g, std::initializer_list<const char*> names) {
  IdSet s;
  for (const char* n : names) s.insert(*g.find_var(n));
  return s;
}

IdSet edges(const Cfg& g, std::initializer_list<const char*> names) {
  IdSet s;
  for (const char* n : names) s.insert(test::edge(g, n));
  return s;
}

std::uint64_t random_bound(std::mt19937_64& rng) {
  if (rng() % 5 == 0) return kInfinity;
  return rng() % 50;
}

} // namespace

TEST_CASE("uninit operations on the worked example") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  UninitAlgebra u;
  auto a = vars(g, {"a"}), b = vars(g, {"b"}), d = vars(g, {"d"});
  CHECK(u.seq({a, {}}, {b, a}) == UninitAlgebra::Value{a | b, {}});
  CHECK(u.choice({d, a | b}, {a, a}) == UninitAlgebra::Value{{}, a | b});
  CHECK(u.star({{}, a | b | d}) == UninitAlgebra::Value{{}, a | b | d});
  CHECK(u.render(u.seq({a, {}}, {b, a}), &g) == "(DI={a,b}, PU={})");
}

TEST_CASE("uninit edge facts") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  UninitAlgebra u;
  CHECK(u.edge_fact(g, test::edge(g, "e1")) == UninitAlgebra::Value{});
  CHECK(u.edge_fact(g, test::edge(g, "e3")) == UninitAlgebra::Value{vars(g, {"b"}), vars(g, {"a"})});
  CHECK(u.edge_fact(g, test::edge(g, "e8")) == UninitAlgebra::Value{vars(g, {"a"}), vars(g, {"a"})});
  CHECK(u.edge_fact(g, test::edge(g, "e4'")) == UninitAlgebra::Value{{}, vars(g, {"a"})});
  CHECK(u.edge_fact(g, test::edge(g, "e12")) == UninitAlgebra::Value{{}, vars(g, {"b", "c", "e"})});
}

TEST_CASE("reaching-definition operations") {
  ReachDefAlgebra r;
  IdSet d1{1}, d2{2};
  CHECK(r.seq({d1, d2}, {d2, d1}) == ReachDefAlgebra::Value{d2, d1});
  IdSet def{4, 5, 6};
  ReachDefAlgebra::Value x{IdSet{1}, IdSet{4, 5}};
  CHECK(r.choice(x, {{}, def}) == x);

  Cfg g = test::fixture_cfg("fig2.cfg");
  auto e2 = r.edge_fact(g, test::edge(g, "e2"));
  CHECK(e2.gen == edges(g, {"e2"}));
  CHECK(e2.kill == edges(g, {"e8"}));
  CHECK(r.edge_fact(g, test::edge(g, "e9")) == ReachDefAlgebra::Value{});
  CHECK(r.render(e2, &g) == "(G={e2}, K={e8})");
}

TEST_CASE("gen and kill stay disjoint under every operation") {
  auto [r, pool] = law_pool<ReachDefAlgebra>(11, 500);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3000; ++i) {
    const auto& a = pool[rng() % pool.size()];
    const auto& b = pool[rng() % pool.size()];
    for (const auto& f : {lifted::seq(r, a, b), lifted::choice(r, a, b), lifted::star(r, a)}) {
      if (f) CHECK(!f->gen.intersects(f->kill));
    }
  }
}

TEST_CASE("constant-time operations on the worked example") {
  Cfg g = test::fixture_cfg("fig6.cfg");
  ConstTimeAlgebra c = make_algebra<ConstTimeAlgebra>(g);
  auto mask = vars(g, {"mask"}), cond = vars(g, {"cond"}), loop = vars(g, {"loop"});
  auto r = c.seq({4, 4, mask}, {2, kInfinity, cond | loop});
  CHECK(r == ConstTimeAlgebra::Value{6, kInfinity, mask | cond | loop});
  CHECK(c.render(r, &g) == "([6,∞], {cond,loop,mask})");
  CHECK(c.choice({1, kInfinity, cond | loop}, {1, 1, cond}) == ConstTimeAlgebra::Value{1, kInfinity, cond | loop});
  CHECK(c.star({2, 2, loop}) == ConstTimeAlgebra::Value{0, kInfinity, {}});
  // Untainted control keeps the left operand and drops the control set.
  ConstTimeAlgebra clean{};
  CHECK(clean.choice({1, 3, loop}, {2, 9, cond}) == ConstTimeAlgebra::Value{1, 3, {}});
  CHECK(clean.star({2, 2, loop}) == ConstTimeAlgebra::Value{});
}

TEST_CASE("constant-time edge facts charge one unit per statement") {
  Cfg g = test::fixture_cfg("fig6.cfg");
  ConstTimeAlgebra c = make_algebra<ConstTimeAlgebra>(g);
  CHECK(c.edge_fact(g, test::edge(g, "e2")) == ConstTimeAlgebra::Value{1, 1, {}});
  CHECK(c.edge_fact(g, test::edge(g, "e7")) == ConstTimeAlgebra::Value{0, 0, vars(g, {"cond"})});
  CHECK(c.edge_fact(g, test::edge(g, "e8'")) == ConstTimeAlgebra::Value{0, 0, vars(g, {"loop"})});
}

TEST_CASE("interval addition saturates and associates") {
  CHECK(ConstTimeAlgebra::add(kInfinity, 3) == kInfinity);
  CHECK(ConstTimeAlgebra::add(3, kInfinity) == kInfinity);
  CHECK(ConstTimeAlgebra::add(kInfinity - 1, 1) == kInfinity);
  CHECK(ConstTimeAlgebra::add(kInfinity - 2, 1) == kInfinity - 1);
  ConstTimeAlgebra c{IdSet{0}};
  std::mt19937_64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    ConstTimeAlgebra::Value v[3];
    for (auto& x : v) {
      std::uint64_t p = random_bound(rng), q = random_bound(rng);
      x = {std::min(p, q), std::max(p, q), IdSet{static_cast<std::uint32_t>(rng() % 3)}};
    }
    CHECK(c.seq(c.seq(v[0], v[1]), v[2]) == c.seq(v[0], c.seq(v[1], v[2])));
  }
}

TEST_CASE("taint follows data and control dependence") {
  Cfg g = test::fixture_cfg("fig6.cfg");
  IdSet t = compute_taint(g);
  CHECK(vars(g, {"secret", "mask", "cond"}).subset_of(t));
  // loop is assigned inside the region controlled by cond.
  Cfg lowered = test::fixture_cfg("fig6.imp");
  CHECK(compute_taint(lowered) == vars(lowered, {"secret", "mask", "cond", "sum", "loop"}));
  CHECK(t == vars(g, {"secret", "mask", "cond", "sum", "loop"}));

  Cfg plain = test::fixture_cfg("fig2.cfg");
  CHECK(compute_taint(plain).empty());

  Cfg line = lang::lower_to_cfg(lang::parse_program("fn f(secret s) { int x, y, z; x := s; y := x; z := 1 }"));
  CHECK(compute_taint(line) == vars(line, {"s", "x", "y"}));

  // Assignments under a secret-dependent loop are tainted, but not after it.
  Cfg ctl = lang::lower_to_cfg(lang::parse_program(
      "fn f(secret s) { int i, k, w; while i < s do { i := i + 1; k := 2 }; w := 3 }"));
  CHECK(compute_taint(ctl) == vars(ctl, {"s", "i", "k"}));
}

TEST_CASE("taint does not depend on the visiting order") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    SynthOptions so;
    so.edges = 120;
    so.secrets = 2;
    Cfg g = synth_cfg(seed, so);
    IdSet t = compute_taint(g);
    CHECK(t == compute_taint(g, true));
    for (const auto& s : g.secrets()) CHECK(t.contains(*g.find_var(s)));
  }
}

TEST_CASE("leak verdicts") {
  CHECK(leak_verdict({6, kInfinity, {}}) == Verdict::Leaky);
  CHECK(leak_verdict({3, 3, {}}) == Verdict::ConstantTime);
  CHECK(leak_verdict({0, 0, {}}) == Verdict::ConstantTime);
  CHECK(leak_verdict({kInfinity, kInfinity, {}}) == Verdict::ConstantTime);
  CHECK(verdict_name(Verdict::Leaky) == "leaky");
  CHECK(verdict_name(Verdict::ConstantTime) == "constant-time");
}

TEST_CASE("join is monotone for all three algebras") {
  auto check = [](auto tag) {
    using A = decltype(tag);
    auto [alg, pool] = law_pool<A>(21, 200);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 2000; ++i) {
      const auto& a = pool[rng() % pool.size()];
      const auto& b = pool[rng() % pool.size()];
      CHECK(lifted::leq(alg, a, lifted::choice(alg, a, b)));
    }
  };
  check(UninitAlgebra{});
  check(ReachDefAlgebra{});
  check(ConstTimeAlgebra{});
}

TEST_CASE("facts survive a JSON round trip") {
  Cfg g = test::fixture_cfg("fig6.cfg");
  auto trip = [&](auto tag) {
    using A = decltype(tag);
    auto [alg, pool] = law_pool<A>(5, 100);
    Cfg h = synth_cfg(5, SynthOptions{40, 4, 2, 1});
    for (const auto& f : pool) {
      if (!f) continue;
      auto j = alg.to_json(*f, h);
      CHECK(alg.equal(alg.from_json(j, h), *f));
    }
  };
  trip(UninitAlgebra{});
  trip(ReachDefAlgebra{});
  trip(ConstTimeAlgebra{});
  ConstTimeAlgebra c;
  auto j = c.to_json({6, kInfinity, vars(g, {"mask"})}, g);
  CHECK(j.dump() == R"({"C":["mask"],"LB":6,"UB":"inf"})");
}

TEST_CASE("universes have the expected sizes") {
  IdSet ids{0, 1, 2};
  CHECK(enumerate_universe(UninitAlgebra{}, ids).size() == 65);
  CHECK(enumerate_universe(ReachDefAlgebra{}, ids).size() == 28);
  CHECK(enumerate_universe(ConstTimeAlgebra{}, ids).size() == 81);
}

TEST_CASE("analysis names") {
  CHECK(parse_analysis("uninit") == Analysis::Uninit);
  CHECK(parse_analysis("reachdef") == Analysis::ReachDef);
  CHECK(parse_analysis("consttime") == Analysis::ConstTime);
  CHECK(analysis_name(Analysis::ReachDef) == "reachdef");
  CHECK_THROWS(parse_analysis("liveness"));
}
