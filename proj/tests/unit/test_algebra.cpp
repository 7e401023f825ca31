#include "apa/algebra.hpp"
#include "apa/analyses.hpp"
#include "apa/lawpool.hpp"

#include <doctest.h>

using namespace apa;

namespace {

// Uninit with one deliberate defect each; the checkers must notice.
struct WrongSeqUninit : UninitAlgebra {
  Value seq(const Value& l, const Value& r) const { return {l.di | r.di, l.pu | (r.pu - r.di)}; }
};
struct WrongStarUninit : UninitAlgebra {
  Value star(const Value& x) const { return x; }
};
struct WrongChoiceUninit : UninitAlgebra {
  Value choice(const Value& l, const Value& r) const { return {l.di | r.di, l.pu | r.pu}; }
};

template <class A>
std::vector<Fact<A>> uninit_pool(const A& alg) {
  return compose_pool(alg, enumerate_universe(UninitAlgebra{}, IdSet{0, 1, 2}), 200, 5);
}

} // namespace

TEST_CASE("lifted zero is the choice identity and the seq annihilator") {
  UninitAlgebra u;
  Fact<UninitAlgebra> a = UninitAlgebra::Value{{1}, {2}};
  CHECK(lifted::equal(u, lifted::choice(u, a, lifted::zero(u)), a));
  CHECK(lifted::equal(u, lifted::choice(u, lifted::zero(u), a), a));
  CHECK(!lifted::seq(u, a, lifted::zero(u)));
  CHECK(!lifted::seq(u, lifted::zero(u), a));
  CHECK(lifted::equal(u, lifted::star(u, lifted::zero(u)), lifted::one(u)));
  CHECK(lifted::leq(u, lifted::zero(u), a));
  CHECK(lifted::leq(u, lifted::zero(u), lifted::star(u, a)));
  CHECK(lifted::render(u, lifted::zero(u)) == "0");
}

TEST_CASE("uninit and reachdef satisfy every law group") {
  for (Analysis a : {Analysis::Uninit, Analysis::ReachDef}) {
    CAPTURE(analysis_name(a));
    LawSuite s = run_law_suite(a, LawSampling{1000, 1, false});
    CHECK(s.kleene.all_hold());
    CHECK(s.kleene.laws.size() == 8);
    CHECK(s.star_free.all_hold());
    CHECK(s.pre_kleene.all_hold());
    CHECK(s.order.all_hold());
    CHECK(!claimed_laws_fail(a, s));
    for (const auto& l : s.kleene.laws) CHECK(l.checked >= 1000);
  }
}

TEST_CASE("exhaustive checks over a three-element universe agree") {
  for (Analysis a : {Analysis::Uninit, Analysis::ReachDef}) {
    CAPTURE(analysis_name(a));
    LawSuite s = run_law_suite(a, LawSampling{0, 1, true});
    CHECK(s.kleene.all_hold());
    CHECK(s.star_free.all_hold());
    CHECK(s.pre_kleene.all_hold());
    CHECK(s.order.all_hold());
  }
  LawSuite c = run_law_suite(Analysis::ConstTime, LawSampling{0, 1, true});
  CHECK(!c.kleene.all_hold());
  CHECK(!c.star_free.find("star-free")->holds);
}

TEST_CASE("consttime breaks commutativity and the star-free law") {
  LawSuite s = run_law_suite(Analysis::ConstTime, LawSampling{1000, 1, false});
  CHECK(!s.kleene.all_hold());
  const LawResult* comm = s.kleene.find("commutativity");
  REQUIRE(comm);
  CHECK(!comm->holds);
  CHECK(comm->counterexample);
  const LawResult* sf = s.star_free.find("star-free");
  REQUIRE(sf);
  CHECK(!sf->holds);
  REQUIRE(sf->counterexample);
  CHECK(sf->counterexample->find("∞") != std::string::npos);
  CHECK(claimed_laws_fail(Analysis::ConstTime, s));
  CHECK(s.order.all_hold());
}

TEST_CASE("the star-free law is trivial at one") {
  ReachDefAlgebra r;
  auto one = lifted::one(r);
  CHECK(lifted::equal(r, lifted::star(r, one), lifted::choice(r, one, lifted::seq(r, one, one))));
  ConstTimeAlgebra c{IdSet{0}};
  auto cone = lifted::one(c);
  CHECK(lifted::equal(c, lifted::star(c, cone), lifted::choice(c, cone, lifted::seq(c, cone, cone))));
}

TEST_CASE("mutated algebras are caught by the same checkers") {
  WrongSeqUninit ws;
  CHECK(!check_kleene_laws(ws, uninit_pool(ws)).all_hold());
  WrongStarUninit wt;
  LawReport r = check_kleene_laws(wt, uninit_pool(wt));
  CHECK(!r.find("unfolding")->holds);
  CHECK(!check_pre_kleene(wt, uninit_pool(wt)).all_hold());
  WrongChoiceUninit wc;
  CHECK(!check_kleene_laws(wc, uninit_pool(wc)).all_hold());
  // The reference algebra passes on the very same pool.
  UninitAlgebra u;
  CHECK(check_kleene_laws(u, uninit_pool(u)).all_hold());
}

TEST_CASE("sampling is reproducible from the seed") {
  auto [alg, pool] = law_pool<ConstTimeAlgebra>(3);
  auto [alg2, pool2] = law_pool<ConstTimeAlgebra>(3);
  REQUIRE(pool.size() == pool2.size());
  for (std::size_t i = 0; i < pool.size(); ++i) CHECK(lifted::equal(alg, pool[i], pool2[i]));
  CHECK(check_kleene_laws(alg, pool, {500, 9}).to_text() == check_kleene_laws(alg2, pool2, {500, 9}).to_text());
}

TEST_CASE("a law report names failures") {
  LawReport r;
  r.laws.push_back({"identity", true, 3, std::nullopt});
  r.laws.push_back({"commutativity", false, 1, std::string("a=1 b=0")});
  CHECK(!r.all_hold());
  CHECK(r.find("identity")->holds);
  CHECK(r.find("nope") == nullptr);
  CHECK(r.to_text() == "identity: holds (3 checked)\ncommutativity: FAILS (1 checked) counterexample: a=1 b=0\n");
}
