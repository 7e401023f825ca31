#pragma once

#include "apa/idset.hpp"

#include <concepts>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace apa {

class Cfg;

/// A semantic algebra 〈D, ⊗, ⊕, ⊛, 1〉 over values of type Value. The ⊕
/// identity 0 is not a member of Value; Fact<A> adds it (see below).
template <class A>
concept SemanticAlgebra = requires(const A& alg, const typename A::Value& x, const Cfg& g, EdgeId e) {
  { alg.one() } -> std::convertible_to<typename A::Value>;
  { alg.seq(x, x) } -> std::convertible_to<typename A::Value>;
  { alg.choice(x, x) } -> std::convertible_to<typename A::Value>;
  { alg.star(x) } -> std::convertible_to<typename A::Value>;
  { alg.edge_fact(g, e) } -> std::convertible_to<typename A::Value>;
  { alg.equal(x, x) } -> std::convertible_to<bool>;
  { alg.render(x) } -> std::convertible_to<std::string>;
};

/// A value of A or the distinguished 0 (nullopt): 0 ⊗ a = a ⊗ 0 = 0,
/// 0 ⊕ a = a ⊕ 0 = a, 0⊛ = 1.
template <class A>
using Fact = std::optional<typename A::Value>;

namespace lifted {

template <class A>
Fact<A> zero(const A&) { return std::nullopt; }

template <class A>
Fact<A> one(const A& alg) { return alg.one(); }

template <class A>
Fact<A> seq(const A& alg, const Fact<A>& x, const Fact<A>& y) {
  if (!x || !y) return std::nullopt;
  return alg.seq(*x, *y);
}

template <class A>
Fact<A> choice(const A& alg, const Fact<A>& x, const Fact<A>& y) {
  if (!x) return y;
  if (!y) return x;
  return alg.choice(*x, *y);
}

template <class A>
Fact<A> star(const A& alg, const Fact<A>& x) {
  if (!x) return alg.one();
  return alg.star(*x);
}

template <class A>
bool equal(const A& alg, const Fact<A>& x, const Fact<A>& y) {
  if (!x || !y) return !x && !y;
  return alg.equal(*x, *y);
}

/// Natural order: x ≤ y iff x ⊕ y = y.
template <class A>
bool leq(const A& alg, const Fact<A>& x, const Fact<A>& y) {
  return equal(alg, choice(alg, x, y), y);
}

template <class A>
std::string render(const A& alg, const Fact<A>& x) {
  return x ? alg.render(*x) : std::string("0");
}

} // namespace lifted

struct LawResult {
  std::string law;
  bool holds = true;
  std::size_t checked = 0; // instances evaluated (implications: antecedent held)
  std::optional<std::string> counterexample;
};

struct LawReport {
  std::vector<LawResult> laws;

  bool all_hold() const {
    for (const auto& l : laws)
      if (!l.holds) return false;
    return true;
  }
  const LawResult* find(std::string_view name) const {
    for (const auto& l : laws)
      if (l.law == name) return &l;
    return nullptr;
  }
  std::string to_text() const {
    std::string out;
    for (const auto& l : laws) {
      out += l.law + ": " + (l.holds ? "holds" : "FAILS") + " (" + std::to_string(l.checked) + " checked)";
      if (l.counterexample) out += " counterexample: " + *l.counterexample;
      out += "\n";
    }
    return out;
  }
};

/// Where law operands come from: random triples from the pool, or every
/// triple when `exhaustive` is set (small universes only).
struct LawSampling {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  bool exhaustive = false;
};

namespace detail {

template <class A>
class LawRun {
public:
  using F = Fact<A>;

  LawRun(const A& alg, const std::vector<F>& pool, LawSampling s)
      : alg_(alg), pool_(pool), s_(s), rng_(s.seed) {}

  template <class Body>
  LawResult run(std::string name, Body body) {
    LawResult r;
    r.law = std::move(name);
    rng_.seed(s_.seed);
    auto visit = [&](const F& a, const F& b, const F& c) {
      if (!r.holds) return;
      std::optional<std::string> bad = body(a, b, c, r.checked);
      if (bad) {
        r.holds = false;
        r.counterexample = "a=" + show(a) + " b=" + show(b) + " c=" + show(c) + " (" + *bad + ")";
      }
    };
    if (s_.exhaustive) {
      for (const auto& a : pool_)
        for (const auto& b : pool_)
          for (const auto& c : pool_) visit(a, b, c);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
      for (std::size_t t = 0; t < s_.trials; ++t) {
        const F& a = pool_[pick(rng_)];
        const F& b = pool_[pick(rng_)];
        const F& c = pool_[pick(rng_)];
        visit(a, b, c);
      }
    }
    return r;
  }

  F seq(const F& x, const F& y) const { return lifted::seq(alg_, x, y); }
  F alt(const F& x, const F& y) const { return lifted::choice(alg_, x, y); }
  F star(const F& x) const { return lifted::star(alg_, x); }
  F one() const { return lifted::one(alg_); }
  F zero() const { return std::nullopt; }
  bool eq(const F& x, const F& y) const { return lifted::equal(alg_, x, y); }
  bool leq(const F& x, const F& y) const { return lifted::leq(alg_, x, y); }
  std::string show(const F& x) const { return lifted::render(alg_, x); }

  std::optional<std::string> expect(const char* what, const F& lhs, const F& rhs) const {
    if (eq(lhs, rhs)) return std::nullopt;
    return std::string(what) + ": " + show(lhs) + " vs " + show(rhs);
  }

private:
  const A& alg_;
  const std::vector<F>& pool_;
  LawSampling s_;
  std::mt19937_64 rng_;
};

} // namespace detail

template <SemanticAlgebra A>
LawReport check_kleene_laws(const A& alg, const std::vector<Fact<A>>& pool, LawSampling s = {}) {
  using F = Fact<A>;
  detail::LawRun<A> L(alg, pool, s);
  LawReport rep;
  using Opt = std::optional<std::string>;
  rep.laws.push_back(L.run("associativity", [&](const F& a, const F& b, const F& c, std::size_t& n) -> Opt {
    ++n;
    if (auto e = L.expect("⊕", L.alt(a, L.alt(b, c)), L.alt(L.alt(a, b), c))) return e;
    return L.expect("⊗", L.seq(a, L.seq(b, c)), L.seq(L.seq(a, b), c));
  }));
  rep.laws.push_back(L.run("distributivity", [&](const F& a, const F& b, const F& c, std::size_t& n) -> Opt {
    ++n;
    if (auto e = L.expect("left", L.seq(a, L.alt(b, c)), L.alt(L.seq(a, b), L.seq(a, c)))) return e;
    return L.expect("right", L.seq(L.alt(b, c), a), L.alt(L.seq(b, a), L.seq(c, a)));
  }));
  rep.laws.push_back(L.run("identity", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    if (auto e = L.expect("a⊕0", L.alt(a, L.zero()), a)) return e;
    if (auto e = L.expect("1⊗a", L.seq(L.one(), a), a)) return e;
    return L.expect("a⊗1", L.seq(a, L.one()), a);
  }));
  rep.laws.push_back(L.run("commutativity", [&](const F& a, const F& b, const F&, std::size_t& n) -> Opt {
    ++n;
    return L.expect("a⊕b", L.alt(a, b), L.alt(b, a));
  }));
  rep.laws.push_back(L.run("idempotence", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    return L.expect("a⊕a", L.alt(a, a), a);
  }));
  rep.laws.push_back(L.run("annihilation", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    if (auto e = L.expect("a⊗0", L.seq(a, L.zero()), L.zero())) return e;
    return L.expect("0⊗a", L.seq(L.zero(), a), L.zero());
  }));
  rep.laws.push_back(L.run("unfolding", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    F s = L.star(a);
    if (auto e = L.expect("1⊕a⊗a⊛", L.alt(L.one(), L.seq(a, s)), s)) return e;
    return L.expect("1⊕a⊛⊗a", L.alt(L.one(), L.seq(s, a)), s);
  }));
  rep.laws.push_back(L.run("induction", [&](const F& a, const F& b, const F& c, std::size_t& n) -> Opt {
    F s = L.star(a);
    // Besides the sampled b, try solutions of the antecedent built from b and c.
    for (const F& x : {b, L.seq(s, L.alt(b, c))}) {
      if (L.leq(L.seq(a, x), x)) {
        ++n;
        if (!L.leq(L.seq(s, x), x)) return "a⊗b≤b but not a⊛⊗b≤b with b=" + L.show(x);
      }
    }
    for (const F& x : {b, L.seq(L.alt(b, c), s)}) {
      if (L.leq(L.seq(x, a), x)) {
        ++n;
        if (!L.leq(L.seq(x, s), x)) return "b⊗a≤b but not b⊗a⊛≤b with b=" + L.show(x);
      }
    }
    return std::nullopt;
  }));
  return rep;
}

template <SemanticAlgebra A>
LawReport check_star_free(const A& alg, const std::vector<Fact<A>>& pool, LawSampling s = {}) {
  using F = Fact<A>;
  using Opt = std::optional<std::string>;
  detail::LawRun<A> L(alg, pool, s);
  LawReport rep;
  rep.laws.push_back(L.run("star-free", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    return L.expect("a⊛ vs 1⊕a⊗a", L.star(a), L.alt(L.one(), L.seq(a, a)));
  }));
  rep.laws.push_back(L.run("star-free-unfolding", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    F aa = L.seq(a, a);
    return L.expect("1⊕a⊗a vs 1⊕a⊕a⊗a⊗a", L.alt(L.one(), aa), L.alt(L.alt(L.one(), a), L.seq(aa, a)));
  }));
  rep.laws.push_back(L.run("star-free-induction", [&](const F& a, const F& b, const F& c, std::size_t& n) -> Opt {
    F s = L.star(a);
    for (const F& x : {b, L.seq(s, L.alt(b, c))}) {
      if (L.leq(L.seq(a, x), x)) {
        ++n;
        if (!L.leq(L.alt(x, L.seq(a, L.seq(a, x))), x)) return "left form fails with b=" + L.show(x);
      }
    }
    for (const F& x : {b, L.seq(L.alt(b, c), s)}) {
      if (L.leq(L.seq(x, a), x)) {
        ++n;
        if (!L.leq(L.alt(x, L.seq(L.seq(x, a), a)), x)) return "right form fails with b=" + L.show(x);
      }
    }
    return std::nullopt;
  }));
  return rep;
}

template <SemanticAlgebra A>
LawReport check_pre_kleene(const A& alg, const std::vector<Fact<A>>& pool, LawSampling s = {}) {
  using F = Fact<A>;
  using Opt = std::optional<std::string>;
  detail::LawRun<A> L(alg, pool, s);
  LawReport rep;
  rep.laws.push_back(L.run("reflexivity", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    if (L.leq(L.one(), L.star(a))) return std::nullopt;
    return "1 ≰ a⊛";
  }));
  rep.laws.push_back(L.run("extensivity", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    if (L.leq(a, L.star(a))) return std::nullopt;
    return "a ≰ a⊛";
  }));
  rep.laws.push_back(L.run("transitivity", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    F s = L.star(a);
    return L.expect("a⊛⊗a⊛", L.seq(s, s), s);
  }));
  rep.laws.push_back(L.run("monotonicity", [&](const F& a, const F& b, const F&, std::size_t& n) -> Opt {
    for (const F& x : {b, L.alt(a, b)}) {
      if (!L.leq(a, x)) continue;
      ++n;
      if (!L.leq(L.star(a), L.star(x))) return "a≤b but a⊛ ≰ b⊛ with b=" + L.show(x);
    }
    return std::nullopt;
  }));
  rep.laws.push_back(L.run("unrolling", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    F power = a;
    for (int k = 1; k <= 3; ++k) {
      ++n;
      if (!L.leq(L.star(power), L.star(a))) return "(a^" + std::to_string(k) + ")⊛ ≰ a⊛";
      power = L.seq(power, a);
    }
    return std::nullopt;
  }));
  return rep;
}

/// Order axioms of ≤ (reflexive, antisymmetric, transitive) and a ≤ a⊕b.
template <SemanticAlgebra A>
LawReport check_order(const A& alg, const std::vector<Fact<A>>& pool, LawSampling s = {}) {
  using F = Fact<A>;
  using Opt = std::optional<std::string>;
  detail::LawRun<A> L(alg, pool, s);
  LawReport rep;
  rep.laws.push_back(L.run("order-reflexive", [&](const F& a, const F&, const F&, std::size_t& n) -> Opt {
    ++n;
    return L.leq(a, a) ? Opt{} : Opt{"a ≰ a"};
  }));
  rep.laws.push_back(L.run("order-antisymmetric", [&](const F& a, const F& b, const F&, std::size_t& n) -> Opt {
    if (!(L.leq(a, b) && L.leq(b, a))) return std::nullopt;
    ++n;
    return L.eq(a, b) ? Opt{} : Opt{"a≤b and b≤a but a≠b"};
  }));
  rep.laws.push_back(L.run("order-transitive", [&](const F& a, const F& b, const F& c, std::size_t& n) -> Opt {
    F bb = L.alt(a, b), cc = L.alt(bb, c);
    if (!(L.leq(a, bb) && L.leq(bb, cc))) return std::nullopt;
    ++n;
    return L.leq(a, cc) ? Opt{} : Opt{"a≤b≤c but a ≰ c"};
  }));
  rep.laws.push_back(L.run("join-monotone", [&](const F& a, const F& b, const F&, std::size_t& n) -> Opt {
    ++n;
    return L.leq(a, L.alt(a, b)) ? Opt{} : Opt{"a ≰ a⊕b"};
  }));
  return rep;
}

/// Grows a sample pool by random ⊗/⊕/⊛ compositions of the seed facts, and
/// adds 0 and 1.
template <SemanticAlgebra A>
std::vector<Fact<A>> compose_pool(const A& alg, std::vector<Fact<A>> seeds, std::size_t extra,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Fact<A>> pool = std::move(seeds);
  pool.push_back(lifted::one(alg));
  pool.push_back(lifted::zero(alg));
  for (std::size_t k = 0; k < extra; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const auto x = pool[pick(rng)];
    const auto y = pool[pick(rng)];
    switch (rng() % 4) {
    case 0: pool.push_back(lifted::seq(alg, x, y)); break;
    case 1: pool.push_back(lifted::choice(alg, x, y)); break;
    case 2: pool.push_back(lifted::star(alg, x)); break;
    default: pool.push_back(lifted::seq(alg, x, lifted::star(alg, y))); break;
    }
  }
  return pool;
}

} // namespace apa
