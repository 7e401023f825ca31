#pragma once

#include "apa/algebra.hpp"
#include "apa/cfg.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace apa {

enum class Analysis { Uninit, ReachDef, ConstTime };

Analysis parse_analysis(std::string_view name); // throws Error
std::string_view analysis_name(Analysis a);

/// Possibly-uninitialized variables: DI is definitely initialized, PU is used
/// while possibly uninitialized.
struct UninitAlgebra {
  struct Value {
    IdSet di, pu;
    friend bool operator==(const Value&, const Value&) = default;
  };

  Value one() const { return {}; }
  Value seq(const Value& l, const Value& r) const { return {l.di | r.di, l.pu | (r.pu - l.di)}; }
  Value choice(const Value& l, const Value& r) const { return {l.di & r.di, l.pu | r.pu}; }
  Value star(const Value& x) const { return {{}, x.pu}; }
  Value edge_fact(const Cfg& g, EdgeId e) const;
  bool equal(const Value& a, const Value& b) const { return a == b; }
  std::string render(const Value& v, const Cfg* g = nullptr) const;
  nlohmann::json to_json(const Value& v, const Cfg& g) const;
  Value from_json(const nlohmann::json& j, Cfg& g) const;
};

/// Reaching definitions as generated/killed definition sets. A definition is
/// identified by its edge, which fixes the assigned variable.
struct ReachDefAlgebra {
  struct Value {
    IdSet gen, kill;
    friend bool operator==(const Value&, const Value&) = default;
  };

  Value one() const { return {}; }
  Value seq(const Value& l, const Value& r) const {
    return {(l.gen - r.kill) | r.gen, (l.kill - r.gen) | r.kill};
  }
  Value choice(const Value& l, const Value& r) const { return {l.gen | r.gen, l.kill & r.kill}; }
  Value star(const Value& x) const { return {x.gen, {}}; }
  Value edge_fact(const Cfg& g, EdgeId e) const;
  bool equal(const Value& a, const Value& b) const { return a == b; }
  std::string render(const Value& v, const Cfg* g = nullptr) const;
  nlohmann::json to_json(const Value& v, const Cfg& g) const;
  Value from_json(const nlohmann::json& j, Cfg& g) const;
};

inline constexpr std::uint64_t kInfinity = std::numeric_limits<std::uint64_t>::max();

/// Execution-time interval plus the variables controlling the paths taken.
/// ⊕ and ⊛ consult the taint set; with untainted control ⊕ keeps its left
/// operand's interval, so the operation is neither commutative nor idempotent.
struct ConstTimeAlgebra {
  struct Value {
    std::uint64_t lb = 0, ub = 0; // ub may be kInfinity; lb ≤ ub
    IdSet ctrl;
    friend bool operator==(const Value&, const Value&) = default;
  };

  IdSet taint;

  Value one() const { return {}; }
  Value seq(const Value& l, const Value& r) const {
    return {add(l.lb, r.lb), add(l.ub, r.ub), l.ctrl | r.ctrl};
  }
  Value choice(const Value& l, const Value& r) const {
    IdSet c = l.ctrl | r.ctrl;
    if (c.intersects(taint)) return {std::min(l.lb, r.lb), std::max(l.ub, r.ub), std::move(c)};
    return {l.lb, l.ub, {}};
  }
  Value star(const Value& x) const {
    if (x.ctrl.intersects(taint)) return {0, kInfinity, {}};
    return {};
  }
  Value edge_fact(const Cfg& g, EdgeId e) const;
  bool equal(const Value& a, const Value& b) const { return a == b; }
  std::string render(const Value& v, const Cfg* g = nullptr) const;
  nlohmann::json to_json(const Value& v, const Cfg& g) const;
  Value from_json(const nlohmann::json& j, Cfg& g) const;

  static std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    return (a == kInfinity || b == kInfinity || a > kInfinity - 1 - b) ? kInfinity : a + b;
  }
};

static_assert(SemanticAlgebra<UninitAlgebra>);
static_assert(SemanticAlgebra<ReachDefAlgebra>);
static_assert(SemanticAlgebra<ConstTimeAlgebra>);

/// Secret-tainted variables: least fixpoint of data dependence (an assignment
/// with a tainted operand taints its target) and control dependence (every
/// assignment inside the control region of a tainted condition taints its
/// target). `reverse_order` only changes the edge visiting order.
IdSet compute_taint(const Cfg& g, bool reverse_order = false);

enum class Verdict { ConstantTime, Leaky };
/// Leaky iff LB ≠ UB; ∞ differs from every natural.
Verdict leak_verdict(const ConstTimeAlgebra::Value& f);
std::string_view verdict_name(Verdict v);

/// Algebra for analysis A over graph g (consttime computes the taint).
template <class A>
A make_algebra(const Cfg& g);

template <>
inline UninitAlgebra make_algebra<UninitAlgebra>(const Cfg&) { return {}; }
template <>
inline ReachDefAlgebra make_algebra<ReachDefAlgebra>(const Cfg&) { return {}; }
template <>
inline ConstTimeAlgebra make_algebra<ConstTimeAlgebra>(const Cfg& g) { return {compute_taint(g)}; }

/// Edge facts of every live edge of g, in edge order; seeds for law sampling.
template <class A>
std::vector<Fact<A>> edge_facts(const A& alg, const Cfg& g) {
  std::vector<Fact<A>> out;
  for (EdgeId e : g.live_edges()) out.push_back(alg.edge_fact(g, e));
  return out;
}

/// Every value over a tiny universe, for exhaustive law checks. Uninit and
/// reachdef range over `ids` subsets; consttime over intervals with bounds in
/// {0,1,2,∞} and control sets over `ids`.
std::vector<Fact<UninitAlgebra>> enumerate_universe(const UninitAlgebra&, const IdSet& ids);
std::vector<Fact<ReachDefAlgebra>> enumerate_universe(const ReachDefAlgebra&, const IdSet& ids);
std::vector<Fact<ConstTimeAlgebra>> enumerate_universe(const ConstTimeAlgebra&, const IdSet& ids);

} // namespace apa
