#pragma once

#include "apa/algebra.hpp"
#include "apa/analyses.hpp"
#include "apa/changegen.hpp"

#include <utility>

namespace apa {

/// An algebra instance and a sample pool: edge facts of a small random
/// program (few variables, so sets overlap), grown by random compositions.
template <class A>
std::pair<A, std::vector<Fact<A>>> law_pool(std::uint64_t seed, std::size_t extra = 300) {
  SynthOptions so;
  so.edges = 40;
  so.vars = 4;
  so.max_depth = 2;
  so.secrets = 1;
  Cfg g = synth_cfg(seed, so);
  A alg = make_algebra<A>(g);
  return {alg, compose_pool(alg, edge_facts(alg, g), extra, seed ^ 0x9e3779b97f4a7c15ULL)};
}

struct LawSuite {
  LawReport kleene;
  LawReport star_free;
  LawReport pre_kleene;
  LawReport order;
};

/// All law groups for one analysis. With `exhaustive` the operands range over
/// every value of a three-element universe instead of sampled facts.
LawSuite run_law_suite(Analysis a, LawSampling s);

/// Laws the analysis is expected to satisfy failed: any Kleene group, or the
/// star-free group for reaching definitions.
bool claimed_laws_fail(Analysis a, const LawSuite& suite);

} // namespace apa
