#include "apa/lawpool.hpp"

namespace apa {

namespace {

template <class A>
LawSuite suite(LawSampling s) {
  A alg;
  std::vector<Fact<A>> pool;
  if (s.exhaustive) {
    IdSet ids{0, 1, 2};
    if constexpr (std::is_same_v<A, ConstTimeAlgebra>) alg.taint = IdSet{0};
    pool = enumerate_universe(alg, ids);
  } else {
    std::tie(alg, pool) = law_pool<A>(s.seed);
  }
  return {check_kleene_laws(alg, pool, s), check_star_free(alg, pool, s), check_pre_kleene(alg, pool, s),
          check_order(alg, pool, s)};
}

} // namespace

LawSuite run_law_suite(Analysis a, LawSampling s) {
  switch (a) {
  case Analysis::Uninit: return suite<UninitAlgebra>(s);
  case Analysis::ReachDef: return suite<ReachDefAlgebra>(s);
  case Analysis::ConstTime: return suite<ConstTimeAlgebra>(s);
  }
  return {};
}

bool claimed_laws_fail(Analysis a, const LawSuite& suite) {
  if (!suite.kleene.all_hold()) return true;
  if (a == Analysis::ReachDef && !suite.star_free.all_hold()) return true;
  return false;
}

} // namespace apa
