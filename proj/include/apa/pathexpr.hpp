#pragma once

#include "apa/idset.hpp"

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace apa {

class Cfg;

struct PathExpr;
using Expr = std::shared_ptr<const PathExpr>;

/// Regular expression over edge ids. Build through the make_* functions,
/// which keep the normal form: Concat and Union are flat with at least two
/// operands, and no Empty operand survives inside Concat or Union.
struct PathExpr {
  enum class Kind { Empty, Eps, Atom, Concat, Union, Star };
  Kind kind = Kind::Eps;
  EdgeId edge = kNoEdge;
  std::vector<Expr> kids;
  std::size_t atoms = 0; // number of Atom leaves
  EdgeId key = kNoEdge;  // smallest edge id inside
};

Expr make_empty();
Expr make_eps();
Expr make_atom(EdgeId e);
Expr make_concat(std::vector<Expr> parts);
Expr make_union(std::vector<Expr> arms);
Expr make_star(Expr inner);

inline std::size_t expr_size(const PathExpr& e) { return e.atoms; }

using EdgeNamer = std::function<std::string(EdgeId)>;

/// Juxtaposition for concatenation, `+` for union, postfix `*`; parentheses
/// only where precedence (star > concat > union) requires them.
std::string pretty(const PathExpr& e, const EdgeNamer& name);
std::string pretty(const PathExpr& e, const Cfg& g);

/// Inverse of pretty: edge names are matched longest-first against g's edges
/// (so `e1e12` splits as e1, e12); `ε` and `∅` are accepted. Throws ParseError.
Expr parse_path_expression(std::string_view text, const Cfg& g);

/// Structural equality.
bool same(const PathExpr& a, const PathExpr& b);

/// Exact membership of an edge word in the language of `e`.
bool matches(const PathExpr& e, const std::vector<EdgeId>& word);

/// Words of `e` with every star unrolled at most `unroll` times, keeping only
/// words of length ≤ max_len.
std::set<std::vector<EdgeId>> bounded_language(const PathExpr& e, int unroll, std::size_t max_len);

struct ReductionTrace {
  std::vector<int> consumed;       // per edge slot: times consumed by a rule
  std::size_t parallel_merges = 0;
  std::size_t loop_folds = 0;
  std::size_t series_merges = 0;
};

struct ReduceOptions {
  bool descending = false;        // visit nodes largest id first
  ReductionTrace* trace = nullptr;
};

/// ρ(entry, t) by series, parallel and self-loop reduction. Only nodes on
/// some entry→t path take part. Throws IrreducibleError with the residual
/// edges when no rule applies, and Error when t is unreachable.
Expr compute_path_expression(const Cfg& g, NodeId t, const ReduceOptions& opt = {});
/// ρ(entry, exit).
Expr compute_path_expression(const Cfg& g, const ReduceOptions& opt = {});

} // namespace apa
