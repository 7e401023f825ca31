#pragma once

#include "apa/cfg.hpp"
#include "apa/lang.hpp"

#include <cstdint>
#include <vector>

namespace apa {

/// Relative weights of the generated operation kinds.
struct ChangeMix {
  unsigned del = 1;
  unsigned update = 2;
  unsigned add = 2;
  unsigned loop = 0;   // self-loop around an edge
  unsigned branch = 0; // parallel alternative beside an edge
};

struct ChangePlan {
  std::uint64_t seed = 0;
  double pct = 0;
  std::vector<ChangeOp> ops;
  std::size_t affected = 0; // distinct edges touched
  std::size_t total = 0;    // live edges before the plan
};

/// Random changes until the touched edges reach pct% of the live edges. Every
/// op is validated against the evolving graph, so the plan replays cleanly.
/// Throws Error when the target cannot be reached.
ChangePlan generate_changes(const Cfg& g, double pct, std::uint64_t seed, ChangeMix mix = {});

/// A fixed number of random ops (no percentage target).
ChangePlan generate_ops(const Cfg& g, std::size_t count, std::uint64_t seed, ChangeMix mix = {});

struct SynthOptions {
  std::size_t edges = 250;  // approximate edge count of the lowered program
  std::size_t vars = 0;     // 0: one variable per five edges, at least 3
  int max_depth = 3;        // if/while nesting
  std::size_t secrets = 1;
};

/// Random well-formed program, fully determined by the seed.
lang::Program synth_program(std::uint64_t seed, const SynthOptions& opt = {});
Cfg synth_cfg(std::uint64_t seed, const SynthOptions& opt = {});

} // namespace apa
