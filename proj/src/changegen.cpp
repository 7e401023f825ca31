#include "apa/changegen.hpp"

#include "apa/error.hpp"

#include <cmath>
#include <random>
#include <set>

namespace apa {

namespace {

class Gen {
public:
  Gen(const Cfg& g, std::uint64_t seed, ChangeMix mix) : g_(g), rng_(seed), mix_(mix) {}

  ChangePlan run(std::size_t target_affected, std::size_t max_ops) {
    ChangePlan plan;
    plan.total = g_.live_edge_count();
    std::set<std::string> touched;
    std::size_t attempts = 0;
    const std::size_t budget = 50 * std::min(target_affected, max_ops) + 100;
    while (touched.size() < target_affected && plan.ops.size() < max_ops) {
      if (++attempts > budget || g_.live_edge_count() == 0)
        throw Error("change target unreachable: " + std::to_string(touched.size()) + " of " +
                    std::to_string(target_affected) + " edges touched");
      auto live = g_.live_edges();
      EdgeId e = live[pick(live.size())];
      ChangeOp op = make_op(e);
      try {
        g_.apply(op);
      } catch (const ChangeError&) {
        continue;
      }
      if (op.kind == ChangeOp::Kind::Delete || op.kind == ChangeOp::Kind::Update) touched.insert(op.anchor);
      else touched.insert(op.id);
      plan.ops.push_back(std::move(op));
    }
    plan.affected = touched.size();
    return plan;
  }

private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

  std::string fresh_edge() {
    std::string name;
    do name = "g" + std::to_string(++edge_counter_);
    while (g_.edge_name_taken(name));
    return name;
  }

  // Existing variable with probability 0.8, otherwise a fresh one.
  std::string var() {
    if (g_.var_count() > 0 && coin(0.8)) return g_.var_name(static_cast<VarId>(pick(g_.var_count())));
    std::string name;
    do name = "t" + std::to_string(++var_counter_);
    while (g_.find_var(name));
    return name;
  }

  std::string term() { return coin(0.3) ? std::to_string(pick(10)) : var(); }

  std::string assignment() {
    static const char* ops[] = {" + ", " - ", " * "};
    return var() + " := " + term() + ops[pick(3)] + term();
  }

  std::string condition() {
    static const char* ops[] = {" < ", " <= ", " == ", " != ", " > "};
    return var() + ops[pick(5)] + term();
  }

  ChangeOp make_op(EdgeId e) {
    const CfgEdge& ed = g_.edge(e);
    unsigned total = mix_.del + mix_.update + mix_.add + mix_.loop + mix_.branch;
    unsigned r = static_cast<unsigned>(pick(total));
    ChangeOp op;
    op.anchor = ed.name;
    if (r < mix_.del) {
      op.kind = ChangeOp::Kind::Delete;
    } else if ((r -= mix_.del) < mix_.update) {
      op.kind = ChangeOp::Kind::Update;
      op.stmt_text = ed.cond ? condition() : assignment();
    } else if ((r -= mix_.update) < mix_.add) {
      op.kind = ChangeOp::Kind::Add;
      op.id = fresh_edge();
      op.stmt_text = assignment();
    } else if ((r -= mix_.add) < mix_.loop) {
      op.kind = ChangeOp::Kind::AddLoop;
      op.id = fresh_edge();
      op.stmt_text = assignment();
    } else {
      op.kind = ChangeOp::Kind::AddBranch;
      op.id = fresh_edge();
      op.stmt_text = assignment();
    }
    return op;
  }

  Cfg g_;
  std::mt19937_64 rng_;
  ChangeMix mix_;
  unsigned edge_counter_ = 0;
  unsigned var_counter_ = 0;
};

} // namespace

ChangePlan generate_changes(const Cfg& g, double pct, std::uint64_t seed, ChangeMix mix) {
  if (!(pct >= 0 && pct <= 100)) throw Error("pct must lie in [0, 100]");
  auto target = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(g.live_edge_count()) - 1e-9));
  ChangePlan plan = target == 0 ? ChangePlan{} : Gen(g, seed, mix).run(target, static_cast<std::size_t>(-1));
  plan.seed = seed;
  plan.pct = pct;
  plan.total = g.live_edge_count();
  return plan;
}

ChangePlan generate_ops(const Cfg& g, std::size_t count, std::uint64_t seed, ChangeMix mix) {
  ChangePlan plan = count == 0 ? ChangePlan{} : Gen(g, seed, mix).run(static_cast<std::size_t>(-1), count);
  plan.seed = seed;
  plan.total = g.live_edge_count();
  if (plan.total) plan.pct = 100.0 * static_cast<double>(plan.affected) / static_cast<double>(plan.total);
  return plan;
}

// ---- synthetic programs ---------------------------------------------------

namespace {

class Synth {
public:
  Synth(std::uint64_t seed, const SynthOptions& opt) : rng_(seed), opt_(opt) {
    std::size_t n = opt.vars ? opt.vars : std::max<std::size_t>(3, opt.edges / 5);
    for (std::size_t k = 0; k < n; ++k) vars_.push_back("v" + std::to_string(k));
    for (std::size_t k = 0; k < opt.secrets; ++k) secrets_.push_back("s" + std::to_string(k));
  }

  std::string source() {
    std::string out = "fn synth(";
    for (std::size_t k = 0; k < secrets_.size(); ++k) out += (k ? ", secret " : "secret ") + secrets_[k];
    out += ") {\n  int ";
    for (std::size_t k = 0; k < vars_.size(); ++k) out += (k ? ", " : "") + vars_[k];
    out += ";\n";
    std::size_t budget = opt_.edges > 1 ? opt_.edges - 1 : 1;
    block(budget, 0, 1, out);
    return out + "}\n";
  }

private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

  const std::string& var() { return vars_[pick(vars_.size())]; }
  std::string operand() {
    if (!secrets_.empty() && coin(0.05)) return secrets_[pick(secrets_.size())];
    return coin(0.3) ? std::to_string(pick(10)) : var();
  }
  std::string cond() {
    static const char* ops[] = {" < ", " <= ", " == ", " != ", " > "};
    std::string lhs = !secrets_.empty() && coin(0.15) ? secrets_[pick(secrets_.size())] : var();
    return lhs + ops[pick(5)] + operand();
  }

  // Emits statements costing about `budget` edges.
  void block(std::size_t budget, int depth, int indent, std::string& out) {
    std::string pad(static_cast<std::size_t>(2 * indent), ' ');
    while (budget > 0) {
      double r = std::uniform_real_distribution<double>(0, 1)(rng_);
      if (depth < opt_.max_depth && budget >= 5 && r < 0.12) {
        std::size_t inner = 1 + pick(std::min<std::size_t>(budget - 3, 24));
        bool with_else = coin(0.7) && inner >= 2;
        std::size_t then_cost = with_else ? 1 + pick(inner - 1) : inner;
        out += pad + "if " + cond() + " then {\n";
        block(then_cost, depth + 1, indent + 1, out);
        out += pad + "}";
        if (with_else) {
          out += " else {\n";
          block(inner - then_cost, depth + 1, indent + 1, out);
          out += pad + "}";
        }
        out += "\n";
        budget -= std::min(budget, inner + 2);
      } else if (depth < opt_.max_depth && budget >= 4 && r < 0.2) {
        std::size_t inner = 1 + pick(std::min<std::size_t>(budget - 2, 16));
        out += pad + "while " + cond() + " do {\n";
        block(inner, depth + 1, indent + 1, out);
        out += pad + "}\n";
        budget -= std::min(budget, inner + 2);
      } else if (r < 0.23) {
        out += pad + "print(" + var() + ");\n";
        --budget;
      } else {
        static const char* ops[] = {" + ", " - ", " * "};
        out += pad + var() + " := " + operand() + ops[pick(3)] + operand() + ";\n";
        --budget;
      }
    }
  }

  std::mt19937_64 rng_;
  SynthOptions opt_;
  std::vector<std::string> vars_;
  std::vector<std::string> secrets_;
};

} // namespace

lang::Program synth_program(std::uint64_t seed, const SynthOptions& opt) {
  return lang::parse_program(Synth(seed, opt).source());
}

Cfg synth_cfg(std::uint64_t seed, const SynthOptions& opt) {
  return lang::lower_to_cfg(synth_program(seed, opt));
}

} // namespace apa
