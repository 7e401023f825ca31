// apa: command-line front end for the incremental analysis engine.

#include "apa/changegen.hpp"
#include "apa/engine.hpp"
#include "apa/error.hpp"
#include "apa/lang.hpp"
#include "apa/lawpool.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace apa;

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kMismatch = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// `.cfg` files hold the text graph format; anything else is program source.
Cfg load_program(const std::string& path) {
  std::string text = read_file(path);
  if (ends_with(path, ".cfg")) return parse_cfg_text(text);
  return lang::lower_to_cfg(lang::parse_program(text));
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

struct Common {
  std::string analysis = "uninit";
  double alpha = 0.25;
  bool no_early_stop = false;

  EngineOptions options() const {
    EngineOptions o;
    o.tree.alpha = alpha;
    o.early_stop = !no_early_stop;
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--analysis", c.analysis, "uninit, reachdef or consttime")
      ->check(CLI::IsMember({"uninit", "reachdef", "consttime"}));
  cmd->add_option("--alpha", c.alpha, "tree balance factor in (0, 0.5]")->check(CLI::Range(1e-9, 0.5));
  cmd->add_flag("--no-early-stop", c.no_early_stop, "recompute every modified ancestor");
}

struct BenchArgs {
  std::string program;
  std::size_t synth_edges = 0;
  std::vector<double> pcts{2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out;
};

// One bench record per (pct, seed); returns false on an oracle mismatch.
bool bench(const Common& c, const BenchArgs& b, std::uint64_t program_seed, std::ostream& out) {
  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
  Cfg g;
  std::string program_id;
  if (!b.program.empty()) {
    g = load_program(b.program);
    program_id = b.program;
  } else {
    SynthOptions so;
    so.edges = b.synth_edges;
    g = synth_cfg(program_seed, so);
    program_id = "synth-" + std::to_string(b.synth_edges) + "-" + std::to_string(program_seed);
  }
  Analysis a = parse_analysis(c.analysis);
  bool ok = true;
  for (double pct : b.pcts) {
    for (std::uint64_t seed : b.seeds) {
      ChangePlan plan = generate_changes(g, pct, seed);
      auto session = AnySession::create(a, g, c.options());
      auto t0 = Clock::now();
      Counters inc = session->apply(plan.ops);
      auto t1 = Clock::now();
      auto base = AnySession::create(a, session->cfg(), c.options());
      auto t2 = Clock::now();
      bool equal = session->root_text() == base->root_text();
      nlohmann::json rec = {
          {"program-id", program_id},
          {"analysis", c.analysis},
          {"pct", pct},
          {"trial-seed", seed},
          {"ops", plan.ops.size()},
          {"affected", plan.affected},
          {"baseline-tree-ops", base->last_counters().nodes_created},
          {"incremental-tree-ops", inc.nodes_created + inc.rebuild_nodes},
          {"baseline-fact-ops", base->last_counters().facts_recomputed},
          {"incremental-fact-ops", inc.facts_recomputed},
          {"incremental-ms", ms(t1 - t0)},
          {"baseline-ms", ms(t2 - t1)},
          {"equal", equal},
      };
      out << rec.dump() << "\n";
      if (!equal) {
        std::cerr << "oracle mismatch at pct " << pct << " seed " << seed << ": incremental "
                  << session->root_text() << " vs baseline " << base->root_text() << "\n";
        ok = false;
      }
    }
  }
  return ok;
}

int run(int argc, char** argv) {
  CLI::App app{"Incremental algebraic program analysis"};
  app.require_subcommand(1);

  Common common;
  std::string program, session_dir, script, out;
  bool dump_expr = false, dump_tree = false, check = false, exhaustive = false;
  std::uint64_t seed = 1;
  std::size_t trials = 1000, edges = 250;
  double pct = 4;

  auto* analyze = app.add_subcommand("analyze", "analyze a program from scratch");
  analyze->add_option("program", program, ".imp source or .cfg graph")->required();
  add_common(analyze, common);
  analyze->add_flag("--dump-expr", dump_expr, "print the path expression");
  analyze->add_flag("--dump-tree", dump_tree, "print the APA-Tree");
  analyze->add_option("--session", session_dir, "persist the session into this directory");

  auto* update = app.add_subcommand("update", "apply a change script to a saved session");
  update->add_option("session", session_dir, "session directory")->required();
  update->add_option("script", script, "change script")->required();
  update->add_flag("--check", check, "compare with a from-scratch analysis");
  update->add_flag("--dump-tree", dump_tree, "print the APA-Tree");

  BenchArgs bargs;
  auto* benchc = app.add_subcommand("bench", "incremental vs from-scratch counters");
  benchc->add_option("program", bargs.program, ".imp source or .cfg graph");
  benchc->add_option("--synth", bargs.synth_edges, "use a synthetic program of about N edges");
  benchc->add_option("--pcts", bargs.pcts, "change percentages")->delimiter(',');
  benchc->add_option("--seeds", bargs.seeds, "trial seeds")->delimiter(',');
  benchc->add_option("--seed", seed, "synthetic program seed");
  benchc->add_option("--out", bargs.out, "output file (JSON lines)");
  add_common(benchc, common);

  auto* laws = app.add_subcommand("check-laws", "property-test the algebra laws");
  add_common(laws, common);
  laws->add_option("--trials", trials, "samples per law");
  laws->add_option("--seed", seed, "sampling seed");
  laws->add_flag("--exhaustive", exhaustive, "enumerate a three-element universe instead");

  auto* gen = app.add_subcommand("gen-changes", "random change script");
  gen->add_option("program", program, ".imp source or .cfg graph")->required();
  gen->add_option("--pct", pct, "percentage of edges to touch")->check(CLI::Range(0.0, 100.0));
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output file");

  auto* synth = app.add_subcommand("synth", "random program in the source language");
  synth->add_option("--edges", edges, "approximate edge count");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze) {
      Cfg g = load_program(program);
      auto s = AnySession::create(parse_analysis(common.analysis), std::move(g), common.options());
      if (dump_expr) std::cout << pretty(*s->tree().expression(), s->cfg()) << "\n";
      if (dump_tree) std::cout << s->dump_tree();
      if (!session_dir.empty()) s->save(session_dir);
      std::cout << s->result_record().dump(2) << "\n";
      return kOk;
    }
    if (*update) {
      auto s = AnySession::load(session_dir);
      s->apply(parse_change_script(read_file(script)));
      s->save(session_dir);
      if (dump_tree) std::cout << s->dump_tree();
      std::cout << s->result_record().dump(2) << "\n";
      if (check && !s->matches_baseline()) {
        std::cerr << "oracle mismatch: from scratch gives " << s->baseline_text() << "\n";
        return kMismatch;
      }
      return kOk;
    }
    if (*benchc) {
      if (bargs.program.empty() == (bargs.synth_edges == 0)) {
        std::cerr << "bench needs exactly one of a program path or --synth N\n";
        return kUsage;
      }
      std::ostringstream lines;
      bool ok = bench(common, bargs, seed, lines);
      write_output(bargs.out, lines.str());
      return ok ? kOk : kMismatch;
    }
    if (*laws) {
      Analysis a = parse_analysis(common.analysis);
      LawSampling s{trials, seed, exhaustive};
      LawSuite suite = run_law_suite(a, s);
      std::cout << "[kleene]\n" << suite.kleene.to_text() << "[star-free]\n" << suite.star_free.to_text()
                << "[pre-kleene]\n" << suite.pre_kleene.to_text() << "[order]\n" << suite.order.to_text();
      return claimed_laws_fail(a, suite) ? kMismatch : kOk;
    }
    if (*gen) {
      ChangePlan plan = generate_changes(load_program(program), pct, seed);
      write_output(out, emit_change_script(plan.ops));
      return kOk;
    }
    if (*synth) {
      SynthOptions so;
      so.edges = edges;
      write_output(out, lang::pretty(synth_program(seed, so)));
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kUsage;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
