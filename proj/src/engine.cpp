#include "apa/engine.hpp"

#include "apa/error.hpp"

#include <fstream>
#include <sstream>

namespace apa {

namespace fs = std::filesystem;

nlohmann::json to_json(const Counters& c) {
  return {{"tree-nodes", c.tree_nodes},         {"nodes-created", c.nodes_created},
          {"modified", c.modified},             {"facts-recomputed", c.facts_recomputed},
          {"rebuilds", c.rebuilds},             {"rebuild-nodes", c.rebuild_nodes}};
}

nlohmann::json AnySession::result_record() const {
  nlohmann::json r;
  r["analysis"] = std::string(analysis_name(analysis()));
  r["root-fact"] = root_json();
  r["root"] = root_text();
  if (auto v = verdict()) r["verdict"] = std::string(verdict_name(*v));
  r["counters"] = to_json(last_counters());
  return r;
}

namespace {

constexpr const char* kFormat = "apa-session/1";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

template <class A>
class SessionImpl final : public AnySession {
public:
  SessionImpl(Analysis a, Session<A> s) : analysis_(a), s_(std::move(s)) {}

  Analysis analysis() const override { return analysis_; }
  const Cfg& cfg() const override { return s_.cfg(); }
  const ApaTree& tree() const override { return s_.tree(); }
  const EngineOptions& options() const override { return s_.options(); }
  Counters apply(const std::vector<ChangeOp>& ops) override { return s_.apply(ops); }
  const Counters& last_counters() const override { return s_.last_counters(); }

  std::string root_text() const override { return render(s_.root_fact()); }

  nlohmann::json root_json() const override { return fact_json(s_.root_fact()); }

  std::optional<Verdict> verdict() const override {
    if constexpr (std::is_same_v<A, ConstTimeAlgebra>) {
      auto f = s_.root_fact();
      // 0 (no path at all) cannot leak.
      return f ? leak_verdict(*f) : Verdict::ConstantTime;
    } else {
      return std::nullopt;
    }
  }

  std::string baseline_text() const override {
    return render(baseline_apa<A>(s_.cfg(), s_.options()).root);
  }

  bool matches_baseline() const override {
    auto base = baseline_apa<A>(s_.cfg(), s_.options()).root;
    return lifted::equal(s_.algebra(), base, s_.root_fact());
  }

  std::string dump_tree() const override {
    const Cfg& g = s_.cfg();
    return s_.tree().dump([&](EdgeId e) { return g.edge(e).name; },
                          [&](TreeIdx i) { return render(s_.fact_of(i)); });
  }

  void save(const fs::path& dir) const override {
    fs::create_directories(dir);
    write_file(dir / "cfg.txt", emit_cfg_text(s_.cfg()));
    write_file(dir / "tree.dump", dump_tree());
    nlohmann::json facts = nlohmann::json::array();
    for (const auto& f : s_.preorder_facts()) facts.push_back(f ? fact_json(*f) : nlohmann::json());
    write_file(dir / "facts.json", facts.dump(1) + "\n");
    nlohmann::json meta = {{"format", kFormat},
                           {"analysis", std::string(analysis_name(analysis_))},
                           {"alpha", s_.options().tree.alpha},
                           {"early_stop", s_.options().early_stop}};
    write_file(dir / "meta.json", meta.dump(1) + "\n");
  }

  static std::unique_ptr<AnySession> restore(Analysis a, Cfg g, const std::string& tree_text,
                                             const nlohmann::json& facts, EngineOptions opt) {
    ApaTree t = ApaTree::load(
        tree_text,
        [&](const std::string& name) {
          auto e = g.find_edge(name);
          if (!e) throw Error("tree refers to unknown edge '" + name + "'");
          return *e;
        },
        opt.tree);
    A alg = make_algebra<A>(g);
    std::vector<std::optional<Fact<A>>> pre;
    for (const auto& j : facts) {
      if (j.is_null()) pre.emplace_back(std::nullopt);
      else if (j.is_string() && j.get<std::string>() == "0") pre.emplace_back(std::in_place, std::nullopt);
      else pre.emplace_back(std::in_place, alg.from_json(j, g));
    }
    return std::make_unique<SessionImpl>(a, Session<A>(std::move(g), std::move(t), pre, opt));
  }

private:
  std::string render(const Fact<A>& f) const {
    return f ? s_.algebra().render(*f, &s_.cfg()) : std::string("0");
  }
  nlohmann::json fact_json(const Fact<A>& f) const {
    return f ? s_.algebra().to_json(*f, s_.cfg()) : nlohmann::json("0");
  }

  Analysis analysis_;
  Session<A> s_;
};

} // namespace

std::unique_ptr<AnySession> AnySession::create(Analysis a, Cfg g, EngineOptions opt) {
  switch (a) {
  case Analysis::Uninit:
    return std::make_unique<SessionImpl<UninitAlgebra>>(a, Session<UninitAlgebra>(std::move(g), opt));
  case Analysis::ReachDef:
    return std::make_unique<SessionImpl<ReachDefAlgebra>>(a, Session<ReachDefAlgebra>(std::move(g), opt));
  case Analysis::ConstTime:
    return std::make_unique<SessionImpl<ConstTimeAlgebra>>(a, Session<ConstTimeAlgebra>(std::move(g), opt));
  }
  throw Error("unknown analysis");
}

std::unique_ptr<AnySession> AnySession::load(const fs::path& dir) {
  nlohmann::json meta;
  nlohmann::json facts;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    facts = nlohmann::json::parse(read_file(dir / "facts.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad session file: " + std::string(e.what()));
  }
  if (meta.value("format", "") != kFormat) throw Error("unsupported session format in " + dir.string());
  EngineOptions opt;
  opt.tree.alpha = meta.at("alpha").get<double>();
  opt.early_stop = meta.at("early_stop").get<bool>();
  Analysis a = parse_analysis(meta.at("analysis").get<std::string>());
  Cfg g = parse_cfg_text(read_file(dir / "cfg.txt"));
  std::string tree_text = read_file(dir / "tree.dump");
  switch (a) {
  case Analysis::Uninit: return SessionImpl<UninitAlgebra>::restore(a, std::move(g), tree_text, facts, opt);
  case Analysis::ReachDef: return SessionImpl<ReachDefAlgebra>::restore(a, std::move(g), tree_text, facts, opt);
  case Analysis::ConstTime: return SessionImpl<ConstTimeAlgebra>::restore(a, std::move(g), tree_text, facts, opt);
  }
  throw Error("unknown analysis");
}

} // namespace apa
