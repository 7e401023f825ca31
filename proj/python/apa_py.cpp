#include "apa/analyses.hpp"
#include "apa/changegen.hpp"
#include "apa/engine.hpp"
#include "apa/error.hpp"
#include "apa/lang.hpp"
#include "apa/lawpool.hpp"
#include "apa/pathexpr.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace apa;

namespace {

// JSON crosses the boundary as text; Python's json module rebuilds the object.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Cfg load_program(const std::string& text, bool cfg_format) {
  return cfg_format ? parse_cfg_text(text) : lang::lower_to_cfg(lang::parse_program(text));
}

std::vector<std::string> edge_names(const Cfg& g) {
  std::vector<std::string> out;
  for (EdgeId e : g.live_edges()) out.push_back(g.edge(e).name);
  return out;
}

py::dict law_report(const LawReport& r) {
  py::dict out;
  for (const auto& l : r.laws) {
    py::dict d;
    d["holds"] = l.holds;
    d["checked"] = l.checked;
    d["counterexample"] = l.counterexample ? py::cast(*l.counterexample) : py::none();
    out[py::str(l.law)] = d;
  }
  return out;
}

class PySession {
public:
  PySession(const std::string& analysis, const Cfg& g, double alpha, bool early_stop) {
    EngineOptions opt;
    opt.tree.alpha = alpha;
    opt.early_stop = early_stop;
    s_ = AnySession::create(parse_analysis(analysis), g, opt);
  }
  explicit PySession(std::unique_ptr<AnySession> s) : s_(std::move(s)) {}

  py::object apply(const std::string& script) { return to_py(to_json(s_->apply(parse_change_script(script)))); }
  py::object result() const { return to_py(s_->result_record()); }
  std::string root() const { return s_->root_text(); }
  std::optional<std::string> verdict() const {
    if (auto v = s_->verdict()) return std::string(verdict_name(*v));
    return std::nullopt;
  }
  std::string baseline() const { return s_->baseline_text(); }
  bool matches_baseline() const { return s_->matches_baseline(); }
  std::string dump_tree() const { return s_->dump_tree(); }
  std::string cfg_text() const { return emit_cfg_text(s_->cfg()); }
  Cfg cfg() const { return s_->cfg(); }
  void save(const std::string& dir) const { s_->save(dir); }

private:
  std::unique_ptr<AnySession> s_;
};

} // namespace

PYBIND11_MODULE(_apa, m) {
  m.doc() = "Incremental algebraic program analysis";

  // Translators run newest first, so the base class goes in before its subclasses.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ChangeError>(m, "ChangeError", PyExc_ValueError);
  py::register_exception<IrreducibleError>(m, "IrreducibleError", PyExc_ValueError);

  py::class_<Cfg>(m, "Cfg")
      .def_static("from_source", [](const std::string& s) { return load_program(s, false); }, py::arg("source"))
      .def_static("from_text", [](const std::string& s) { return load_program(s, true); }, py::arg("text"))
      .def("to_text", &emit_cfg_text)
      .def("edges", &edge_names)
      .def("edge_count", &Cfg::live_edge_count)
      .def("path_expression", [](const Cfg& g) { return pretty(*compute_path_expression(g), g); })
      .def("shape", &canonical_shape)
      .def("apply", [](const Cfg& g, const std::string& script) {
        Cfg out = g;
        for (const auto& op : parse_change_script(script)) out.apply(op);
        return out;
      }, py::arg("script"), "Returns a changed copy; the receiver is untouched.");

  py::class_<PySession>(m, "Session")
      .def(py::init<const std::string&, const Cfg&, double, bool>(), py::arg("analysis"), py::arg("cfg"),
           py::arg("alpha") = 0.25, py::arg("early_stop") = true)
      .def_static("load", [](const std::string& dir) { return PySession(AnySession::load(dir)); })
      .def("apply", &PySession::apply, py::arg("script"), "Applies a change script; returns the counters.")
      .def("result", &PySession::result)
      .def("root", &PySession::root)
      .def("verdict", &PySession::verdict)
      .def("baseline", &PySession::baseline)
      .def("matches_baseline", &PySession::matches_baseline)
      .def("dump_tree", &PySession::dump_tree)
      .def("cfg", &PySession::cfg)
      .def("save", &PySession::save, py::arg("dir"));

  m.def("check_laws", [](const std::string& analysis, std::size_t trials, std::uint64_t seed, bool exhaustive) {
    LawSuite s = run_law_suite(parse_analysis(analysis), LawSampling{trials, seed, exhaustive});
    py::dict out;
    out["kleene"] = law_report(s.kleene);
    out["star-free"] = law_report(s.star_free);
    out["pre-kleene"] = law_report(s.pre_kleene);
    out["order"] = law_report(s.order);
    return out;
  }, py::arg("analysis"), py::arg("trials") = 1000, py::arg("seed") = 1, py::arg("exhaustive") = false);

  m.def("generate_changes", [](const Cfg& g, double pct, std::uint64_t seed) {
    return emit_change_script(generate_changes(g, pct, seed).ops);
  }, py::arg("cfg"), py::arg("pct"), py::arg("seed"));

  m.def("synth", [](std::size_t edges, std::uint64_t seed) {
    SynthOptions so;
    so.edges = edges;
    return lang::pretty(synth_program(seed, so));
  }, py::arg("edges") = 250, py::arg("seed") = 1);
}
