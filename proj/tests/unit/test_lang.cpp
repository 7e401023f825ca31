#include "support.hpp"

#include "apa/changegen.hpp"
#include "apa/error.hpp"
#include "apa/pathexpr.hpp"

#include <doctest.h>

using namespace apa;
using namespace apa::lang;

TEST_CASE("a lone assignment parses to one assign statement") {
  Program p = parse_program("x := 5;");
  REQUIRE(p.body.size() == 1);
  CHECK(p.body[0].kind == Stmt::Kind::Assign);
  CHECK(p.body[0].target == "x");
  CHECK(p.declared == std::vector<std::string>{"x"});
}

TEST_CASE("reading an undeclared variable is an error with its position") {
  try {
    parse_program("int x;\nx := y");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
    CHECK(e.message().find("'y'") != std::string::npos);
  }
}

TEST_CASE("syntax errors name what was expected") {
  try {
    parse_program("int x;\nwhile x < 3 x := 1");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.message().find("'do'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_program("int x; x := (1 + 2"), ParseError);
  CHECK_THROWS_AS(parse_program("int x; x := 1 $"), ParseError);
}

TEST_CASE("the loop example has one while, one if and five variables") {
  Program p = parse_program(test::fixture_text("fig2.imp"));
  int whiles = 0, ifs = 0;
  for (const auto& s : p.body) {
    if (s.kind == Stmt::Kind::While) {
      ++whiles;
      for (const auto& t : s.then_body) ifs += t.kind == Stmt::Kind::If;
    }
  }
  CHECK(whiles == 1);
  CHECK(ifs == 1);
  CHECK(p.declared == std::vector<std::string>{"a", "b", "c", "d", "e"});
}

TEST_CASE("secret parameters are recorded; `secret` may also be a name") {
  Program p = parse_program(test::fixture_text("fig6.imp"));
  CHECK(p.function == "const_time");
  CHECK(p.secrets == std::vector<std::string>{"secret"});
  Program q = parse_program("fn f(secret, secret int k) { secret := k }");
  CHECK(q.secrets == std::vector<std::string>{"k"});
}

TEST_CASE("pretty printing reparses to the same program") {
  for (const char* f : {"fig2.imp", "fig3.imp", "fig6.imp"}) {
    Program p = parse_program(test::fixture_text(f));
    CHECK(equal(parse_program(pretty(p)), p));
  }
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    SynthOptions so;
    so.edges = 20 + seed * 3;
    Program p = synth_program(seed, so);
    std::string text = pretty(p);
    CAPTURE(text);
    CHECK(equal(parse_program(text), p));
    CHECK(pretty(parse_program(text)) == text);
  }
}

TEST_CASE("an empty program lowers to a lone entry node") {
  Cfg g = lower_to_cfg(parse_program(""));
  CHECK(g.live_edge_count() == 0);
  CHECK(g.live_nodes().size() == 1);
  CHECK(g.exit() == g.entry());
}

TEST_CASE("lowering names condition edges e<k> and e<k>'") {
  Cfg g = test::fixture_cfg("fig2.imp");
  CHECK(pretty(*compute_path_expression(g), g) == "e1e2e3(e4(e5e6+e5'e7)e8)*e4'e9e10");
  CHECK(g.edge(test::edge(g, "e4")).cond == Polarity::Then);
  CHECK(g.edge(test::edge(g, "e4'")).cond == Polarity::Else);

  Cfg h = test::fixture_cfg("fig6.imp");
  CHECK(pretty(*compute_path_expression(h), h) == "e1e2e3(e4e5+e4'e6)(e7(e8e9e10)*e8'+e7'e11)e12");
}

TEST_CASE("lowered programs have the shape of the hand-written graphs") {
  CHECK(canonical_shape(test::fixture_cfg("fig2.imp")) == canonical_shape(test::fixture_cfg("fig2.cfg")));
  CHECK(canonical_shape(test::fixture_cfg("fig6.imp")) == canonical_shape(test::fixture_cfg("fig6.cfg")));
}

TEST_CASE("lowering is deterministic and keeps the graph shape invariants") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Program p = synth_program(seed);
    Cfg a = lower_to_cfg(p);
    Cfg b = lower_to_cfg(p);
    CHECK(emit_cfg_text(a) == emit_cfg_text(b));
    for (NodeId n : a.live_nodes()) {
      const auto& node = a.node(n);
      if (n != a.entry()) CHECK(!node.in.empty());
      int conds = 0;
      for (EdgeId e : node.out) conds += a.edge(e).cond.has_value();
      if (conds) {
        CHECK(conds == 2);
        CHECK(node.out.size() == 2);
      }
    }
  }
}

TEST_CASE("edge statements carry their definitions and uses") {
  EdgeStmt s = parse_edge_stmt("x := y * (z - 1)", false);
  CHECK(s.kind == EdgeStmt::Kind::Assign);
  CHECK(s.target == "x");
  CHECK(s.uses == std::vector<std::string>{"y", "z"});
  EdgeStmt c = parse_edge_stmt("!(a < b) || c == 2", true);
  CHECK(c.kind == EdgeStmt::Kind::Cond);
  CHECK(c.uses == std::vector<std::string>{"a", "b", "c"});
  EdgeStmt p = parse_edge_stmt("print(b + c + e)", false);
  CHECK(p.kind == EdgeStmt::Kind::Print);
  CHECK(p.uses == std::vector<std::string>{"b", "c", "e"});
  CHECK(parse_edge_stmt("skip", false).kind == EdgeStmt::Kind::Skip);
}
