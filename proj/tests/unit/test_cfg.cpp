#include "support.hpp"

#include "apa/error.hpp"

#include <doctest.h>

using namespace apa;

namespace {

ChangeOp add_after(std::string after, std::string id, std::string stmt) {
  ChangeOp op;
  op.kind = ChangeOp::Kind::Add;
  op.anchor = std::move(after);
  op.id = std::move(id);
  op.stmt_text = std::move(stmt);
  return op;
}

ChangeOp del(std::string target) {
  ChangeOp op;
  op.kind = ChangeOp::Kind::Delete;
  op.anchor = std::move(target);
  return op;
}

ChangeOp upd(std::string target, std::string stmt) {
  ChangeOp op;
  op.kind = ChangeOp::Kind::Update;
  op.anchor = std::move(target);
  op.stmt_text = std::move(stmt);
  return op;
}

} // namespace

TEST_CASE("a one-edge graph parses") {
  Cfg g = parse_cfg_text("entry n1\nnode n1\nnode n2\nedge e1 n1 n2 \"skip\"\n");
  CHECK(g.live_nodes().size() == 2);
  CHECK(g.live_edge_count() == 1);
  CHECK(g.node(g.entry()).name == "n1");
  CHECK(g.node(g.exit()).name == "n2");
}

TEST_CASE("emit is a fixed point of parse for every fixture") {
  for (const char* f : {"fig2.cfg", "fig6.cfg", "fig2.imp", "fig3.imp", "fig6.imp"}) {
    CAPTURE(f);
    Cfg g = test::fixture_cfg(f);
    std::string once = emit_cfg_text(g);
    std::string twice = emit_cfg_text(parse_cfg_text(once));
    CHECK(once == twice);
    CHECK(canonical_shape(parse_cfg_text(once)) == canonical_shape(g));
  }
}

TEST_CASE("malformed graph text is rejected with a line number") {
  auto line_of = [](const std::string& text) {
    try {
      parse_cfg_text(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("node n1\nnode n2\nedge e1 n1 n2 \"skip\"\n") == 4);
  CHECK(line_of("entry n1\nnode n1\nnode n2\nedge e1 n1 n2 \"skip\"\nedge e1 n2 n1 \"skip\"\n") == 5);
  CHECK(line_of("entry n1\nnode n1\nedge e1 n1 n9 \"skip\"\n") == 3);
  CHECK(line_of("entry n1\nnode n1\nnode n2\nedge e1 n1 n2 skip\n") == 4);
  CHECK(line_of("entry n1\nnode n1\nnode n2\nedge e1 n1 n2 \"x := \"\n") == 4);
  CHECK(line_of("entry n1\nnode n1\nnode n2\nedge e1 n1 n2 \"a < 1\" cond:maybe\n") == 4);
  CHECK(line_of("entry n1\nentry n1\n") == 2);
  CHECK(line_of("entry n1\nnode n1\nwidget w\n") == 3);
}

TEST_CASE("adding e5 after e4 gives the changed program's graph") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  std::size_t nodes = g.live_nodes().size();
  g.apply(add_after("e4", "e5", "b := a + 5"));
  CHECK(g.live_nodes().size() == nodes + 1);
  CHECK(g.live_edge_count() == 13);
  EdgeId e4 = test::edge(g, "e4"), e5 = test::edge(g, "e5");
  CHECK(g.edge(e4).dst == g.edge(e5).src);
  CHECK(g.node(g.edge(e5).dst).name == "n6");
  CHECK(canonical_shape(g) == canonical_shape(test::fixture_cfg("fig3.imp")));

  Cfg back = apply_change(g, del("e5"));
  CHECK(canonical_shape(back) == canonical_shape(test::fixture_cfg("fig2.cfg")));
  CHECK(canonical_shape(g) != canonical_shape(back));
}

TEST_CASE("update keeps the structure and replaces the statement") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  Cfg h = apply_change(g, upd("e3", "b := a + 6"));
  EdgeId e3 = test::edge(h, "e3");
  CHECK(h.edge(e3).stmt.text == "b := a + 6");
  CHECK(h.edge(e3).src == g.edge(e3).src);
  CHECK(h.edge(e3).dst == g.edge(e3).dst);
  CHECK(h.live_edges() == g.live_edges());
  CHECK(h.live_nodes() == g.live_nodes());
}

TEST_CASE("definition sets follow the changes") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  VarId b = *g.find_var("b");
  CHECK(g.defs_of(b) == IdSet{test::edge(g, "e3")});
  g.apply(add_after("e4", "e5", "b := a + 5"));
  CHECK(g.defs_of(b) == IdSet{test::edge(g, "e3"), test::edge(g, "e5")});
  g.apply(upd("e5", "print(b)"));
  CHECK(g.defs_of(b) == IdSet{test::edge(g, "e3")});
}

TEST_CASE("edge ids are never reused") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  std::size_t slots = g.edge_slots();
  g.apply(add_after("e4", "e5", "b := a + 5"));
  g.apply(del("e5"));
  CHECK(g.edge_slots() == slots + 1);
  CHECK_THROWS_AS(g.apply(add_after("e4", "e5", "skip")), ChangeError);
  CHECK_THROWS_AS(g.apply(add_after("e4", "e3", "skip")), ChangeError);
  g.apply(add_after("e4", "e5b", "skip"));
  CHECK(g.edge_slots() == slots + 2);
}

TEST_CASE("bad references are rejected and leave the graph untouched") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  std::string before = emit_cfg_text(g);
  CHECK_THROWS_AS(g.apply(del("e99")), ChangeError);
  CHECK_THROWS_AS(g.apply(upd("e99", "skip")), ChangeError);
  CHECK_THROWS_AS(g.apply(add_after("e99", "x1", "skip")), ChangeError);
  CHECK_THROWS_AS(g.apply(upd("e2", "a :=")), ChangeError);
  g.apply(del("e2"));
  CHECK_THROWS_AS(g.apply(del("e2")), ChangeError);
  CHECK(emit_cfg_text(g) != before);
  CHECK(g.connected());
}

TEST_CASE("a delete that would cut off the exit is rejected") {
  // l is a self-loop at n2 and b is the only way out of it.
  Cfg g = parse_cfg_text("entry n1\nnode n1\nnode n2\nnode n3\n"
                         "edge a n1 n2 \"skip\"\n"
                         "edge l n2 n2 \"x := 1\"\n"
                         "edge b n2 n3 \"skip\"\n");
  std::string before = emit_cfg_text(g);
  CHECK_THROWS_AS(g.apply(del("b")), ChangeError);
  CHECK(emit_cfg_text(g) == before);
  g.apply(del("l"));
  CHECK(g.live_edge_count() == 2);
}

TEST_CASE("loops and branches install basic structures") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  ChangeOp loop;
  loop.kind = ChangeOp::Kind::AddLoop;
  loop.anchor = "e2";
  loop.id = "l1";
  loop.stmt_text = "a := a + 1";
  g.apply(loop);
  EdgeId l1 = test::edge(g, "l1");
  CHECK(g.edge(l1).src == g.edge(l1).dst);
  CHECK(g.edge(l1).src == g.edge(test::edge(g, "e2")).src);

  ChangeOp branch;
  branch.kind = ChangeOp::Kind::AddBranch;
  branch.anchor = "e11";
  branch.id = "x1";
  branch.stmt_text = "c := 0";
  g.apply(branch);
  EdgeId x1 = test::edge(g, "x1"), e11 = test::edge(g, "e11");
  CHECK(g.edge(x1).src == g.edge(e11).src);
  CHECK(g.edge(x1).dst == g.edge(e11).dst);

  // A loop site must be the only edge leaving its source.
  loop.anchor = "e4";
  loop.id = "l2";
  CHECK_THROWS_AS(g.apply(loop), ChangeError);
}

TEST_CASE("a start-of-subprogram add goes in front of the named edge") {
  Cfg g = test::fixture_cfg("fig2.cfg");
  ChangeOp op = add_after("^", "e0", "e := 0");
  op.before = "e1";
  g.apply(op);
  CHECK(g.edge(test::edge(g, "e0")).src == g.entry());
  CHECK(g.edge(test::edge(g, "e0")).dst == g.edge(test::edge(g, "e1")).src);
}

TEST_CASE("change scripts round-trip") {
  std::string text = "add e4 e5 - \"b := a + 5\"\n"
                     "add ^ e0 e1 \"e := 0\"\n"
                     "del e7\n"
                     "upd e3 \"b := \\\"q\\\"\"\n"
                     "loop e2 l1 \"a := a + 1\"\n"
                     "branch e11 x1 \"c := 0\"\n";
  auto ops = parse_change_script(text);
  REQUIRE(ops.size() == 6);
  CHECK(ops[0].kind == ChangeOp::Kind::Add);
  CHECK(ops[1].before == "e1");
  CHECK(ops[2].kind == ChangeOp::Kind::Delete);
  CHECK(ops[4].kind == ChangeOp::Kind::AddLoop);
  CHECK(ops[5].kind == ChangeOp::Kind::AddBranch);
  CHECK(parse_change_script(emit_change_script(ops)) == ops);
  CHECK_THROWS_AS(parse_change_script("add e4 e5 n9 \"skip\"\n"), ParseError);
  CHECK_THROWS_AS(parse_change_script("del\n"), ParseError);
  CHECK_THROWS_AS(parse_change_script("move e1\n"), ParseError);
}
