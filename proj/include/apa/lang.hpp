#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apa {
class Cfg;
}

namespace apa::lang {

struct ArithExpr;
struct BoolExpr;
using ArithPtr = std::shared_ptr<const ArithExpr>;
using BoolPtr = std::shared_ptr<const BoolExpr>;

struct ArithExpr {
  enum class Kind { Const, Var, Neg, Add, Sub, Mul };
  Kind kind = Kind::Const;
  std::int64_t value = 0;
  std::string name;
  ArithPtr lhs, rhs;
};

struct BoolExpr {
  enum class Kind { True, False, Not, And, Or, Cmp };
  enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };
  Kind kind = Kind::True;
  CmpOp op = CmpOp::Eq;
  ArithPtr alhs, arhs;
  BoolPtr blhs, brhs;
};

bool equal(const ArithExpr& a, const ArithExpr& b);
bool equal(const BoolExpr& a, const BoolExpr& b);

std::string pretty(const ArithExpr& e);
std::string pretty(const BoolExpr& e);

/// Variables syntactically read, sorted and unique.
std::vector<std::string> vars_of(const ArithExpr& e);
std::vector<std::string> vars_of(const BoolExpr& e);

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum class Kind { Decl, Assign, Skip, Print, If, While };
  Kind kind = Kind::Skip;
  std::vector<std::string> names; // Decl
  std::string target;             // Assign
  ArithPtr expr;                  // Assign
  std::vector<ArithPtr> args;     // Print
  BoolPtr cond;                   // If, While
  Block then_body;                // If (body of While too)
  Block else_body;                // If
  int line = 0;
  int column = 0;
};

struct Param {
  std::string name;
  bool secret = false;
};

struct Program {
  std::optional<std::string> function;
  std::vector<Param> params;
  Block body;
  std::vector<std::string> declared; // source order, includes params
  std::vector<std::string> secrets;
};

bool equal(const Program& a, const Program& b);

/// Parses the toy imperative language. Throws ParseError on syntax errors and
/// on uses of undeclared variables.
Program parse_program(std::string_view source);

/// Renders a program in the concrete syntax accepted by parse_program.
std::string pretty(const Program& p);

/// Payload attached to a CFG edge. Condition edges carry the variables read
/// by the branch condition and no statement effect.
struct EdgeStmt {
  enum class Kind { Assign, Cond, Skip, Print };
  Kind kind = Kind::Skip;
  std::string target;
  std::vector<std::string> uses;
  std::string text;

  friend bool operator==(const EdgeStmt&, const EdgeStmt&) = default;
};

/// Parses the statement text of a CFG edge. With `condition` set the text is
/// a boolean expression, otherwise `x := t`, `skip`, `print(...)` or an
/// `int` declaration.
EdgeStmt parse_edge_stmt(std::string_view text, bool condition);

/// Lowers a program to a control-flow graph with statements on edges.
Cfg lower_to_cfg(const Program& p);

} // namespace apa::lang
