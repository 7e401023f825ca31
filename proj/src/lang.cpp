#include "apa/lang.hpp"

#include "apa/cfg.hpp"
#include "apa/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace apa::lang {
namespace {

enum class Tok {
  Ident, Int, Assign, Semi, Comma, LParen, RParen, LBrace, RBrace,
  Plus, Minus, Star, Lt, Le, Gt, Ge, EqEq, Ne, Bang, AndAnd, OrOr, End
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

const char* describe(Tok t) {
  switch (t) {
  case Tok::Ident: return "identifier";
  case Tok::Int: return "integer";
  case Tok::Assign: return "':='";
  case Tok::Semi: return "';'";
  case Tok::Comma: return "','";
  case Tok::LParen: return "'('";
  case Tok::RParen: return "')'";
  case Tok::LBrace: return "'{'";
  case Tok::RBrace: return "'}'";
  case Tok::Plus: return "'+'";
  case Tok::Minus: return "'-'";
  case Tok::Star: return "'*'";
  case Tok::Lt: return "'<'";
  case Tok::Le: return "'<='";
  case Tok::Gt: return "'>'";
  case Tok::Ge: return "'>='";
  case Tok::EqEq: return "'=='";
  case Tok::Ne: return "'!='";
  case Tok::Bang: return "'!'";
  case Tok::AndAnd: return "'&&'";
  case Tok::OrOr: return "'||'";
  case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') { ++line; col = 1; } else { ++col; }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    Tok t;
    std::size_t n = 2;
    if (two(':', '=')) t = Tok::Assign;
    else if (two('<', '=')) t = Tok::Le;
    else if (two('>', '=')) t = Tok::Ge;
    else if (two('=', '=')) t = Tok::EqEq;
    else if (two('!', '=')) t = Tok::Ne;
    else if (two('&', '&')) t = Tok::AndAnd;
    else if (two('|', '|')) t = Tok::OrOr;
    else {
      n = 1;
      switch (c) {
      case ';': t = Tok::Semi; break;
      case ',': t = Tok::Comma; break;
      case '(': t = Tok::LParen; break;
      case ')': t = Tok::RParen; break;
      case '{': t = Tok::LBrace; break;
      case '}': t = Tok::RBrace; break;
      case '+': t = Tok::Plus; break;
      case '-': t = Tok::Minus; break;
      case '*': t = Tok::Star; break;
      case '<': t = Tok::Lt; break;
      case '>': t = Tok::Gt; break;
      case '!': t = Tok::Bang; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
      }
    }
    out.push_back({t, std::string(src.substr(i, n)), l, cl});
    advance(n);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::unordered_set<std::string> kKeywords = {
    "fn", "int", "if", "then", "else", "while", "do", "skip", "print", "true", "false"};

class Parser {
public:
  Parser(std::vector<Token> toks, bool check_scope)
      : toks_(std::move(toks)), check_scope_(check_scope) {}

  Program program() {
    Program p;
    if (is_kw("fn")) {
      next();
      p.function = ident("function name");
      expect(Tok::LParen);
      if (!at(Tok::RParen)) {
        do {
          Param param;
          // `secret` is a marker only when a name follows, so it can also name a parameter.
          if (is_kw("secret") && toks_[pos_ + 1].kind == Tok::Ident) {
            next();
            param.secret = true;
          }
          if (is_kw("int")) next();
          const Token& t = peek();
          param.name = ident("parameter name");
          declare(param.name, t);
          p.declared.push_back(param.name);
          if (param.secret) p.secrets.push_back(param.name);
          p.params.push_back(std::move(param));
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
      expect(Tok::LBrace);
      p.body = block_until(Tok::RBrace);
      expect(Tok::RBrace);
    } else {
      p.body = block_until(Tok::End);
    }
    expect(Tok::End);
    p.declared.insert(p.declared.end(), decl_order_.begin(), decl_order_.end());
    return p;
  }

  EdgeStmt edge_stmt(bool condition) {
    EdgeStmt s;
    if (condition) {
      BoolPtr b = bexp();
      s.kind = EdgeStmt::Kind::Cond;
      s.uses = vars_of(*b);
      s.text = pretty(*b);
    } else {
      Stmt st = simple_stmt();
      switch (st.kind) {
      case Stmt::Kind::Assign:
        s.kind = EdgeStmt::Kind::Assign;
        s.target = st.target;
        s.uses = vars_of(*st.expr);
        s.text = st.target + " := " + pretty(*st.expr);
        break;
      case Stmt::Kind::Print: {
        s.kind = EdgeStmt::Kind::Print;
        std::set<std::string> uses;
        s.text = "print(";
        for (std::size_t i = 0; i < st.args.size(); ++i) {
          for (auto& v : vars_of(*st.args[i])) uses.insert(v);
          s.text += (i ? ", " : "") + pretty(*st.args[i]);
        }
        s.text += ")";
        s.uses.assign(uses.begin(), uses.end());
        break;
      }
      case Stmt::Kind::Decl:
        s.kind = EdgeStmt::Kind::Skip;
        s.text = "int ";
        for (std::size_t i = 0; i < st.names.size(); ++i) s.text += (i ? ", " : "") + st.names[i];
        break;
      default:
        s.kind = EdgeStmt::Kind::Skip;
        s.text = "skip";
      }
      accept(Tok::Semi);
    }
    expect(Tok::End);
    return s;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  bool at(Tok t) const { return peek().kind == t; }
  bool is_kw(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok t) {
    if (!at(t)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError("expected " + expected + ", found " + got, t.line, t.column);
  }
  void expect(Tok t) {
    if (!accept(t)) fail(describe(t));
  }
  void expect_kw(const char* kw) {
    if (!is_kw(kw)) fail(std::string("'") + kw + "'");
    next();
  }
  std::string ident(const char* what) {
    if (!at(Tok::Ident) || kKeywords.count(peek().text)) fail(what);
    return next().text;
  }
  void declare(const std::string& name, const Token&) {
    if (declared_.insert(name).second && in_body_) decl_order_.push_back(name);
  }
  void use(const std::string& name, const Token& t) {
    if (check_scope_ && !declared_.count(name))
      throw ParseError("undeclared variable '" + name + "'", t.line, t.column);
  }

  Block block_until(Tok end) {
    in_body_ = true;
    Block b;
    while (!at(end) && !at(Tok::End)) stmt_into(b);
    return b;
  }

  // Appends one statement; a braced block splices its contents.
  void stmt_into(Block& out) {
    const Token& start = peek();
    if (accept(Tok::LBrace)) {
      while (!at(Tok::RBrace)) {
        if (at(Tok::End)) fail("'}'");
        stmt_into(out);
      }
      expect(Tok::RBrace);
      accept(Tok::Semi);
      return;
    }
    Stmt s;
    s.line = start.line;
    s.column = start.column;
    if (is_kw("if")) {
      next();
      s.kind = Stmt::Kind::If;
      s.cond = bexp();
      expect_kw("then");
      stmt_into(s.then_body);
      if (is_kw("else")) {
        next();
        stmt_into(s.else_body);
      }
    } else if (is_kw("while")) {
      next();
      s.kind = Stmt::Kind::While;
      s.cond = bexp();
      expect_kw("do");
      stmt_into(s.then_body);
    } else {
      Stmt simple = simple_stmt();
      simple.line = s.line;
      simple.column = s.column;
      // `;` separates statements; it may be omitted before `}`, `else` or the end.
      if (!accept(Tok::Semi) && !at(Tok::RBrace) && !at(Tok::End) && !is_kw("else")) expect(Tok::Semi);
      out.push_back(std::move(simple));
      return;
    }
    accept(Tok::Semi);
    out.push_back(std::move(s));
  }

  Stmt simple_stmt() {
    Stmt s;
    if (is_kw("int")) {
      next();
      s.kind = Stmt::Kind::Decl;
      do {
        const Token& t = peek();
        s.names.push_back(ident("variable name"));
        declare(s.names.back(), t);
      } while (accept(Tok::Comma));
    } else if (is_kw("skip")) {
      next();
      s.kind = Stmt::Kind::Skip;
    } else if (is_kw("print")) {
      next();
      s.kind = Stmt::Kind::Print;
      expect(Tok::LParen);
      if (!at(Tok::RParen)) {
        do s.args.push_back(aexp());
        while (accept(Tok::Comma));
      }
      expect(Tok::RParen);
    } else if (at(Tok::Ident) && !kKeywords.count(peek().text)) {
      const Token& t = next();
      // Assigning a variable declares it; only reads must be in scope.
      declare(t.text, t);
      s.kind = Stmt::Kind::Assign;
      s.target = t.text;
      expect(Tok::Assign);
      s.expr = aexp();
    } else {
      fail("statement");
    }
    return s;
  }

  static ArithPtr bin(ArithExpr::Kind k, ArithPtr l, ArithPtr r) {
    auto e = std::make_shared<ArithExpr>();
    e->kind = k;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
  }

  ArithPtr aexp() {
    ArithPtr l = term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      auto k = next().kind == Tok::Plus ? ArithExpr::Kind::Add : ArithExpr::Kind::Sub;
      l = bin(k, l, term());
    }
    return l;
  }

  ArithPtr term() {
    ArithPtr l = factor();
    while (accept(Tok::Star)) l = bin(ArithExpr::Kind::Mul, l, factor());
    return l;
  }

  ArithPtr factor() {
    auto e = std::make_shared<ArithExpr>();
    if (at(Tok::Int)) {
      e->kind = ArithExpr::Kind::Const;
      try {
        e->value = std::stoll(peek().text);
      } catch (const std::out_of_range&) {
        throw ParseError("integer literal out of range", peek().line, peek().column);
      }
      next();
    } else if (accept(Tok::Minus)) {
      e->kind = ArithExpr::Kind::Neg;
      e->lhs = factor();
    } else if (accept(Tok::LParen)) {
      ArithPtr inner = aexp();
      expect(Tok::RParen);
      return inner;
    } else if (at(Tok::Ident) && !kKeywords.count(peek().text)) {
      const Token& t = next();
      use(t.text, t);
      e->kind = ArithExpr::Kind::Var;
      e->name = t.text;
    } else {
      fail("arithmetic expression");
    }
    return e;
  }

  BoolPtr bexp() {
    BoolPtr l = band();
    while (accept(Tok::OrOr)) l = bbin(BoolExpr::Kind::Or, l, band());
    return l;
  }

  BoolPtr band() {
    BoolPtr l = bnot();
    while (accept(Tok::AndAnd)) l = bbin(BoolExpr::Kind::And, l, bnot());
    return l;
  }

  static BoolPtr bbin(BoolExpr::Kind k, BoolPtr l, BoolPtr r) {
    auto e = std::make_shared<BoolExpr>();
    e->kind = k;
    e->blhs = std::move(l);
    e->brhs = std::move(r);
    return e;
  }

  BoolPtr bnot() {
    auto e = std::make_shared<BoolExpr>();
    if (accept(Tok::Bang)) {
      e->kind = BoolExpr::Kind::Not;
      e->blhs = bnot();
      return e;
    }
    if (is_kw("true") || is_kw("false")) {
      e->kind = next().text == "true" ? BoolExpr::Kind::True : BoolExpr::Kind::False;
      return e;
    }
    if (at(Tok::LParen)) {
      // Either a parenthesised arithmetic operand of a comparison or a
      // parenthesised boolean expression.
      std::size_t save = pos_;
      try {
        return comparison();
      } catch (const ParseError&) {
        pos_ = save;
      }
      next();
      BoolPtr inner = bexp();
      expect(Tok::RParen);
      return inner;
    }
    return comparison();
  }

  BoolPtr comparison() {
    auto e = std::make_shared<BoolExpr>();
    e->kind = BoolExpr::Kind::Cmp;
    e->alhs = aexp();
    switch (peek().kind) {
    case Tok::Lt: e->op = BoolExpr::CmpOp::Lt; break;
    case Tok::Le: e->op = BoolExpr::CmpOp::Le; break;
    case Tok::Gt: e->op = BoolExpr::CmpOp::Gt; break;
    case Tok::Ge: e->op = BoolExpr::CmpOp::Ge; break;
    case Tok::EqEq: e->op = BoolExpr::CmpOp::Eq; break;
    case Tok::Ne: e->op = BoolExpr::CmpOp::Ne; break;
    default: fail("comparison operator");
    }
    next();
    e->arhs = aexp();
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool check_scope_;
  bool in_body_ = false;
  std::set<std::string> declared_;
  std::vector<std::string> decl_order_;
};

void collect(const ArithExpr& e, std::set<std::string>& out) {
  if (e.kind == ArithExpr::Kind::Var) out.insert(e.name);
  if (e.lhs) collect(*e.lhs, out);
  if (e.rhs) collect(*e.rhs, out);
}

void collect(const BoolExpr& e, std::set<std::string>& out) {
  if (e.alhs) collect(*e.alhs, out);
  if (e.arhs) collect(*e.arhs, out);
  if (e.blhs) collect(*e.blhs, out);
  if (e.brhs) collect(*e.brhs, out);
}

int prec(const ArithExpr& e) {
  switch (e.kind) {
  case ArithExpr::Kind::Add:
  case ArithExpr::Kind::Sub: return 1;
  case ArithExpr::Kind::Mul: return 2;
  case ArithExpr::Kind::Neg: return 3;
  default: return 4;
  }
}

std::string print(const ArithExpr& e, int min_prec) {
  std::string s;
  switch (e.kind) {
  case ArithExpr::Kind::Const: s = std::to_string(e.value); break;
  case ArithExpr::Kind::Var: s = e.name; break;
  case ArithExpr::Kind::Neg: s = "-" + print(*e.lhs, 3); break;
  case ArithExpr::Kind::Add: s = print(*e.lhs, 1) + " + " + print(*e.rhs, 2); break;
  case ArithExpr::Kind::Sub: s = print(*e.lhs, 1) + " - " + print(*e.rhs, 2); break;
  case ArithExpr::Kind::Mul: s = print(*e.lhs, 2) + " * " + print(*e.rhs, 3); break;
  }
  return prec(e) < min_prec ? "(" + s + ")" : s;
}

int prec(const BoolExpr& e) {
  switch (e.kind) {
  case BoolExpr::Kind::Or: return 1;
  case BoolExpr::Kind::And: return 2;
  case BoolExpr::Kind::Not: return 3;
  default: return 4;
  }
}

const char* cmp_text(BoolExpr::CmpOp op) {
  switch (op) {
  case BoolExpr::CmpOp::Lt: return " < ";
  case BoolExpr::CmpOp::Le: return " <= ";
  case BoolExpr::CmpOp::Gt: return " > ";
  case BoolExpr::CmpOp::Ge: return " >= ";
  case BoolExpr::CmpOp::Eq: return " == ";
  case BoolExpr::CmpOp::Ne: return " != ";
  }
  return " ? ";
}

std::string print(const BoolExpr& e, int min_prec) {
  std::string s;
  switch (e.kind) {
  case BoolExpr::Kind::True: s = "true"; break;
  case BoolExpr::Kind::False: s = "false"; break;
  case BoolExpr::Kind::Not: s = "!" + print(*e.blhs, 3); break;
  case BoolExpr::Kind::And: s = print(*e.blhs, 2) + " && " + print(*e.brhs, 3); break;
  case BoolExpr::Kind::Or: s = print(*e.blhs, 1) + " || " + print(*e.brhs, 2); break;
  case BoolExpr::Kind::Cmp: s = print(*e.alhs, 1) + cmp_text(e.op) + print(*e.arhs, 1); break;
  }
  return prec(e) < min_prec ? "(" + s + ")" : s;
}

bool equal_ptr(const ArithPtr& a, const ArithPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal_ptr(const BoolPtr& a, const BoolPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool equal(const Block& a, const Block& b);

bool equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.names != b.names || a.target != b.target) return false;
  if (!equal_ptr(a.expr, b.expr) || !equal_ptr(a.cond, b.cond)) return false;
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal_ptr(a.args[i], b.args[i])) return false;
  return equal(a.then_body, b.then_body) && equal(a.else_body, b.else_body);
}

bool equal(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i])) return false;
  return true;
}

void print_block(const Block& b, int indent, std::string& out);

void print_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(indent * 2, ' ');
  switch (s.kind) {
  case Stmt::Kind::Decl:
    out += pad + "int ";
    for (std::size_t i = 0; i < s.names.size(); ++i) out += (i ? ", " : "") + s.names[i];
    out += ";\n";
    break;
  case Stmt::Kind::Assign:
    out += pad + s.target + " := " + pretty(*s.expr) + ";\n";
    break;
  case Stmt::Kind::Skip:
    out += pad + "skip;\n";
    break;
  case Stmt::Kind::Print:
    out += pad + "print(";
    for (std::size_t i = 0; i < s.args.size(); ++i) out += (i ? ", " : "") + pretty(*s.args[i]);
    out += ");\n";
    break;
  case Stmt::Kind::If:
    out += pad + "if " + pretty(*s.cond) + " then {\n";
    print_block(s.then_body, indent + 1, out);
    out += pad + "} else {\n";
    print_block(s.else_body, indent + 1, out);
    out += pad + "}\n";
    break;
  case Stmt::Kind::While:
    out += pad + "while " + pretty(*s.cond) + " do {\n";
    print_block(s.then_body, indent + 1, out);
    out += pad + "}\n";
    break;
  }
}

void print_block(const Block& b, int indent, std::string& out) {
  for (const auto& s : b) print_stmt(s, indent, out);
}

// --- lowering -------------------------------------------------------------

class Lowering {
public:
  explicit Lowering(Cfg& g) : g_(g) {}

  NodeId node() { return g_.add_node("n" + std::to_string(++nodes_)); }

  void edge(NodeId src, NodeId dst, EdgeStmt stmt) {
    g_.add_edge("e" + std::to_string(++edges_), src, dst, std::move(stmt));
  }

  // A condition's two edges share one number; the else/exit edge is primed.
  int cond_number() { return ++edges_; }

  void cond_edge(int k, Polarity pol, NodeId src, NodeId dst, EdgeStmt stmt) {
    std::string name = "e" + std::to_string(k) + (pol == Polarity::Else ? "'" : "");
    g_.add_edge(std::move(name), src, dst, std::move(stmt), pol);
  }

  // Emits a non-empty block as a path from `from` to `to`.
  void seq(const Block& stmts, NodeId from, NodeId to) {
    NodeId cur = from;
    for (std::size_t i = 0; i < stmts.size(); ++i)
      cur = stmt(stmts[i], cur, i + 1 == stmts.size() ? to : kNoNode);
  }

  // Lowers one statement starting at `from`; `to` is its continuation node,
  // or kNoNode to allocate a fresh one. Returns the continuation node.
  NodeId stmt(const Stmt& s, NodeId from, NodeId to) {
    switch (s.kind) {
    case Stmt::Kind::If: {
      EdgeStmt c = cond_stmt(*s.cond);
      int k = cond_number();
      NodeId join = to == kNoNode ? node() : to;
      if (s.then_body.empty()) {
        cond_edge(k, Polarity::Then, from, join, c);
      } else {
        NodeId head = node();
        cond_edge(k, Polarity::Then, from, head, c);
        seq(s.then_body, head, join);
      }
      if (s.else_body.empty()) {
        cond_edge(k, Polarity::Else, from, join, c);
      } else {
        NodeId head = node();
        cond_edge(k, Polarity::Else, from, head, c);
        seq(s.else_body, head, join);
      }
      return join;
    }
    case Stmt::Kind::While: {
      EdgeStmt c = cond_stmt(*s.cond);
      int k = cond_number();
      if (s.then_body.empty()) {
        cond_edge(k, Polarity::Then, from, from, c);
      } else {
        NodeId body = node();
        cond_edge(k, Polarity::Then, from, body, c);
        seq(s.then_body, body, from);
      }
      NodeId exit = to == kNoNode ? node() : to;
      cond_edge(k, Polarity::Else, from, exit, c);
      return exit;
    }
    default: {
      NodeId next = to == kNoNode ? node() : to;
      edge(from, next, simple(s));
      return next;
    }
    }
  }

  static EdgeStmt cond_stmt(const BoolExpr& b) {
    EdgeStmt c;
    c.kind = EdgeStmt::Kind::Cond;
    c.uses = vars_of(b);
    c.text = pretty(b);
    return c;
  }

  static EdgeStmt simple(const Stmt& s) {
    EdgeStmt e;
    switch (s.kind) {
    case Stmt::Kind::Assign:
      e.kind = EdgeStmt::Kind::Assign;
      e.target = s.target;
      e.uses = vars_of(*s.expr);
      e.text = s.target + " := " + pretty(*s.expr);
      break;
    case Stmt::Kind::Print: {
      e.kind = EdgeStmt::Kind::Print;
      std::set<std::string> uses;
      e.text = "print(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        collect(*s.args[i], uses);
        e.text += (i ? ", " : "") + pretty(*s.args[i]);
      }
      e.text += ")";
      e.uses.assign(uses.begin(), uses.end());
      break;
    }
    case Stmt::Kind::Decl:
      e.kind = EdgeStmt::Kind::Skip;
      e.text = "int ";
      for (std::size_t i = 0; i < s.names.size(); ++i) e.text += (i ? ", " : "") + s.names[i];
      break;
    default:
      e.kind = EdgeStmt::Kind::Skip;
      e.text = "skip";
    }
    return e;
  }

private:
  Cfg& g_;
  int nodes_ = 0;
  int edges_ = 0;
};

} // namespace

bool equal(const ArithExpr& a, const ArithExpr& b) {
  return a.kind == b.kind && a.value == b.value && a.name == b.name && equal_ptr(a.lhs, b.lhs) &&
         equal_ptr(a.rhs, b.rhs);
}

bool equal(const BoolExpr& a, const BoolExpr& b) {
  return a.kind == b.kind && (a.kind != BoolExpr::Kind::Cmp || a.op == b.op) &&
         equal_ptr(a.alhs, b.alhs) && equal_ptr(a.arhs, b.arhs) && equal_ptr(a.blhs, b.blhs) &&
         equal_ptr(a.brhs, b.brhs);
}

bool equal(const Program& a, const Program& b) {
  if (a.function != b.function || a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || a.params[i].secret != b.params[i].secret)
      return false;
  return a.declared == b.declared && a.secrets == b.secrets && equal(a.body, b.body);
}

std::string pretty(const ArithExpr& e) { return print(e, 0); }
std::string pretty(const BoolExpr& e) { return print(e, 0); }

std::vector<std::string> vars_of(const ArithExpr& e) {
  std::set<std::string> s;
  collect(e, s);
  return {s.begin(), s.end()};
}

std::vector<std::string> vars_of(const BoolExpr& e) {
  std::set<std::string> s;
  collect(e, s);
  return {s.begin(), s.end()};
}

Program parse_program(std::string_view source) {
  return Parser(lex(source), true).program();
}

EdgeStmt parse_edge_stmt(std::string_view text, bool condition) {
  return Parser(lex(text), false).edge_stmt(condition);
}

std::string pretty(const Program& p) {
  std::string out;
  if (p.function) {
    out += "fn " + *p.function + "(";
    for (std::size_t i = 0; i < p.params.size(); ++i)
      out += (i ? ", " : "") + std::string(p.params[i].secret ? "secret " : "") + p.params[i].name;
    out += ") {\n";
    print_block(p.body, 1, out);
    out += "}\n";
  } else {
    print_block(p.body, 0, out);
  }
  return out;
}

Cfg lower_to_cfg(const Program& p) {
  Cfg g;
  for (const auto& v : p.declared) g.intern(v);
  for (const auto& s : p.secrets) g.add_secret(s);
  Lowering low(g);
  NodeId entry = low.node();
  g.set_entry(entry);
  if (p.body.empty()) return g;
  NodeId cur = entry;
  for (std::size_t i = 0; i < p.body.size(); ++i) cur = low.stmt(p.body[i], cur, kNoNode);
  return g;
}

} // namespace apa::lang
