// Copyright 2026 The jmlbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "jmlbench/lang/parser.hpp"

#include <climits>
#include <set>
#include <string>
#include <vector>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/lexer.hpp"
#include "jmlbench/lang/scope.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::lang {
namespace {

const std::set<std::string>& unsupported_keywords() {
  static const std::set<std::string> kw = {
      "new",    "null",   "this",     "super",  "break",   "continue", "do",
      "switch", "case",   "try",      "catch",  "throw",   "throws",   "char",
      "long",   "double", "float",    "byte",   "short",   "import",   "package",
      "final",  "interface", "extends", "implements", "instanceof", "synchronized",
  };
  return kw;
}

struct PendingSpecs {
  std::vector<Token> spec_lines;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, bool spec) : toks_(std::move(tokens)), spec_(spec) {}

  SourceUnit unit() {
    SourceUnit u;
    u.name = "Main";
    bool wrapped = false;
    skip_modifiers();
    if (peek().ident("class")) {
      next();
      u.name = expect_ident("class name");
      expect("{");
      wrapped = true;
    }
    while (true) {
      std::vector<Token> specs = take_spec_lines();
      if (wrapped && peek().punct("}")) {
        if (!specs.empty()) dangling(specs.front());
        next();
        break;
      }
      if (peek().kind == Tok::kEnd) {
        if (!specs.empty()) dangling(specs.front());
        if (wrapped) error(peek(), "expected '}' at end of class");
        break;
      }
      method(u, specs);
    }
    if (peek().kind == Tok::kSpecLine) dangling(peek());
    if (peek().kind != Tok::kEnd) error(peek(), "unexpected text after class body");
    return u;
  }

  Expr expression_only() {
    Expr e = expr();
    if (peek().punct(";")) next();
    if (peek().kind != Tok::kEnd) error(peek(), "unexpected token '" + peek().text + "'");
    return e;
  }

  // Parses `kind expr ;` clauses until the tokens run out.
  std::vector<SpecClause> clauses() {
    std::vector<SpecClause> out;
    while (peek().kind != Tok::kEnd) {
      const Token& kw = next();
      SpecClause c;
      c.line = kw.line;
      if (kw.ident("requires") || kw.ident("pre")) {
        c.kind = SpecKind::kRequires;
      } else if (kw.ident("ensures") || kw.ident("post")) {
        c.kind = SpecKind::kEnsures;
      } else if (kw.ident("loop_invariant") || kw.ident("maintaining")) {
        c.kind = SpecKind::kLoopInvariant;
      } else if (kw.kind == Tok::kIdent) {
        throw UnsupportedFeature(kw.line, "specification clause '" + kw.text + "'");
      } else {
        error(kw, "expected a specification clause keyword");
      }
      c.expr = expr();
      if (peek().kind == Tok::kEnd && out.empty() && single_clause_) {
        // a lone clause may omit its semicolon
      } else {
        expect(";");
      }
      out.push_back(std::move(c));
    }
    return out;
  }

  void set_single_clause() { single_clause_ = true; }

 private:
  // ---- token helpers ------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[noreturn]] void error(const Token& t, const std::string& msg) const {
    throw SyntaxError(t.line, t.col, msg);
  }
  [[noreturn]] void dangling(const Token& t) const {
    error(t, "specification comment must directly precede a method or loop header");
  }
  void expect(std::string_view p) {
    if (!peek().punct(p)) {
      error(peek(), "expected '" + std::string(p) + "' but found '" +
                        (peek().kind == Tok::kEnd ? std::string("end of input") : peek().text) + "'");
    }
    next();
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::kIdent) error(peek(), std::string("expected ") + what);
    check_keyword(peek());
    return next().text;
  }
  void check_keyword(const Token& t) const {
    if (t.kind == Tok::kIdent && unsupported_keywords().count(t.text)) {
      throw UnsupportedFeature(t.line, t.text);
    }
  }
  void skip_modifiers() {
    while (peek().ident("public") || peek().ident("private") || peek().ident("protected") ||
           peek().ident("static")) {
      next();
    }
    check_keyword(peek());
  }

  std::vector<Token> take_spec_lines() {
    std::vector<Token> out;
    while (peek().kind == Tok::kSpecLine) out.push_back(next());
    return out;
  }

  // ---- types --------------------------------------------------------------

  bool at_type() const {
    const Token& t = peek();
    if (t.ident("int") || t.ident("boolean") || t.ident("String")) return true;
    if (t.ident("void")) return true;
    return false;
  }

  TypeTag type() {
    const Token& t = next();
    check_keyword(t);
    if (t.ident("int")) {
      if (peek().punct("[")) {
        next();
        expect("]");
        if (peek().punct("[")) throw UnsupportedFeature(t.line, "multi-dimensional array");
        return TypeTag::kIntArray;
      }
      return TypeTag::kInt;
    }
    if (t.ident("boolean")) {
      if (peek().punct("[")) throw UnsupportedFeature(t.line, "boolean[]");
      return TypeTag::kBool;
    }
    if (t.ident("String")) {
      if (peek().punct("[")) throw UnsupportedFeature(t.line, "String[]");
      return TypeTag::kString;
    }
    if (t.ident("void")) return TypeTag::kVoid;
    if (t.ident("Integer") || t.ident("Object") || t.ident("List")) {
      throw UnsupportedFeature(t.line, "type " + t.text);
    }
    error(t, "expected a type");
  }

  // ---- methods ------------------------------------------------------------

  void method(SourceUnit& u, const std::vector<Token>& spec_lines) {
    skip_modifiers();
    if (peek().ident("class")) throw UnsupportedFeature(peek().line, "nested class");
    const int line = peek().line;
    Method m;
    m.line = line;
    if (!at_type()) error(peek(), "expected a method declaration");
    m.return_type = type();
    m.name = expect_ident("method name");
    if (u.find_method(m.name)) error(toks_[pos_ - 1], "duplicate method '" + m.name + "'");
    expect("(");
    if (!peek().punct(")")) {
      while (true) {
        if (!at_type() || peek().ident("void")) error(peek(), "expected a parameter type");
        Param p;
        p.type = type();
        p.name = expect_ident("parameter name");
        m.params.push_back(p);
        if (peek().punct(",")) {
          next();
          continue;
        }
        break;
      }
    }
    expect(")");
    if (peek().ident("throws")) throw UnsupportedFeature(peek().line, "throws");
    loop_counter_ = 0;
    method_name_ = m.name;
    for (SpecClause& c : spec_clauses(spec_lines)) {
      if (c.kind == SpecKind::kLoopInvariant) {
        throw SyntaxError(c.line, 1, "loop_invariant must precede a loop header");
      }
      c.anchor = Anchor{m.name, -1};
      method_specs_.push_back(std::move(c));
    }
    m.body = block();
    // Method clauses come first in printed order, then loop clauses in loop order.
    for (auto& c : method_specs_) u.specs.push_back(std::move(c));
    for (auto& c : loop_specs_) u.specs.push_back(std::move(c));
    method_specs_.clear();
    loop_specs_.clear();
    u.methods.push_back(std::move(m));
  }

  std::vector<SpecClause> spec_clauses(const std::vector<Token>& lines) {
    if (lines.empty()) return {};
    std::vector<Token> toks;
    for (const Token& l : lines) {
      auto part = tokenize(l.text, l.line, l.col);
      part.pop_back();  // kEnd
      for (auto& t : part) {
        if (t.kind == Tok::kSpecLine) error(t, "nested specification comment");
        toks.push_back(std::move(t));
      }
    }
    Token end;
    end.kind = Tok::kEnd;
    end.line = lines.back().line;
    end.col = static_cast<int>(lines.back().text.size()) + lines.back().col;
    toks.push_back(end);
    Parser sub(std::move(toks), true);
    return sub.clauses();
  }

  // ---- statements ---------------------------------------------------------

  Block block() {
    expect("{");
    Block b;
    while (true) {
      std::vector<Token> specs = take_spec_lines();
      if (peek().punct("}")) {
        if (!specs.empty()) dangling(specs.front());
        next();
        return b;
      }
      if (peek().kind == Tok::kEnd) error(peek(), "expected '}'");
      b.stmts.push_back(statement(specs));
    }
  }

  // Body of if/while/for: a block, or a single statement wrapped in one.
  Block body() {
    if (peek().punct("{")) return block();
    if (peek().kind == Tok::kSpecLine) {
      Block b;
      std::vector<Token> specs = take_spec_lines();
      b.stmts.push_back(statement(specs));
      return b;
    }
    Block b;
    b.stmts.push_back(statement({}));
    return b;
  }

  void attach_loop_specs(const std::vector<Token>& specs, int loop_id) {
    for (SpecClause& c : spec_clauses(specs)) {
      if (c.kind != SpecKind::kLoopInvariant) {
        throw SyntaxError(c.line, 1, std::string(spec_keyword(c.kind)) + " must precede a method header");
      }
      c.anchor = Anchor{method_name_, loop_id};
      loop_specs_.push_back(std::move(c));
    }
  }

  Stmt statement(const std::vector<Token>& specs) {
    const Token& t = peek();
    check_keyword(t);
    Stmt s;
    s.line = t.line;
    const bool is_loop = t.ident("while") || t.ident("for");
    if (!specs.empty() && !is_loop) dangling(specs.front());

    if (t.punct("{")) {
      s.node = block();
      return s;
    }
    if (t.ident("if")) {
      next();
      expect("(");
      If i{expr(), {}, std::nullopt};
      expect(")");
      i.then_block = body();
      if (peek().ident("else")) {
        next();
        if (peek().ident("if")) {
          i.else_branch = Box<Stmt>(statement({}));
        } else {
          const int else_line = peek().line;
          Stmt e;
          e.line = else_line;
          e.node = body();
          i.else_branch = Box<Stmt>(std::move(e));
        }
      }
      s.node = std::move(i);
      return s;
    }
    if (t.ident("while")) {
      next();
      const int id = loop_counter_++;
      attach_loop_specs(specs, id);
      expect("(");
      While w{expr(), {}, id};
      expect(")");
      w.body = body();
      s.node = std::move(w);
      return s;
    }
    if (t.ident("for")) {
      next();
      const int id = loop_counter_++;
      attach_loop_specs(specs, id);
      expect("(");
      For f;
      f.loop_id = id;
      if (!peek().punct(";")) {
        const int l = peek().line;
        Stmt init;
        init.line = l;
        if (at_type()) {
          init.node = var_decl();
        } else {
          init.node = assignment();
        }
        f.init = Box<Stmt>(std::move(init));
      }
      expect(";");
      if (!peek().punct(";")) f.cond = expr();
      expect(";");
      if (!peek().punct(")")) {
        Stmt upd;
        upd.line = peek().line;
        upd.node = assignment();
        f.update = Box<Stmt>(std::move(upd));
      }
      expect(")");
      f.body = body();
      s.node = std::move(f);
      return s;
    }
    if (t.ident("return")) {
      next();
      Return r;
      if (!peek().punct(";")) r.value = expr();
      expect(";");
      s.node = std::move(r);
      return s;
    }
    if (t.ident("else")) error(t, "'else' without 'if'");
    if (at_type()) {
      if (t.ident("void")) error(t, "unexpected 'void'");
      s.node = var_decl();
      expect(";");
      return s;
    }
    if (t.kind == Tok::kIdent || t.punct("++") || t.punct("--")) {
      s.node = assignment();
      expect(";");
      return s;
    }
    error(t, "expected a statement");
  }

  VarDecl var_decl() {
    VarDecl d;
    d.type = type();
    d.name = expect_ident("variable name");
    if (peek().punct("=")) {
      next();
      d.init = expr();
    }
    if (peek().punct(",")) throw UnsupportedFeature(peek().line, "multiple declarators");
    return d;
  }

  Assign assignment() {
    Assign a;
    if (peek().punct("++") || peek().punct("--")) {
      a.op = next().text == "++" ? AssignOp::kInc : AssignOp::kDec;
      a.target = lvalue();
      return a;
    }
    a.target = lvalue();
    const Token& op = next();
    if (op.punct("=")) {
      a.op = AssignOp::kSet;
    } else if (op.punct("+=")) {
      a.op = AssignOp::kAdd;
    } else if (op.punct("-=")) {
      a.op = AssignOp::kSub;
    } else if (op.punct("*=")) {
      a.op = AssignOp::kMul;
    } else if (op.punct("/=")) {
      a.op = AssignOp::kDiv;
    } else if (op.punct("%=")) {
      a.op = AssignOp::kMod;
    } else if (op.punct("++")) {
      a.op = AssignOp::kInc;
      return a;
    } else if (op.punct("--")) {
      a.op = AssignOp::kDec;
      return a;
    } else if (op.punct("(")) {
      throw UnsupportedFeature(op.line, "expression statement");
    } else {
      error(op, "expected an assignment operator");
    }
    a.value = expr();
    return a;
  }

  LValue lvalue() {
    LValue lv;
    lv.name = expect_ident("variable name");
    if (peek().punct("[")) {
      next();
      lv.index = expr();
      expect("]");
    }
    if (peek().punct(".")) throw UnsupportedFeature(peek().line, "field assignment");
    return lv;
  }

  // ---- expressions --------------------------------------------------------

  Expr expr() {
    if (spec_ && peek().kind == Tok::kBackslash && (peek().text == "forall" || peek().text == "exists")) {
      return quantifier();
    }
    return iff();
  }

  Expr quantifier() {
    const Token& kw = next();
    Quant q;
    q.kind = kw.text == "forall" ? QuantKind::kForall : QuantKind::kExists;
    if (!peek().ident("int")) {
      if (peek().kind == Tok::kIdent) throw UnsupportedFeature(peek().line, "quantifier over " + peek().text);
      error(peek(), "expected 'int' after quantifier");
    }
    next();
    if (peek().punct("[")) throw UnsupportedFeature(peek().line, "quantifier over int[]");
    q.binder = expect_ident("quantifier variable");
    if (peek().punct(",")) throw UnsupportedFeature(peek().line, "multiple quantifier variables");
    expect(";");
    q.range = expr();
    expect(";");
    q.body = expr();
    bool masked = false;
    visit(*q.range, [&](const Expr& e) { masked = masked || e.is<Mask>(); });
    // A range with a placeholder is checked once it is filled.
    if (!masked && !extract_bounds(*q.range, q.binder)) {
      throw UnboundedQuantifier("quantifier range for '" + q.binder + "' at line " +
                                std::to_string(kw.line) + " does not bound it to a finite interval");
    }
    return Expr{std::move(q)};
  }

  Expr iff() {
    Expr l = implies();
    while (spec_ && peek().punct("<==>")) {
      next();
      l = make_binary(BinaryOp::kIff, std::move(l), implies());
    }
    return l;
  }

  Expr implies() {
    Expr l = disjunction();
    if (spec_ && peek().punct("==>")) {
      next();
      return make_binary(BinaryOp::kImplies, std::move(l), implies());
    }
    return l;
  }

  Expr disjunction() {
    Expr l = conjunction();
    while (peek().punct("||")) {
      next();
      l = make_binary(BinaryOp::kOr, std::move(l), conjunction());
    }
    return l;
  }

  Expr conjunction() {
    Expr l = equality();
    while (peek().punct("&&")) {
      next();
      l = make_binary(BinaryOp::kAnd, std::move(l), equality());
    }
    return l;
  }

  Expr equality() {
    Expr l = relational();
    while (peek().punct("==") || peek().punct("!=")) {
      const BinaryOp op = next().text == "==" ? BinaryOp::kEq : BinaryOp::kNe;
      l = make_binary(op, std::move(l), relational());
    }
    return l;
  }

  Expr relational() {
    Expr l = additive();
    while (true) {
      BinaryOp op;
      if (peek().punct("<")) {
        op = BinaryOp::kLt;
      } else if (peek().punct("<=")) {
        op = BinaryOp::kLe;
      } else if (peek().punct(">")) {
        op = BinaryOp::kGt;
      } else if (peek().punct(">=")) {
        op = BinaryOp::kGe;
      } else {
        return l;
      }
      next();
      l = make_binary(op, std::move(l), additive());
    }
  }

  Expr additive() {
    Expr l = multiplicative();
    while (peek().punct("+") || peek().punct("-")) {
      const BinaryOp op = next().text == "+" ? BinaryOp::kAdd : BinaryOp::kSub;
      l = make_binary(op, std::move(l), multiplicative());
    }
    return l;
  }

  Expr multiplicative() {
    Expr l = unary();
    while (peek().punct("*") || peek().punct("/") || peek().punct("%")) {
      const std::string t = next().text;
      const BinaryOp op = t == "*" ? BinaryOp::kMul : t == "/" ? BinaryOp::kDiv : BinaryOp::kMod;
      l = make_binary(op, std::move(l), unary());
    }
    return l;
  }

  Expr unary() {
    if (peek().punct("-")) {
      next();
      return make_unary(UnaryOp::kNeg, unary());
    }
    if (peek().punct("!")) {
      next();
      return make_unary(UnaryOp::kNot, unary());
    }
    if (peek().punct("+")) {
      next();
      return unary();
    }
    if (peek().punct("++") || peek().punct("--")) throw UnsupportedFeature(peek().line, "increment expression");
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (true) {
      if (peek().punct("[")) {
        next();
        Expr idx = expr();
        expect("]");
        e = Expr{ArrayIndex{std::move(e), std::move(idx)}};
      } else if (peek().punct(".")) {
        next();
        const Token& member = next();
        if (member.ident("length")) {
          if (peek().punct("(")) {
            next();
            expect(")");
            e = Expr{Length{std::move(e), true}};
          } else {
            e = Expr{Length{std::move(e), false}};
          }
        } else if (member.ident("charAt")) {
          expect("(");
          Expr idx = expr();
          expect(")");
          e = Expr{CharAt{std::move(e), std::move(idx)}};
        } else if (member.kind == Tok::kIdent) {
          throw UnsupportedFeature(member.line, "member '" + member.text + "'");
        } else {
          error(member, "expected a member name");
        }
      } else if (peek().punct("++") || peek().punct("--")) {
        throw UnsupportedFeature(peek().line, "increment expression");
      } else {
        return e;
      }
    }
  }

  std::vector<Expr> call_args() {
    expect("(");
    std::vector<Expr> args;
    if (!peek().punct(")")) {
      while (true) {
        args.push_back(expr());
        if (peek().punct(",")) {
          next();
          continue;
        }
        break;
      }
    }
    expect(")");
    return args;
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::kIntLit) {
      next();
      const long long v = t.text.size() > 10 ? LLONG_MAX : std::stoll(t.text);
      if (v > INT_MAX) error(t, "integer literal out of range");
      return make_int(static_cast<std::int32_t>(v));
    }
    if (t.kind == Tok::kStringLit) {
      next();
      return Expr{StringLit{t.text}};
    }
    if (t.kind == Tok::kMask) {
      if (!spec_) error(t, "<MASK> outside a specification");
      next();
      if (peek().punct("(")) return Expr{Call{"<MASK>", call_args()}};
      return Expr{Mask{}};
    }
    if (t.kind == Tok::kBackslash) {
      if (!spec_) error(t, "\\" + t.text + " outside a specification");
      if (t.text == "result") {
        next();
        return Expr{Result{}};
      }
      if (t.text == "old") {
        next();
        expect("(");
        Expr inner = expr();
        expect(")");
        return Expr{Old{std::move(inner)}};
      }
      error(t, "quantifier must be parenthesized");
    }
    if (t.punct("(")) {
      next();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.ident("true") || t.ident("false")) {
      next();
      return make_bool(t.text == "true");
    }
    if (t.ident("Integer")) {
      next();
      expect(".");
      const Token& f = next();
      if (f.ident("MAX_VALUE")) return make_int(INT_MAX);
      if (f.ident("MIN_VALUE")) return make_int(INT_MIN);
      throw UnsupportedFeature(f.line, "Integer." + f.text);
    }
    if (t.ident("Math") || t.ident("System")) throw UnsupportedFeature(t.line, t.text + " library");
    if (t.kind == Tok::kIdent) {
      check_keyword(t);
      next();
      if (peek().punct("(")) return Expr{Call{t.text, call_args()}};
      return make_var(t.text);
    }
    if (t.kind == Tok::kEnd) error(t, "unexpected end of input");
    error(t, "unexpected token '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool spec_;
  bool single_clause_ = false;
  int loop_counter_ = 0;
  std::string method_name_;
  std::vector<SpecClause> method_specs_;
  std::vector<SpecClause> loop_specs_;
};

}  // namespace

SourceUnit parse_unit(std::string_view text) {
  Parser p(tokenize(text), false);
  return p.unit();
}

Expr parse_expression(std::string_view text, bool spec) {
  Parser p(tokenize(text), spec);
  return p.expression_only();
}

SpecClause parse_clause(std::string_view text) {
  Parser p(tokenize(text), true);
  p.set_single_clause();
  auto cs = p.clauses();
  if (cs.size() != 1) throw SyntaxError(1, 1, "expected exactly one specification clause");
  return std::move(cs.front());
}

SourceUnit load_unit(std::string_view text) {
  SourceUnit u = parse_unit(text);
  check_unit(u);
  return u;
}

}  // namespace jmlbench::lang
