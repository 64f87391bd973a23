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

#include "jmlbench/lang/printer.hpp"

#include <climits>
#include <map>
#include <sstream>

#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/scope.hpp"

namespace jmlbench::lang {
namespace {

// Binding strength; larger binds tighter.
int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::kIff: return 1;
    case BinaryOp::kImplies: return 2;
    case BinaryOp::kOr: return 3;
    case BinaryOp::kAnd: return 4;
    case BinaryOp::kEq:
    case BinaryOp::kNe: return 5;
    case BinaryOp::kLt:
    case BinaryOp::kLe:
    case BinaryOp::kGt:
    case BinaryOp::kGe: return 6;
    case BinaryOp::kAdd:
    case BinaryOp::kSub: return 7;
    case BinaryOp::kMul:
    case BinaryOp::kDiv:
    case BinaryOp::kMod: return 8;
  }
  return 0;
}

constexpr int kUnaryPrec = 9;
constexpr int kAtomPrec = 10;

int precedence(const Expr& e) {
  if (e.is<Binary>()) return precedence(e.as<Binary>().op);
  if (e.is<Unary>()) return kUnaryPrec;
  return kAtomPrec;
}

std::string escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string wrap(const Expr& e, bool parens) {
  return parens ? "(" + print_expr(e) + ")" : print_expr(e);
}

std::string print_type(TypeTag t) { return type_name(t); }

class UnitPrinter {
 public:
  UnitPrinter(const SourceUnit& unit, std::vector<std::size_t>* order) : unit_(unit), order_(order) {}

  std::string run() {
    out_ << "class " << unit_.name << " {\n";
    bool first = true;
    for (const auto& m : unit_.methods) {
      if (!first) out_ << "\n";
      first = false;
      method(m);
    }
    out_ << "}\n";
    return out_.str();
  }

 private:
  void indent() {
    for (int i = 0; i < depth_; ++i) out_ << "    ";
  }

  void clauses(const Anchor& a) {
    for (std::size_t i = 0; i < unit_.specs.size(); ++i) {
      const auto& c = unit_.specs[i];
      if (!(c.anchor == a)) continue;
      indent();
      out_ << "//@ " << print_clause(c) << "\n";
      if (order_) order_->push_back(i);
    }
  }

  void method(const Method& m) {
    method_ = m.name;
    depth_ = 1;
    clauses(Anchor{m.name, -1});
    indent();
    out_ << "public static " << print_type(m.return_type) << " " << m.name << "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) out_ << ", ";
      out_ << print_type(m.params[i].type) << " " << m.params[i].name;
    }
    out_ << ") {\n";
    ++depth_;
    for (const auto& s : m.body.stmts) stmt(s);
    --depth_;
    indent();
    out_ << "}\n";
  }

  std::string simple(const Stmt& s) {
    if (s.is<VarDecl>()) {
      const auto& d = s.as<VarDecl>();
      std::string r = print_type(d.type) + " " + d.name;
      if (d.init) r += " = " + print_expr(*d.init);
      return r;
    }
    const auto& a = s.as<Assign>();
    std::string lv = a.target.name;
    if (a.target.index) lv += "[" + print_expr(*a.target.index) + "]";
    switch (a.op) {
      case AssignOp::kSet: return lv + " = " + print_expr(*a.value);
      case AssignOp::kAdd: return lv + " += " + print_expr(*a.value);
      case AssignOp::kSub: return lv + " -= " + print_expr(*a.value);
      case AssignOp::kMul: return lv + " *= " + print_expr(*a.value);
      case AssignOp::kDiv: return lv + " /= " + print_expr(*a.value);
      case AssignOp::kMod: return lv + " %= " + print_expr(*a.value);
      case AssignOp::kInc: return lv + "++";
      case AssignOp::kDec: return lv + "--";
    }
    return lv;
  }

  void body_lines(const Block& b) {
    ++depth_;
    for (const auto& s : b.stmts) stmt(s);
    --depth_;
  }

  void if_chain(const If& i) {
    out_ << "if (" << print_expr(i.cond) << ") {\n";
    body_lines(i.then_block);
    indent();
    out_ << "}";
    if (i.else_branch) {
      const Stmt& e = **i.else_branch;
      if (e.is<If>()) {
        out_ << " else ";
        if_chain(e.as<If>());
        return;
      }
      out_ << " else {\n";
      body_lines(e.as<Block>());
      indent();
      out_ << "}";
    }
  }

  void stmt(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, VarDecl> || std::is_same_v<T, Assign>) {
            indent();
            out_ << simple(s) << ";\n";
          } else if constexpr (std::is_same_v<T, If>) {
            indent();
            if_chain(n);
            out_ << "\n";
          } else if constexpr (std::is_same_v<T, While>) {
            clauses(Anchor{method_, n.loop_id});
            indent();
            out_ << "while (" << print_expr(n.cond) << ") {\n";
            body_lines(n.body);
            indent();
            out_ << "}\n";
          } else if constexpr (std::is_same_v<T, For>) {
            clauses(Anchor{method_, n.loop_id});
            indent();
            out_ << "for (";
            if (n.init) out_ << simple(**n.init);
            out_ << ";";
            if (n.cond) out_ << " " << print_expr(*n.cond);
            out_ << ";";
            if (n.update) out_ << " " << simple(**n.update);
            out_ << ") {\n";
            body_lines(n.body);
            indent();
            out_ << "}\n";
          } else if constexpr (std::is_same_v<T, Return>) {
            indent();
            if (n.value) {
              out_ << "return " << print_expr(*n.value) << ";\n";
            } else {
              out_ << "return;\n";
            }
          } else if constexpr (std::is_same_v<T, Block>) {
            indent();
            out_ << "{\n";
            body_lines(n);
            indent();
            out_ << "}\n";
          }
        },
        s.node);
  }

  const SourceUnit& unit_;
  std::vector<std::size_t>* order_;
  std::ostringstream out_;
  std::string method_;
  int depth_ = 0;
};

}  // namespace

std::string print_expr(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          if (n.value == INT_MAX) return "Integer.MAX_VALUE";
          if (n.value == INT_MIN) return "Integer.MIN_VALUE";
          if (n.value < 0) return "(" + std::to_string(n.value) + ")";
          return std::to_string(n.value);
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return n.value ? "true" : "false";
        } else if constexpr (std::is_same_v<T, StringLit>) {
          return escape(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, ArrayIndex>) {
          return wrap(*n.base, precedence(*n.base) < kAtomPrec) + "[" + print_expr(*n.index) + "]";
        } else if constexpr (std::is_same_v<T, Length>) {
          return wrap(*n.base, precedence(*n.base) < kAtomPrec) + (n.call_syntax ? ".length()" : ".length");
        } else if constexpr (std::is_same_v<T, CharAt>) {
          return wrap(*n.base, precedence(*n.base) < kAtomPrec) + ".charAt(" + print_expr(*n.index) + ")";
        } else if constexpr (std::is_same_v<T, Unary>) {
          // Nested unary operands are parenthesized so `- -x` never prints as `--x`.
          const bool parens = precedence(*n.operand) <= kUnaryPrec;
          return std::string(op_text(n.op)) + wrap(*n.operand, parens);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = precedence(n.op);
          const bool right_assoc = n.op == BinaryOp::kImplies;
          const int lp = precedence(*n.lhs);
          const int rp = precedence(*n.rhs);
          const bool lparen = lp < p || (lp == p && right_assoc);
          const bool rparen = rp < p || (rp == p && !right_assoc);
          return wrap(*n.lhs, lparen) + " " + op_text(n.op) + " " + wrap(*n.rhs, rparen);
        } else if constexpr (std::is_same_v<T, Call>) {
          std::string r = n.method + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) r += ", ";
            r += print_expr(n.args[i]);
          }
          return r + ")";
        } else if constexpr (std::is_same_v<T, Result>) {
          return "\\result";
        } else if constexpr (std::is_same_v<T, Old>) {
          return "\\old(" + print_expr(*n.inner) + ")";
        } else if constexpr (std::is_same_v<T, Quant>) {
          return std::string("(") + (n.kind == QuantKind::kForall ? "\\forall" : "\\exists") + " int " +
                 n.binder + "; " + print_expr(*n.range) + "; " + print_expr(*n.body) + ")";
        } else {
          return "<MASK>";
        }
      },
      e.node);
}

std::string print_clause(const SpecClause& c) {
  return std::string(spec_keyword(c.kind)) + " " + print_expr(c.expr) + ";";
}

std::string print_unit(const SourceUnit& unit, std::vector<std::size_t>* clause_order) {
  return UnitPrinter(unit, clause_order).run();
}

SourceUnit canonicalize(const SourceUnit& unit, std::vector<std::size_t>* clause_order) {
  return load_unit(print_unit(unit, clause_order));
}

}  // namespace jmlbench::lang
