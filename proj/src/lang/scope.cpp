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

#include "jmlbench/lang/scope.hpp"

#include <functional>
#include <optional>
#include <set>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::lang {

std::vector<const VarInfo*> SymbolTable::lookup(const std::string& method, const std::string& name) const {
  std::vector<const VarInfo*> out;
  for (const auto& v : vars) {
    if (v.method == method && v.name == name) out.push_back(&v);
  }
  return out;
}

TypeTag SymbolTable::type_at(const Anchor& anchor, const std::string& name) const {
  auto it = visible.find(anchor);
  if (it == visible.end()) throw ScopeError("unknown anchor " + anchor.to_string());
  for (const auto& p : it->second) {
    if (p.name == name) return p.type;
  }
  throw ScopeError("'" + name + "' is not visible at " + anchor.to_string());
}

namespace {

using Lookup = std::function<std::optional<TypeTag>(const std::string&)>;

// Context for typing one expression.
struct ExprContext {
  Lookup lookup;
  const std::map<std::string, MethodSig>* methods;
  bool spec = false;
  std::optional<SpecKind> kind;
  TypeTag return_type = TypeTag::kVoid;
  std::string where;
};

[[noreturn]] void type_error(const ExprContext& cx, const std::string& msg) {
  throw TypeError(cx.where + ": " + msg);
}

void expect_type(const ExprContext& cx, TypeTag got, TypeTag want, const Expr& e) {
  if (got != want) {
    type_error(cx, "expected " + type_name(want) + " but '" + print_expr(e) + "' has type " + type_name(got));
  }
}

TypeTag type_of(const Expr& e, const ExprContext& cx, std::vector<std::string>& binders);

TypeTag type_of(const Expr& e, const ExprContext& cx, std::vector<std::string>& binders) {
  return std::visit(
      [&](const auto& n) -> TypeTag {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          return TypeTag::kInt;
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return TypeTag::kBool;
        } else if constexpr (std::is_same_v<T, StringLit>) {
          return TypeTag::kString;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          for (const auto& b : binders) {
            if (b == n.name) return TypeTag::kInt;
          }
          auto t = cx.lookup(n.name);
          if (!t) throw ScopeError(cx.where + ": unknown identifier '" + n.name + "'");
          return *t;
        } else if constexpr (std::is_same_v<T, ArrayIndex>) {
          expect_type(cx, type_of(*n.base, cx, binders), TypeTag::kIntArray, *n.base);
          expect_type(cx, type_of(*n.index, cx, binders), TypeTag::kInt, *n.index);
          return TypeTag::kInt;
        } else if constexpr (std::is_same_v<T, Length>) {
          const TypeTag bt = type_of(*n.base, cx, binders);
          if (n.call_syntax) {
            expect_type(cx, bt, TypeTag::kString, *n.base);
          } else {
            expect_type(cx, bt, TypeTag::kIntArray, *n.base);
          }
          return TypeTag::kInt;
        } else if constexpr (std::is_same_v<T, CharAt>) {
          expect_type(cx, type_of(*n.base, cx, binders), TypeTag::kString, *n.base);
          expect_type(cx, type_of(*n.index, cx, binders), TypeTag::kInt, *n.index);
          return TypeTag::kInt;
        } else if constexpr (std::is_same_v<T, Unary>) {
          const TypeTag want = n.op == UnaryOp::kNeg ? TypeTag::kInt : TypeTag::kBool;
          expect_type(cx, type_of(*n.operand, cx, binders), want, *n.operand);
          return want;
        } else if constexpr (std::is_same_v<T, Binary>) {
          const TypeTag l = type_of(*n.lhs, cx, binders);
          const TypeTag r = type_of(*n.rhs, cx, binders);
          if (is_arithmetic(n.op)) {
            expect_type(cx, l, TypeTag::kInt, *n.lhs);
            expect_type(cx, r, TypeTag::kInt, *n.rhs);
            return TypeTag::kInt;
          }
          if (n.op == BinaryOp::kEq || n.op == BinaryOp::kNe) {
            if (l != r || (l != TypeTag::kInt && l != TypeTag::kBool)) {
              type_error(cx, "cannot compare " + type_name(l) + " with " + type_name(r) + " in '" +
                                 print_expr(e) + "'");
            }
            return TypeTag::kBool;
          }
          if (is_relational(n.op)) {
            expect_type(cx, l, TypeTag::kInt, *n.lhs);
            expect_type(cx, r, TypeTag::kInt, *n.rhs);
            return TypeTag::kBool;
          }
          expect_type(cx, l, TypeTag::kBool, *n.lhs);
          expect_type(cx, r, TypeTag::kBool, *n.rhs);
          return TypeTag::kBool;
        } else if constexpr (std::is_same_v<T, Call>) {
          auto it = cx.methods->find(n.method);
          if (it == cx.methods->end()) throw ScopeError(cx.where + ": unknown method '" + n.method + "'");
          const MethodSig& sig = it->second;
          if (sig.params.size() != n.args.size()) {
            type_error(cx, "wrong number of arguments to '" + n.method + "'");
          }
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            expect_type(cx, type_of(n.args[i], cx, binders), sig.params[i].type, n.args[i]);
          }
          if (sig.return_type == TypeTag::kVoid) {
            type_error(cx, "void method '" + n.method + "' used as a value");
          }
          return sig.return_type;
        } else if constexpr (std::is_same_v<T, Result>) {
          if (!cx.spec || cx.kind != SpecKind::kEnsures) type_error(cx, "\\result is only allowed in ensures");
          if (cx.return_type == TypeTag::kVoid) type_error(cx, "\\result in a void method");
          return cx.return_type;
        } else if constexpr (std::is_same_v<T, Old>) {
          if (!cx.spec || cx.kind != SpecKind::kEnsures) type_error(cx, "\\old is only allowed in ensures");
          return type_of(*n.inner, cx, binders);
        } else if constexpr (std::is_same_v<T, Quant>) {
          if (cx.lookup(n.binder)) {
            throw ScopeError(cx.where + ": quantifier variable '" + n.binder + "' shadows a visible variable");
          }
          for (const auto& b : binders) {
            if (b == n.binder) throw ScopeError(cx.where + ": quantifier variable '" + n.binder + "' reused");
          }
          binders.push_back(n.binder);
          expect_type(cx, type_of(*n.range, cx, binders), TypeTag::kBool, *n.range);
          expect_type(cx, type_of(*n.body, cx, binders), TypeTag::kBool, *n.body);
          binders.pop_back();
          return TypeTag::kBool;
        } else {
          type_error(cx, "unfilled <MASK>");
        }
      },
      e.node);
}

class Resolver {
 public:
  explicit Resolver(const SourceUnit& unit) : unit_(unit) {}

  SymbolTable run() {
    for (const auto& m : unit_.methods) {
      if (table_.methods.count(m.name)) throw ScopeError("duplicate method '" + m.name + "'");
      table_.methods[m.name] = MethodSig{m.params, m.return_type};
    }
    for (const auto& m : unit_.methods) method(m);
    return std::move(table_);
  }

 private:
  int push_scope() {
    Scope s;
    s.parent = current_;
    s.method = method_->name;
    table_.scopes.push_back(std::move(s));
    current_ = static_cast<int>(table_.scopes.size()) - 1;
    return current_;
  }
  void pop_scope() { current_ = table_.scopes[current_].parent; }

  int find_var(const std::string& name) const {
    for (int s = current_; s >= 0; s = table_.scopes[s].parent) {
      auto it = table_.scopes[s].names.find(name);
      if (it != table_.scopes[s].names.end()) return it->second;
    }
    return -1;
  }

  std::vector<Param> visible_now() const {
    std::vector<Param> out;
    std::vector<int> chain;
    for (int s = current_; s >= 0; s = table_.scopes[s].parent) chain.push_back(s);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      for (const auto& [name, idx] : table_.scopes[*it].names) {
        out.push_back(Param{name, table_.vars[idx].type});
      }
    }
    return out;
  }

  std::string where(int line) const {
    return "line " + std::to_string(line) + " in " + method_->name;
  }

  void declare(const std::string& name, TypeTag type, bool is_param, Site site) {
    if (find_var(name) >= 0) {
      throw ScopeError(where(site.line) + ": '" + name + "' is already defined in this scope");
    }
    if (type == TypeTag::kVoid) throw TypeError(where(site.line) + ": variable of type void");
    VarInfo v;
    v.name = name;
    v.type = type;
    v.method = method_->name;
    v.is_param = is_param;
    v.scope = current_;
    v.decl = site;
    v.defs.push_back(site);
    table_.vars.push_back(std::move(v));
    table_.scopes[current_].names[name] = static_cast<int>(table_.vars.size()) - 1;
  }

  TypeTag expr(const Expr& e, int line) {
    ExprContext cx;
    cx.methods = &table_.methods;
    cx.where = where(line);
    cx.lookup = [&](const std::string& name) -> std::optional<TypeTag> {
      const int v = find_var(name);
      if (v < 0) return std::nullopt;
      return table_.vars[v].type;
    };
    std::vector<std::string> binders;
    const TypeTag t = type_of(e, cx, binders);
    visit(e, [&](const Expr& x) {
      if (x.is<VarRef>()) table_.vars[find_var(x.as<VarRef>().name)].uses.push_back(site(line));
    });
    return t;
  }

  Site site(int line) const { return Site{stmt_index_, line}; }

  void method(const Method& m) {
    method_ = &m;
    current_ = -1;
    stmt_index_ = -1;
    push_scope();
    for (const auto& p : m.params) declare(p.name, p.type, true, Site{-1, m.line});
    table_.visible[Anchor{m.name, -1}] = visible_now();
    block(m.body, false);
    pop_scope();
  }

  void block(const Block& b, bool new_scope = true) {
    if (new_scope) push_scope();
    for (const auto& s : b.stmts) stmt(s);
    if (new_scope) pop_scope();
  }

  void stmt(const Stmt& s) {
    ++stmt_index_;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, VarDecl>) {
            if (n.init) {
              const TypeTag t = expr(*n.init, s.line);
              if (t != n.type) {
                throw TypeError(where(s.line) + ": cannot initialize " + type_name(n.type) + " '" + n.name +
                                "' with " + type_name(t));
              }
            }
            declare(n.name, n.type, false, site(s.line));
          } else if constexpr (std::is_same_v<T, Assign>) {
            assign(n, s.line);
          } else if constexpr (std::is_same_v<T, If>) {
            cond(n.cond, s.line);
            block(n.then_block);
            if (n.else_branch) {
              const Stmt& e = **n.else_branch;
              if (e.is<Block>()) {
                ++stmt_index_;
                block(e.as<Block>());
              } else {
                stmt(e);
              }
            }
          } else if constexpr (std::is_same_v<T, While>) {
            table_.visible[Anchor{method_->name, n.loop_id}] = visible_now();
            cond(n.cond, s.line);
            block(n.body);
          } else if constexpr (std::is_same_v<T, For>) {
            push_scope();
            if (n.init) stmt(**n.init);
            table_.visible[Anchor{method_->name, n.loop_id}] = visible_now();
            if (n.cond) cond(*n.cond, s.line);
            if (n.update) {
              if (!(*n.update)->template is<Assign>()) throw TypeError(where(s.line) + ": bad for-update");
              stmt(**n.update);
            }
            block(n.body);
            pop_scope();
          } else if constexpr (std::is_same_v<T, Return>) {
            const TypeTag want = method_->return_type;
            if (!n.value) {
              if (want != TypeTag::kVoid) throw TypeError(where(s.line) + ": missing return value");
            } else {
              if (want == TypeTag::kVoid) throw TypeError(where(s.line) + ": void method returns a value");
              const TypeTag got = expr(*n.value, s.line);
              if (got != want) {
                throw TypeError(where(s.line) + ": returns " + type_name(got) + ", expected " + type_name(want));
              }
            }
          } else if constexpr (std::is_same_v<T, Block>) {
            block(n);
          }
        },
        s.node);
  }

  void cond(const Expr& c, int line) {
    if (expr(c, line) != TypeTag::kBool) throw TypeError(where(line) + ": condition must be boolean");
  }

  void assign(const Assign& a, int line) {
    const int v = find_var(a.target.name);
    if (v < 0) throw ScopeError(where(line) + ": unknown identifier '" + a.target.name + "'");
    TypeTag target = table_.vars[v].type;
    if (a.target.index) {
      if (target != TypeTag::kIntArray) throw TypeError(where(line) + ": '" + a.target.name + "' is not an array");
      if (expr(*a.target.index, line) != TypeTag::kInt) throw TypeError(where(line) + ": index must be int");
      target = TypeTag::kInt;
      table_.vars[v].uses.push_back(site(line));
    } else if (a.op != AssignOp::kSet) {
      table_.vars[v].uses.push_back(site(line));
    }
    if (a.op != AssignOp::kSet && target != TypeTag::kInt) {
      throw TypeError(where(line) + ": compound assignment on non-int '" + a.target.name + "'");
    }
    if (a.value) {
      const TypeTag got = expr(*a.value, line);
      if (got != target) {
        throw TypeError(where(line) + ": cannot assign " + type_name(got) + " to " + type_name(target));
      }
    }
    table_.vars[v].defs.push_back(site(line));
  }

  const SourceUnit& unit_;
  SymbolTable table_;
  const Method* method_ = nullptr;
  int current_ = -1;
  int stmt_index_ = -1;
};

ExprContext spec_context(const SymbolTable& scope, const Anchor& anchor, SpecKind kind,
                         const std::vector<Param>*& visible) {
  auto vit = scope.visible.find(anchor);
  if (vit == scope.visible.end()) throw ScopeError("unknown anchor " + anchor.to_string());
  visible = &vit->second;
  auto mit = scope.methods.find(anchor.method);
  ExprContext cx;
  cx.methods = &scope.methods;
  cx.spec = true;
  cx.kind = kind;
  cx.return_type = mit->second.return_type;
  cx.where = std::string(spec_keyword(kind)) + " at " + anchor.to_string();
  const std::vector<Param>* vis = visible;
  cx.lookup = [vis](const std::string& name) -> std::optional<TypeTag> {
    for (const auto& p : *vis) {
      if (p.name == name) return p.type;
    }
    return std::nullopt;
  };
  return cx;
}

}  // namespace

SymbolTable resolve_scopes(const SourceUnit& unit) { return Resolver(unit).run(); }

void check_clause(const SpecClause& clause, const SymbolTable& scope) {
  if ((clause.kind == SpecKind::kLoopInvariant) != clause.anchor.is_loop()) {
    throw ScopeError(std::string(spec_keyword(clause.kind)) + " clause anchored at " + clause.anchor.to_string());
  }
  const TypeTag t = expr_type(clause.expr, scope, clause.anchor, clause.kind);
  if (t != TypeTag::kBool) {
    throw TypeError(std::string(spec_keyword(clause.kind)) + " at " + clause.anchor.to_string() +
                    ": clause must be boolean");
  }
  visit(clause.expr, [&](const Expr& x) {
    if (x.is<Quant>()) {
      const auto& q = x.as<Quant>();
      if (!extract_bounds(*q.range, q.binder)) {
        throw UnboundedQuantifier("quantifier range for '" + q.binder + "' does not bound it to a finite interval");
      }
    }
  });
}

TypeTag expr_type(const Expr& e, const SymbolTable& scope, const Anchor& anchor, SpecKind kind) {
  const std::vector<Param>* visible = nullptr;
  ExprContext cx = spec_context(scope, anchor, kind, visible);
  std::vector<std::string> binders;
  return type_of(e, cx, binders);
}

SymbolTable check_unit(const SourceUnit& unit) {
  SymbolTable table = resolve_scopes(unit);
  for (const auto& c : unit.specs) {
    if (!unit.find_method(c.anchor.method)) {
      throw ScopeError("clause anchored at unknown method '" + c.anchor.method + "'");
    }
    if (c.anchor.is_loop() && !table.visible.count(c.anchor)) {
      throw ScopeError("clause anchored at unknown loop " + c.anchor.to_string());
    }
    check_clause(c, table);
  }
  return table;
}

Expr parse_spec_expr(std::string_view text, const SymbolTable& scope, const Anchor& anchor, SpecKind kind) {
  Expr e = parse_expression(text, true);
  SpecClause c{kind, anchor, e, 0};
  check_clause(c, scope);
  return e;
}

}  // namespace jmlbench::lang
