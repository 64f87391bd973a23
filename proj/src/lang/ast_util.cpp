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

#include "jmlbench/lang/ast_util.hpp"

namespace jmlbench::lang {
namespace {

bool is_binder(const Expr& e, const std::string& binder) {
  return e.is<VarRef>() && e.as<VarRef>().name == binder;
}

bool mentions(const Expr& e, const std::string& name) {
  bool found = false;
  visit(e, [&](const Expr& x) {
    if (x.is<VarRef>() && x.as<VarRef>().name == name) found = true;
  });
  return found;
}

void flatten_and(const Expr& e, std::vector<const Expr*>& out) {
  if (e.is<Binary>() && e.as<Binary>().op == BinaryOp::kAnd) {
    flatten_and(*e.as<Binary>().lhs, out);
    flatten_and(*e.as<Binary>().rhs, out);
  } else {
    out.push_back(&e);
  }
}

}  // namespace

std::optional<QuantBounds> extract_bounds(const Expr& range, const std::string& binder) {
  std::vector<const Expr*> conjuncts;
  flatten_and(range, conjuncts);
  QuantBounds b;
  for (const Expr* c : conjuncts) {
    if (!c->is<Binary>()) continue;
    const auto& bin = c->as<Binary>();
    const Expr& l = *bin.lhs;
    const Expr& r = *bin.rhs;
    const bool left_is = is_binder(l, binder) && !mentions(r, binder);
    const bool right_is = is_binder(r, binder) && !mentions(l, binder);
    if (!left_is && !right_is) continue;
    const Expr* other = left_is ? &r : &l;
    // Normalize to `binder op other`.
    BinaryOp op = bin.op;
    if (right_is) {
      switch (op) {
        case BinaryOp::kLt: op = BinaryOp::kGt; break;
        case BinaryOp::kLe: op = BinaryOp::kGe; break;
        case BinaryOp::kGt: op = BinaryOp::kLt; break;
        case BinaryOp::kGe: op = BinaryOp::kLe; break;
        default: break;
      }
    }
    switch (op) {
      case BinaryOp::kLt: b.uppers.push_back({other, 0}); break;
      case BinaryOp::kLe: b.uppers.push_back({other, 1}); break;
      case BinaryOp::kGt: b.lowers.push_back({other, 1}); break;
      case BinaryOp::kGe: b.lowers.push_back({other, 0}); break;
      case BinaryOp::kEq:
        b.lowers.push_back({other, 0});
        b.uppers.push_back({other, 1});
        break;
      default: break;
    }
  }
  if (b.lowers.empty() || b.uppers.empty()) return std::nullopt;
  return b;
}

void visit(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayIndex> || std::is_same_v<T, CharAt>) {
          visit(*n.base, fn);
          visit(*n.index, fn);
        } else if constexpr (std::is_same_v<T, Length>) {
          visit(*n.base, fn);
        } else if constexpr (std::is_same_v<T, Unary>) {
          visit(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, Binary>) {
          visit(*n.lhs, fn);
          visit(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.args) visit(a, fn);
        } else if constexpr (std::is_same_v<T, Old>) {
          visit(*n.inner, fn);
        } else if constexpr (std::is_same_v<T, Quant>) {
          visit(*n.range, fn);
          visit(*n.body, fn);
        }
      },
      e.node);
}

void visit_mut(Expr& e, const std::function<void(Expr&)>& fn) {
  fn(e);
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayIndex> || std::is_same_v<T, CharAt>) {
          visit_mut(*n.base, fn);
          visit_mut(*n.index, fn);
        } else if constexpr (std::is_same_v<T, Length>) {
          visit_mut(*n.base, fn);
        } else if constexpr (std::is_same_v<T, Unary>) {
          visit_mut(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, Binary>) {
          visit_mut(*n.lhs, fn);
          visit_mut(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (auto& a : n.args) visit_mut(a, fn);
        } else if constexpr (std::is_same_v<T, Old>) {
          visit_mut(*n.inner, fn);
        } else if constexpr (std::is_same_v<T, Quant>) {
          visit_mut(*n.range, fn);
          visit_mut(*n.body, fn);
        }
      },
      e.node);
}

void visit_stmt_exprs(const Stmt& s, const std::function<void(const Expr&)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarDecl>) {
          if (n.init) visit(*n.init, fn);
        } else if constexpr (std::is_same_v<T, Assign>) {
          if (n.target.index) visit(*n.target.index, fn);
          if (n.value) visit(*n.value, fn);
        } else if constexpr (std::is_same_v<T, If>) {
          visit(n.cond, fn);
          for (const auto& c : n.then_block.stmts) visit_stmt_exprs(c, fn);
          if (n.else_branch) visit_stmt_exprs(**n.else_branch, fn);
        } else if constexpr (std::is_same_v<T, While>) {
          visit(n.cond, fn);
          for (const auto& c : n.body.stmts) visit_stmt_exprs(c, fn);
        } else if constexpr (std::is_same_v<T, For>) {
          if (n.init) visit_stmt_exprs(**n.init, fn);
          if (n.cond) visit(*n.cond, fn);
          if (n.update) visit_stmt_exprs(**n.update, fn);
          for (const auto& c : n.body.stmts) visit_stmt_exprs(c, fn);
        } else if constexpr (std::is_same_v<T, Return>) {
          if (n.value) visit(*n.value, fn);
        } else if constexpr (std::is_same_v<T, Block>) {
          for (const auto& c : n.stmts) visit_stmt_exprs(c, fn);
        }
      },
      s.node);
}

namespace {

void visit_stmt(const Stmt& s, const std::function<void(const Stmt&)>& fn) {
  fn(s);
  if (const auto* i = std::get_if<If>(&s.node)) {
    visit_stmts(i->then_block, fn);
    if (i->else_branch) visit_stmt(**i->else_branch, fn);
  } else if (const auto* w = std::get_if<While>(&s.node)) {
    visit_stmts(w->body, fn);
  } else if (const auto* f = std::get_if<For>(&s.node)) {
    if (f->init) visit_stmt(**f->init, fn);
    if (f->update) visit_stmt(**f->update, fn);
    visit_stmts(f->body, fn);
  } else if (const auto* b = std::get_if<Block>(&s.node)) {
    visit_stmts(*b, fn);
  }
}

void visit_stmt_mut(Stmt& s, const std::function<void(Stmt&)>& fn) {
  fn(s);
  if (auto* i = std::get_if<If>(&s.node)) {
    visit_stmts_mut(i->then_block, fn);
    if (i->else_branch) visit_stmt_mut(**i->else_branch, fn);
  } else if (auto* w = std::get_if<While>(&s.node)) {
    visit_stmts_mut(w->body, fn);
  } else if (auto* f = std::get_if<For>(&s.node)) {
    if (f->init) visit_stmt_mut(**f->init, fn);
    if (f->update) visit_stmt_mut(**f->update, fn);
    visit_stmts_mut(f->body, fn);
  } else if (auto* b = std::get_if<Block>(&s.node)) {
    visit_stmts_mut(*b, fn);
  }
}

}  // namespace

void visit_stmts(const Block& b, const std::function<void(const Stmt&)>& fn) {
  for (const auto& s : b.stmts) visit_stmt(s, fn);
}

void visit_stmts_mut(Block& b, const std::function<void(Stmt&)>& fn) {
  for (auto& s : b.stmts) visit_stmt_mut(s, fn);
}

bool contains_call(const Expr& e) {
  bool found = false;
  visit(e, [&](const Expr& x) { found = found || x.is<Call>(); });
  return found;
}

bool contains_call(const Stmt& s) {
  bool found = false;
  visit_stmt_exprs(s, [&](const Expr& x) { found = found || x.is<Call>(); });
  return found;
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&, std::set<std::string>&)> walk =
      [&](const Expr& x, std::set<std::string>& bound) {
        if (x.is<VarRef>()) {
          if (!bound.count(x.as<VarRef>().name)) out.insert(x.as<VarRef>().name);
          return;
        }
        if (x.is<Quant>()) {
          const auto& q = x.as<Quant>();
          const bool added = bound.insert(q.binder).second;
          walk(*q.range, bound);
          walk(*q.body, bound);
          if (added) bound.erase(q.binder);
          return;
        }
        std::visit(
            [&](const auto& n) {
              using T = std::decay_t<decltype(n)>;
              if constexpr (std::is_same_v<T, ArrayIndex> || std::is_same_v<T, CharAt>) {
                walk(*n.base, bound);
                walk(*n.index, bound);
              } else if constexpr (std::is_same_v<T, Length>) {
                walk(*n.base, bound);
              } else if constexpr (std::is_same_v<T, Unary>) {
                walk(*n.operand, bound);
              } else if constexpr (std::is_same_v<T, Binary>) {
                walk(*n.lhs, bound);
                walk(*n.rhs, bound);
              } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& a : n.args) walk(a, bound);
              } else if constexpr (std::is_same_v<T, Old>) {
                walk(*n.inner, bound);
              }
            },
            x.node);
      };
  std::set<std::string> bound;
  walk(e, bound);
  return out;
}

Expr rename_vars(const Expr& e, const std::map<std::string, std::string>& renames,
                 const std::function<std::string()>& binder_fresh) {
  std::set<std::string> targets;
  for (const auto& [from, to] : renames) targets.insert(to);

  std::function<Expr(const Expr&, const std::map<std::string, std::string>&)> go =
      [&](const Expr& x, const std::map<std::string, std::string>& env) -> Expr {
    if (x.is<VarRef>()) {
      auto it = env.find(x.as<VarRef>().name);
      return it == env.end() ? x : make_var(it->second);
    }
    if (x.is<Quant>()) {
      const auto& q = x.as<Quant>();
      auto inner = env;
      std::string binder = q.binder;
      if (auto it = renames.find(binder); it != renames.end()) {
        binder = it->second;
      } else if (targets.count(binder) && binder_fresh) {
        binder = binder_fresh();
      }
      if (binder == q.binder) {
        inner.erase(binder);
      } else {
        inner[q.binder] = binder;
      }
      return Expr{Quant{q.kind, binder, go(*q.range, inner), go(*q.body, inner)}};
    }
    Expr out = x;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ArrayIndex> || std::is_same_v<T, CharAt>) {
            n.base = go(*n.base, env);
            n.index = go(*n.index, env);
          } else if constexpr (std::is_same_v<T, Length>) {
            n.base = go(*n.base, env);
          } else if constexpr (std::is_same_v<T, Unary>) {
            n.operand = go(*n.operand, env);
          } else if constexpr (std::is_same_v<T, Binary>) {
            n.lhs = go(*n.lhs, env);
            n.rhs = go(*n.rhs, env);
          } else if constexpr (std::is_same_v<T, Call>) {
            for (auto& a : n.args) a = go(a, env);
          } else if constexpr (std::is_same_v<T, Old>) {
            n.inner = go(*n.inner, env);
          }
        },
        out.node);
    return out;
  };
  return go(e, renames);
}

void rename_calls(Expr& e, const std::map<std::string, std::string>& renames) {
  visit_mut(e, [&](Expr& x) {
    if (x.is<Call>()) {
      auto it = renames.find(x.as<Call>().method);
      if (it != renames.end()) x.as<Call>().method = it->second;
    }
  });
}

SourceUnit strip_specs(const SourceUnit& unit) {
  SourceUnit out = unit;
  out.specs.clear();
  return out;
}

}  // namespace jmlbench::lang
