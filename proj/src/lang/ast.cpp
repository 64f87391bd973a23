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

#include "jmlbench/lang/ast.hpp"

namespace jmlbench::lang {

std::string type_name(TypeTag t) {
  switch (t) {
    case TypeTag::kInt: return "int";
    case TypeTag::kBool: return "boolean";
    case TypeTag::kIntArray: return "int[]";
    case TypeTag::kString: return "String";
    case TypeTag::kVoid: return "void";
  }
  return "?";
}

const char* op_text(UnaryOp op) { return op == UnaryOp::kNeg ? "-" : "!"; }

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kMod: return "%";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kAnd: return "&&";
    case BinaryOp::kOr: return "||";
    case BinaryOp::kImplies: return "==>";
    case BinaryOp::kIff: return "<==>";
  }
  return "?";
}

bool is_relational(BinaryOp op) {
  return op == BinaryOp::kLt || op == BinaryOp::kLe || op == BinaryOp::kGt || op == BinaryOp::kGe ||
         op == BinaryOp::kEq || op == BinaryOp::kNe;
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::kAdd || op == BinaryOp::kSub || op == BinaryOp::kMul ||
         op == BinaryOp::kDiv || op == BinaryOp::kMod;
}

bool is_logical(BinaryOp op) {
  return op == BinaryOp::kAnd || op == BinaryOp::kOr || op == BinaryOp::kImplies ||
         op == BinaryOp::kIff;
}

Expr make_int(std::int32_t v) { return Expr{IntLit{v}}; }
Expr make_bool(bool v) { return Expr{BoolLit{v}}; }
Expr make_var(std::string name) { return Expr{VarRef{std::move(name)}}; }
Expr make_unary(UnaryOp op, Expr e) { return Expr{Unary{op, std::move(e)}}; }
Expr make_binary(BinaryOp op, Expr l, Expr r) {
  return Expr{Binary{op, std::move(l), std::move(r)}};
}

const char* spec_keyword(SpecKind k) {
  switch (k) {
    case SpecKind::kRequires: return "requires";
    case SpecKind::kEnsures: return "ensures";
    case SpecKind::kLoopInvariant: return "loop_invariant";
  }
  return "?";
}

std::string Anchor::to_string() const {
  if (loop < 0) return method;
  return method + "#loop" + std::to_string(loop + 1);
}

const Method* SourceUnit::find_method(const std::string& n) const {
  for (const auto& m : methods) {
    if (m.name == n) return &m;
  }
  return nullptr;
}

Method* SourceUnit::find_method(const std::string& n) {
  for (auto& m : methods) {
    if (m.name == n) return &m;
  }
  return nullptr;
}

namespace {

void collect_loops(const Stmt& s, std::vector<const Stmt*>& out);

void collect_loops(const Block& b, std::vector<const Stmt*>& out) {
  for (const auto& s : b.stmts) collect_loops(s, out);
}

void collect_loops(const Stmt& s, std::vector<const Stmt*>& out) {
  if (const auto* w = std::get_if<While>(&s.node)) {
    out.push_back(&s);
    collect_loops(w->body, out);
  } else if (const auto* f = std::get_if<For>(&s.node)) {
    out.push_back(&s);
    collect_loops(f->body, out);
  } else if (const auto* i = std::get_if<If>(&s.node)) {
    collect_loops(i->then_block, out);
    if (i->else_branch) collect_loops(**i->else_branch, out);
  } else if (const auto* b = std::get_if<Block>(&s.node)) {
    collect_loops(*b, out);
  }
}

}  // namespace

int count_loops(const Method& m) {
  std::vector<const Stmt*> loops;
  collect_loops(m.body, loops);
  return static_cast<int>(loops.size());
}

const Stmt* find_loop(const Method& m, int loop_id) {
  std::vector<const Stmt*> loops;
  collect_loops(m.body, loops);
  for (const Stmt* s : loops) {
    if (const auto* w = std::get_if<While>(&s->node); w && w->loop_id == loop_id) return s;
    if (const auto* f = std::get_if<For>(&s->node); f && f->loop_id == loop_id) return s;
  }
  return nullptr;
}

}  // namespace jmlbench::lang
