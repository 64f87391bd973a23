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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jmlbench/util/box.hpp"

namespace jmlbench::lang {

enum class TypeTag { kInt, kBool, kIntArray, kString, kVoid };

std::string type_name(TypeTag t);

// ---------------------------------------------------------------------------
// Expressions. Program expressions and specification expressions share one
// tree; the spec-only nodes (Result, Old, Quant, Mask) and the Implies/Iff
// operators are rejected by the parser outside of `//@` clauses.
// ---------------------------------------------------------------------------

enum class UnaryOp { kNeg, kNot };

enum class BinaryOp {
  kAdd, kSub, kMul, kDiv, kMod,
  kLt, kLe, kGt, kGe, kEq, kNe,
  kAnd, kOr, kImplies, kIff,
};

const char* op_text(UnaryOp op);
const char* op_text(BinaryOp op);
bool is_relational(BinaryOp op);
bool is_arithmetic(BinaryOp op);
bool is_logical(BinaryOp op);

enum class QuantKind { kForall, kExists };

struct Expr;

struct IntLit {
  std::int32_t value;
  bool operator==(const IntLit&) const = default;
};
struct BoolLit {
  bool value;
  bool operator==(const BoolLit&) const = default;
};
struct StringLit {
  std::string value;
  bool operator==(const StringLit&) const = default;
};
struct VarRef {
  std::string name;
  bool operator==(const VarRef&) const = default;
};
struct ArrayIndex {
  Box<Expr> base;
  Box<Expr> index;
  bool operator==(const ArrayIndex&) const = default;
};
// `a.length` (array) or `s.length()` (string); the spelling is kept so that
// printing reproduces the source form.
struct Length {
  Box<Expr> base;
  bool call_syntax;
  bool operator==(const Length&) const = default;
};
struct CharAt {
  Box<Expr> base;
  Box<Expr> index;
  bool operator==(const CharAt&) const = default;
};
struct Unary {
  UnaryOp op;
  Box<Expr> operand;
  bool operator==(const Unary&) const = default;
};
struct Binary {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const Binary&) const = default;
};
struct Call {
  std::string method;
  std::vector<Expr> args;
  bool operator==(const Call&) const;
};
struct Result {
  bool operator==(const Result&) const = default;
};
struct Old {
  Box<Expr> inner;
  bool operator==(const Old&) const = default;
};
// Bounded quantifier over an int binder. The range must bound the binder to
// a finite interval; the parser enforces this.
struct Quant {
  QuantKind kind;
  std::string binder;
  Box<Expr> range;
  Box<Expr> body;
  bool operator==(const Quant&) const = default;
};
// Infilling placeholder `<MASK>`.
struct Mask {
  bool operator==(const Mask&) const = default;
};

struct Expr {
  using Node = std::variant<IntLit, BoolLit, StringLit, VarRef, ArrayIndex, Length, CharAt, Unary,
                            Binary, Call, Result, Old, Quant, Mask>;
  Node node;

  template <typename T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <typename T>
  const T& as() const { return std::get<T>(node); }
  template <typename T>
  T& as() { return std::get<T>(node); }

  bool operator==(const Expr&) const = default;
};

inline bool Call::operator==(const Call& o) const { return method == o.method && args == o.args; }

// Convenience constructors, mostly for tests and rewriters.
Expr make_int(std::int32_t v);
Expr make_bool(bool v);
Expr make_var(std::string name);
Expr make_unary(UnaryOp op, Expr e);
Expr make_binary(BinaryOp op, Expr l, Expr r);

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

enum class AssignOp { kSet, kAdd, kSub, kMul, kDiv, kMod, kInc, kDec };

struct LValue {
  std::string name;
  std::optional<Expr> index;  // set for `a[i] = ...`
  bool operator==(const LValue&) const = default;
};

struct Stmt;

struct Block {
  std::vector<Stmt> stmts;
  bool operator==(const Block&) const;
};

struct VarDecl {
  std::string name;
  TypeTag type;
  std::optional<Expr> init;
  bool operator==(const VarDecl&) const = default;
};
struct Assign {
  LValue target;
  AssignOp op;
  std::optional<Expr> value;  // absent for ++ / --
  bool operator==(const Assign&) const = default;
};
struct If {
  Expr cond;
  Block then_block;
  std::optional<Box<Stmt>> else_branch;  // a Block or another If
  bool operator==(const If&) const;
};
struct While {
  Expr cond;
  Block body;
  int loop_id = 0;  // pre-order ordinal within the enclosing method
  bool operator==(const While&) const;
};
struct For {
  std::optional<Box<Stmt>> init;  // VarDecl or Assign
  std::optional<Expr> cond;
  std::optional<Box<Stmt>> update;  // Assign
  Block body;
  int loop_id = 0;
  bool operator==(const For&) const;
};
struct Return {
  std::optional<Expr> value;
  bool operator==(const Return&) const = default;
};

struct Stmt {
  using Node = std::variant<VarDecl, Assign, If, While, For, Return, Block>;
  Node node;
  int line = 0;  // source position; not part of structural equality

  template <typename T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <typename T>
  const T& as() const { return std::get<T>(node); }
  template <typename T>
  T& as() { return std::get<T>(node); }

  bool operator==(const Stmt& o) const { return node == o.node; }
};

inline bool Block::operator==(const Block& o) const { return stmts == o.stmts; }
inline bool If::operator==(const If& o) const {
  return cond == o.cond && then_block == o.then_block && else_branch == o.else_branch;
}
inline bool While::operator==(const While& o) const {
  return cond == o.cond && body == o.body && loop_id == o.loop_id;
}
inline bool For::operator==(const For& o) const {
  return init == o.init && cond == o.cond && update == o.update && body == o.body &&
         loop_id == o.loop_id;
}

// ---------------------------------------------------------------------------
// Methods, specifications, units
// ---------------------------------------------------------------------------

struct Param {
  std::string name;
  TypeTag type;
  bool operator==(const Param&) const = default;
};

struct Method {
  std::string name;
  std::vector<Param> params;
  TypeTag return_type = TypeTag::kVoid;
  Block body;
  int line = 0;

  bool operator==(const Method& o) const {
    return name == o.name && params == o.params && return_type == o.return_type && body == o.body;
  }
};

enum class SpecKind { kRequires, kEnsures, kLoopInvariant };

const char* spec_keyword(SpecKind k);

// A method (loop < 0) or the loop with the given ordinal inside a method.
struct Anchor {
  std::string method;
  int loop = -1;

  bool is_loop() const { return loop >= 0; }
  std::string to_string() const;
  auto operator<=>(const Anchor&) const = default;
};

struct SpecClause {
  SpecKind kind;
  Anchor anchor;
  Expr expr;
  int line = 0;

  bool operator==(const SpecClause& o) const {
    return kind == o.kind && anchor == o.anchor && expr == o.expr;
  }
};

struct SourceUnit {
  std::string name;
  std::vector<Method> methods;
  // Canonical order: the order in which clauses appear in printed text.
  std::vector<SpecClause> specs;

  const Method* find_method(const std::string& name) const;
  Method* find_method(const std::string& name);
  bool operator==(const SourceUnit&) const = default;
};

// Number of loops in a method body (loop ids are 0..count-1).
int count_loops(const Method& m);

// Statement with the given loop id inside a method, or nullptr.
const Stmt* find_loop(const Method& m, int loop_id);

}  // namespace jmlbench::lang
