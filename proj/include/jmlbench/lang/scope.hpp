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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "jmlbench/lang/ast.hpp"

namespace jmlbench::lang {

// Where a variable is written or read. `stmt` is the pre-order index of the
// statement within its method (-1 for a parameter binding).
struct Site {
  int stmt = -1;
  int line = 0;
  auto operator<=>(const Site&) const = default;
};

struct VarInfo {
  std::string name;
  TypeTag type;
  std::string method;
  bool is_param = false;
  int scope = 0;  // index into SymbolTable::scopes
  Site decl;
  std::vector<Site> defs;
  std::vector<Site> uses;
};

struct Scope {
  int parent = -1;
  std::string method;
  std::map<std::string, int> names;  // identifier -> index into SymbolTable::vars
};

struct MethodSig {
  std::vector<Param> params;
  TypeTag return_type;
};

struct SymbolTable {
  std::vector<Scope> scopes;
  std::vector<VarInfo> vars;
  std::map<std::string, MethodSig> methods;
  // Variables visible at each anchor (for loops: at the loop header,
  // including a `for` initializer declaration).
  std::map<Anchor, std::vector<Param>> visible;

  // Declarations of `name` in `method` (a name may be declared in sibling
  // scopes more than once).
  std::vector<const VarInfo*> lookup(const std::string& method, const std::string& name) const;
  TypeTag type_at(const Anchor& anchor, const std::string& name) const;  // throws ScopeError
};

// Binds every name in the unit, records def/use sites, and type-checks all
// statements and specification clauses. Throws ScopeError or TypeError.
SymbolTable resolve_scopes(const SourceUnit& unit);

// resolve_scopes() plus structural checks (every clause anchor exists).
SymbolTable check_unit(const SourceUnit& unit);

// Type-checks a clause against the anchor's scope. Throws ScopeError/TypeError.
void check_clause(const SpecClause& clause, const SymbolTable& scope);

// Parses and checks clause text in the scope of `anchor`.
// Throws SyntaxError, ScopeError, TypeError or UnboundedQuantifier.
Expr parse_spec_expr(std::string_view text, const SymbolTable& scope, const Anchor& anchor,
                     SpecKind kind);

// Static type of a checked expression at an anchor (binders are int).
TypeTag expr_type(const Expr& e, const SymbolTable& scope, const Anchor& anchor, SpecKind kind);

}  // namespace jmlbench::lang
