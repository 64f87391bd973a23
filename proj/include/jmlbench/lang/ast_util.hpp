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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jmlbench/lang/ast.hpp"

namespace jmlbench::lang {

// A bound `expr + offset` on a quantifier binder. Lower bounds are inclusive,
// upper bounds exclusive.
struct BoundTerm {
  const Expr* expr;
  int offset;
};

struct QuantBounds {
  std::vector<BoundTerm> lowers;
  std::vector<BoundTerm> uppers;
};

// Reads interval bounds for `binder` out of the top-level conjuncts of a
// quantifier range. Returns nullopt when either side is missing, i.e. the
// range does not confine the binder to a finite interval.
std::optional<QuantBounds> extract_bounds(const Expr& range, const std::string& binder);

// Pre-order traversal over an expression tree.
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);
void visit_mut(Expr& e, const std::function<void(Expr&)>& fn);

// Pre-order traversal over all expressions of a statement (including nested
// statements), in evaluation order of the source.
void visit_stmt_exprs(const Stmt& s, const std::function<void(const Expr&)>& fn);
void visit_stmts(const Block& b, const std::function<void(const Stmt&)>& fn);
void visit_stmts_mut(Block& b, const std::function<void(Stmt&)>& fn);

bool contains_call(const Expr& e);
bool contains_call(const Stmt& s);

// Free variable names (quantifier binders excluded).
std::set<std::string> free_vars(const Expr& e);

// Renames free variables. Binders are renamed through the same map when they
// appear in it; a binder that would capture a renamed free variable gets
// `binder_fresh` applied.
Expr rename_vars(const Expr& e, const std::map<std::string, std::string>& renames,
                 const std::function<std::string()>& binder_fresh = {});

// Renames method names in calls.
void rename_calls(Expr& e, const std::map<std::string, std::string>& renames);

SourceUnit strip_specs(const SourceUnit& unit);

}  // namespace jmlbench::lang
