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

#include <string>
#include <vector>

#include "jmlbench/lang/ast.hpp"

namespace jmlbench::lang {

// Canonical source form: four-space indentation, one statement per line,
// braces always present, clauses as `//@` lines directly above their anchor.
// `clause_order`, when given, receives the index (into unit.specs) of each
// clause in the order it was emitted.
std::string print_unit(const SourceUnit& unit, std::vector<std::size_t>* clause_order = nullptr);

std::string print_expr(const Expr& e);

// `ensures <expr>;`
std::string print_clause(const SpecClause& c);

// Print, re-parse and re-check: the result has canonical loop ids, clause
// order and line numbers. Used after every AST rewrite.
SourceUnit canonicalize(const SourceUnit& unit, std::vector<std::size_t>* clause_order = nullptr);

}  // namespace jmlbench::lang
