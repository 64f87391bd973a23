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

#include <string_view>

#include "jmlbench/lang/ast.hpp"

namespace jmlbench::lang {

// Parses a `.sj` compilation unit: either `class Name { methods }` or bare
// methods (the unit is then named "Main"). `//@` clauses directly above a
// method header or loop header are attached to it. Syntax only; see
// check_unit() in scope.hpp for name and type checking.
//
// Throws SyntaxError, UnsupportedFeature or UnboundedQuantifier.
SourceUnit parse_unit(std::string_view text);

// Parses one expression. With `spec` set, the specification-only forms
// (\result, \old, quantifiers, ==>, <==>, <MASK>) are accepted.
Expr parse_expression(std::string_view text, bool spec);

// Parses a single clause such as `ensures \result == x;` (the trailing
// semicolon is optional). The anchor is left empty.
SpecClause parse_clause(std::string_view text);

// parse_unit() followed by check_unit(); the usual entry point.
SourceUnit load_unit(std::string_view text);

}  // namespace jmlbench::lang
