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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "jmlbench/lang/ast.hpp"
#include "jmlbench/runtime/value.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::perturb {

enum class PerturbKind { kDefUseBreak, kIfElseFlip, kIndependentSwap, kNameRandom, kNameShuffle };

inline constexpr PerturbKind kAllKinds[] = {PerturbKind::kDefUseBreak, PerturbKind::kIfElseFlip,
                                            PerturbKind::kIndependentSwap, PerturbKind::kNameRandom,
                                            PerturbKind::kNameShuffle};

// "DefUseBreak", "IfElseFlip", ...
const char* kind_name(PerturbKind k);
std::optional<PerturbKind> parse_kind(const std::string& name);

class NoEligibleVariable : public Error {
 public:
  using Error::Error;
};
class NoEligibleBranch : public Error {
 public:
  using Error::Error;
};
class NoEligiblePair : public Error {
 public:
  using Error::Error;
};
class NoShufflePossible : public Error {
 public:
  using Error::Error;
};

// Names written and read by a statement, aggregated over nested statements.
// Element writes and reads of any array also add the pseudo-name kHeap, so
// that aliased arrays are never considered independent.
struct DefUseSets {
  std::set<std::string> defs;
  std::set<std::string> uses;
};

inline constexpr const char* kHeap = "[]";

DefUseSets def_use(const lang::Stmt& s);

// Two adjacent statements of one block, identified by their pre-order
// statement index within the method (the numbering used by SymbolTable
// sites).
struct StmtPair {
  std::string method;
  int first = 0;
  int second = 0;
  int first_line = 0;
  int second_line = 0;
  bool operator==(const StmtPair&) const = default;
};

// All adjacent same-block pairs whose def/use sets satisfy the three
// independence conditions. Statements containing a call or a return are
// never paired.
std::vector<StmtPair> find_independent_pairs(const lang::SourceUnit& unit);

// How clause text written against the original unit maps onto a variant.
struct Migration {
  std::map<lang::Anchor, lang::Anchor> anchors;
  std::map<std::string, std::string> var_renames;
  std::map<std::string, std::string> method_renames;
  // Renames that apply only to clauses at a given (variant) anchor.
  std::map<lang::Anchor, std::map<std::string, std::string>> local_renames;

  lang::Anchor apply(const lang::Anchor& a) const;
  lang::SpecClause apply(const lang::SpecClause& c) const;
  runtime::TestCase apply(const runtime::TestCase& t) const;
};

struct PerturbedUnit {
  PerturbKind kind;
  lang::SourceUnit unit;
  std::map<std::string, std::string> rename_map;  // empty for IfElseFlip and IndependentSwap
  std::map<std::size_t, std::size_t> spec_migration;  // original clause index -> variant clause index
  Migration migration;
  std::uint64_t seed = 0;

  nlohmann::json rename_map_json() const;
};

PerturbedUnit defuse_break(const lang::SourceUnit& unit, std::uint64_t seed);
PerturbedUnit ifelse_flip(const lang::SourceUnit& unit, std::uint64_t seed);
PerturbedUnit independent_swap(const lang::SourceUnit& unit, std::uint64_t seed);
PerturbedUnit name_random(const lang::SourceUnit& unit, std::uint64_t seed);
PerturbedUnit name_shuffle(const lang::SourceUnit& unit, std::uint64_t seed);

PerturbedUnit apply_perturbation(PerturbKind kind, const lang::SourceUnit& unit, std::uint64_t seed);

// Every identifier spelled in the unit: variables, methods, binders, class.
std::set<std::string> identifiers(const lang::SourceUnit& unit);

// Differential execution of the original and the variant on every test
// (test method names migrated). Returns one message per mismatch.
std::vector<std::string> preservation_mismatches(const lang::SourceUnit& original, const PerturbedUnit& variant,
                                                 const std::vector<runtime::TestCase>& tests);

}  // namespace jmlbench::perturb
