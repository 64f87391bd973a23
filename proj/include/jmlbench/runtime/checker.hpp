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

#include <json.hpp>

#include "jmlbench/lang/ast.hpp"
#include "jmlbench/runtime/interpreter.hpp"
#include "jmlbench/runtime/value.hpp"

namespace jmlbench::runtime {

// Upper bound on quantifier iterations within one clause evaluation.
inline constexpr std::int64_t kQuantifierBudget = 1'000'000;

struct Counterexample {
  TestCase test;
  StateSnapshot snapshot;
  std::string site;             // e.g. "entry of f", "return of f", "f#loop1 after iteration 3"
  std::optional<Fault> fault;   // set when the clause itself faulted

  nlohmann::json to_json() const;
};

struct SpecVerdict {
  std::size_t spec = 0;  // index into unit.specs
  lang::SpecClause clause;
  bool correct = true;
  std::optional<Counterexample> counterexample;
  std::int64_t encounters = 0;
  std::int64_t evaluations = 0;
  std::int64_t skips = 0;  // ensures not evaluated because a requires failed
};

struct CheckOptions {
  std::int64_t step_limit = kDefaultStepLimit;
  // Stop running tests once every clause is refuted.
  bool stop_when_all_refuted = false;
};

struct CheckReport {
  std::vector<SpecVerdict> verdicts;  // one per clause, in unit.specs order
  std::vector<std::string> log;       // skipped obligations and program faults

  bool all_correct() const;
};

// Runtime-checks every clause of the unit against the tests. Requires are
// checked at every invocation entry, ensures at every return, loop
// invariants before the first iteration and after each iteration.
CheckReport check_specs(const lang::SourceUnit& unit, const std::vector<TestCase>& tests,
                        const CheckOptions& options = {});

// Cr of a single clause: checks it alone on the unit's program.
SpecVerdict check_clause_correct(const lang::SourceUnit& unit, const lang::SpecClause& clause,
                                 const std::vector<TestCase>& tests,
                                 const CheckOptions& options = {});

// States reached at the check site of (anchor, kind) over the tests, in
// execution order. Clauses in the unit are ignored.
std::vector<StateSnapshot> collect_site_states(const lang::SourceUnit& unit, const lang::Anchor& anchor,
                                               lang::SpecKind kind, const std::vector<TestCase>& tests,
                                               std::int64_t step_limit = kDefaultStepLimit);

// Single-variable variations of a state: each visible variable and \result
// in turn is nudged (ints by +-1, booleans negated, one array element or
// string character changed, arrays and strings extended by one). The
// pre-state is left as is.
std::vector<StateSnapshot> neighbour_states(const StateSnapshot& state);

// Checks `a <==> b` at their shared anchor on every reached state and on
// the neighbours of each reached state. A clause that faults reads as false,
// which keeps the relation reflexive. Throws AnchorMismatch.
bool check_equivalence(const lang::SpecClause& a, const lang::SpecClause& b,
                       const lang::SourceUnit& unit, const std::vector<TestCase>& tests,
                       const CheckOptions& options = {});

// Evaluates a clause expression on a recorded state. Calls to program
// methods run on `unit`. Returns the truth value or the fault raised.
std::variant<bool, Fault> evaluate_spec(const lang::Expr& expr, const lang::SourceUnit& unit,
                                        const StateSnapshot& state,
                                        std::int64_t step_limit = kDefaultStepLimit);

}  // namespace jmlbench::runtime
