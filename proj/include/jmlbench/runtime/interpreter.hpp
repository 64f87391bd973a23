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

namespace jmlbench::runtime {

inline constexpr std::int64_t kDefaultStepLimit = 1'000'000;

enum class FaultKind {
  kStepLimitExceeded,
  kDivisionByZero,
  kIndexOutOfBounds,
  kStackOverflow,
  kMissingReturn,
  kQuantifierBudget,
};

const char* fault_name(FaultKind k);

struct Fault {
  FaultKind kind;
  int line = 0;
  std::string message;

  std::string to_string() const;
};

struct ExecOutcome {
  std::optional<Value> value;     // absent for void methods and on fault
  std::vector<Value> final_args;  // argument values after the call (arrays may be mutated)
  std::optional<Fault> fault;
  std::int64_t steps = 0;

  bool ok() const { return !fault.has_value(); }
  nlohmann::json to_json() const;
};

// Observable equality: same fault kind, or same return value and same final
// argument contents.
bool same_behavior(const ExecOutcome& a, const ExecOutcome& b);

struct BranchCount {
  std::int64_t true_taken = 0;
  std::int64_t false_taken = 0;
};

// Lines are statement lines; branch sites are the lines of if/while/for
// conditions. `lines` and `branch_sites` hold the full static universe.
struct CoverageReport {
  std::map<int, std::int64_t> line_hits;
  std::map<int, BranchCount> branch_outcomes;
  std::set<int> lines;
  std::set<int> branch_sites;

  // Both are 1.0 when the universe is empty.
  double line_coverage() const;
  double branch_coverage() const;  // covered outcomes over 2 per site

  // Associative and commutative.
  void merge(const CoverageReport& other);
  nlohmann::json to_json() const;
};

// Empty report carrying the static line and branch-site universe of a unit.
CoverageReport coverage_universe(const lang::SourceUnit& unit);

struct ExecResult {
  ExecOutcome outcome;
  CoverageReport coverage;
};

// Runs one test without checking specifications. Deterministic.
// Throws TypeError when the test does not match the target method.
ExecResult execute(const lang::SourceUnit& unit, const TestCase& test,
                   std::int64_t step_limit = kDefaultStepLimit);

// Union of per-test coverage; faulting tests still contribute what they hit.
CoverageReport measure_coverage(const lang::SourceUnit& unit, const std::vector<TestCase>& tests,
                                std::int64_t step_limit = kDefaultStepLimit);

}  // namespace jmlbench::runtime
