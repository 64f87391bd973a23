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

#include "jmlbench/runtime/interpreter.hpp"

#include "jmlbench/lang/ast_util.hpp"
#include "machine.hpp"

namespace jmlbench::runtime {

using nlohmann::json;

const char* fault_name(FaultKind k) {
  switch (k) {
    case FaultKind::kStepLimitExceeded: return "StepLimitExceeded";
    case FaultKind::kDivisionByZero: return "DivisionByZero";
    case FaultKind::kIndexOutOfBounds: return "IndexOutOfBounds";
    case FaultKind::kStackOverflow: return "StackOverflow";
    case FaultKind::kMissingReturn: return "MissingReturn";
    case FaultKind::kQuantifierBudget: return "QuantifierBudget";
  }
  return "?";
}

std::string Fault::to_string() const {
  return std::string(fault_name(kind)) + " at line " + std::to_string(line) + ": " + message;
}

json ExecOutcome::to_json() const {
  json j;
  if (fault) {
    j["fault"] = {{"kind", fault_name(fault->kind)}, {"line", fault->line}, {"message", fault->message}};
  } else if (value) {
    j["value"] = runtime::to_json(*value);
  } else {
    j["value"] = nullptr;
  }
  j["final_args"] = json::array();
  for (const auto& a : final_args) j["final_args"].push_back(runtime::to_json(a));
  return j;
}

bool same_behavior(const ExecOutcome& a, const ExecOutcome& b) {
  if (a.fault || b.fault) return a.fault && b.fault && a.fault->kind == b.fault->kind;
  return a.value == b.value && a.final_args == b.final_args;
}

double CoverageReport::line_coverage() const {
  if (lines.empty()) return 1.0;
  std::size_t hit = 0;
  for (int l : lines) {
    auto it = line_hits.find(l);
    if (it != line_hits.end() && it->second > 0) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(lines.size());
}

double CoverageReport::branch_coverage() const {
  if (branch_sites.empty()) return 1.0;
  std::size_t covered = 0;
  for (int site : branch_sites) {
    auto it = branch_outcomes.find(site);
    if (it == branch_outcomes.end()) continue;
    covered += (it->second.true_taken > 0) + (it->second.false_taken > 0);
  }
  return static_cast<double>(covered) / static_cast<double>(2 * branch_sites.size());
}

void CoverageReport::merge(const CoverageReport& other) {
  for (const auto& [l, n] : other.line_hits) line_hits[l] += n;
  for (const auto& [l, b] : other.branch_outcomes) {
    branch_outcomes[l].true_taken += b.true_taken;
    branch_outcomes[l].false_taken += b.false_taken;
  }
  lines.insert(other.lines.begin(), other.lines.end());
  branch_sites.insert(other.branch_sites.begin(), other.branch_sites.end());
}

json CoverageReport::to_json() const {
  json j;
  j["line_coverage"] = line_coverage();
  j["branch_coverage"] = branch_coverage();
  j["line_hits"] = json::object();
  for (const auto& [l, n] : line_hits) j["line_hits"][std::to_string(l)] = n;
  j["branch_outcomes"] = json::object();
  for (const auto& [l, b] : branch_outcomes) {
    j["branch_outcomes"][std::to_string(l)] = {{"true_taken", b.true_taken}, {"false_taken", b.false_taken}};
  }
  return j;
}

CoverageReport coverage_universe(const lang::SourceUnit& unit) {
  CoverageReport r;
  for (const auto& m : unit.methods) {
    lang::visit_stmts(m.body, [&](const lang::Stmt& s) {
      r.lines.insert(s.line);
      if (s.is<lang::If>() || s.is<lang::While>() || (s.is<lang::For>() && s.as<lang::For>().cond)) {
        r.branch_sites.insert(s.line);
      }
    });
  }
  return r;
}

ExecResult execute(const lang::SourceUnit& unit, const TestCase& test, std::int64_t step_limit) {
  check_test_arity(unit, test);
  ExecResult r;
  r.coverage = coverage_universe(unit);
  detail::Machine machine(unit, step_limit, &r.coverage, nullptr);
  r.outcome = machine.run(test);
  return r;
}

CoverageReport measure_coverage(const lang::SourceUnit& unit, const std::vector<TestCase>& tests,
                                std::int64_t step_limit) {
  CoverageReport total = coverage_universe(unit);
  for (const auto& t : tests) total.merge(execute(unit, t, step_limit).coverage);
  return total;
}

}  // namespace jmlbench::runtime
