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

#include "jmlbench/runtime/checker.hpp"

#include <algorithm>

#include "jmlbench/util/error.hpp"
#include "machine.hpp"

namespace jmlbench::runtime {

using nlohmann::json;

json Counterexample::to_json() const {
  json j;
  j["test"] = test.to_json();
  j["state"] = snapshot.to_json();
  j["site"] = site;
  if (fault) j["fault"] = fault->to_string();
  return j;
}

bool CheckReport::all_correct() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const SpecVerdict& v) { return v.correct; });
}

CheckReport check_specs(const lang::SourceUnit& unit, const std::vector<TestCase>& tests,
                        const CheckOptions& options) {
  detail::Monitor monitor(unit);
  for (const auto& t : tests) {
    if (options.stop_when_all_refuted && !monitor.verdicts.empty() && monitor.all_refuted()) break;
    check_test_arity(unit, t);
    monitor.test = &t;
    detail::Machine machine(unit, options.step_limit, nullptr, &monitor);
    const ExecOutcome out = machine.run(t);
    if (out.fault) monitor.log.push_back("test " + t.to_json().dump() + ": program fault " + out.fault->to_string());
  }
  return CheckReport{std::move(monitor.verdicts), std::move(monitor.log)};
}

SpecVerdict check_clause_correct(const lang::SourceUnit& unit, const lang::SpecClause& clause,
                                 const std::vector<TestCase>& tests, const CheckOptions& options) {
  lang::SourceUnit single = unit;
  single.specs = {clause};
  CheckOptions opts = options;
  opts.stop_when_all_refuted = true;
  return check_specs(single, tests, opts).verdicts.front();
}

std::vector<StateSnapshot> collect_site_states(const lang::SourceUnit& unit, const lang::Anchor& anchor,
                                               lang::SpecKind kind, const std::vector<TestCase>& tests,
                                               std::int64_t step_limit) {
  lang::SourceUnit bare = unit;
  bare.specs.clear();
  detail::Monitor monitor(bare);
  detail::SiteRecorder recorder{anchor, kind, {}};
  monitor.recorder = &recorder;
  for (const auto& t : tests) {
    check_test_arity(bare, t);
    monitor.test = &t;
    detail::Machine machine(bare, step_limit, nullptr, &monitor);
    machine.run(t);
  }
  return std::move(recorder.states);
}

namespace {

std::int32_t nudge(std::int32_t x, int d) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(x) + static_cast<std::uint32_t>(d));
}

std::vector<Value> variations(const Value& v) {
  std::vector<Value> out;
  if (v.is_int()) {
    out.push_back(Value::of_int(nudge(v.as_int(), 1)));
    out.push_back(Value::of_int(nudge(v.as_int(), -1)));
  } else if (v.is_bool()) {
    out.push_back(Value::of_bool(!v.as_bool()));
  } else if (v.is_array()) {
    auto xs = *v.as_array();
    if (!xs.empty()) {
      auto changed = xs;
      changed[0] = nudge(changed[0], 1);
      out.push_back(Value::of_array(std::move(changed)));
      auto last = xs;
      last.back() = nudge(last.back(), -1);
      out.push_back(Value::of_array(std::move(last)));
    }
    xs.push_back(0);
    out.push_back(Value::of_array(std::move(xs)));
  } else {
    std::string s = v.as_string();
    if (!s.empty()) {
      auto changed = s;
      changed[0] = changed[0] == 'a' ? 'b' : 'a';
      out.push_back(Value::of_string(std::move(changed)));
    }
    s.push_back('a');
    out.push_back(Value::of_string(std::move(s)));
  }
  return out;
}

}  // namespace

std::vector<StateSnapshot> neighbour_states(const StateSnapshot& state) {
  std::vector<StateSnapshot> out;
  for (const auto& [name, value] : state.vars) {
    for (auto& alt : variations(value)) {
      StateSnapshot s = state;
      s.vars[name] = std::move(alt);
      out.push_back(std::move(s));
    }
  }
  if (state.result) {
    for (auto& alt : variations(*state.result)) {
      StateSnapshot s = state;
      s.result = std::move(alt);
      out.push_back(std::move(s));
    }
  }
  return out;
}

bool check_equivalence(const lang::SpecClause& a, const lang::SpecClause& b, const lang::SourceUnit& unit,
                       const std::vector<TestCase>& tests, const CheckOptions& options) {
  if (a.kind != b.kind || a.anchor != b.anchor) {
    throw AnchorMismatch("cannot compare " + std::string(lang::spec_keyword(a.kind)) + " at " +
                         a.anchor.to_string() + " with " + lang::spec_keyword(b.kind) + " at " +
                         b.anchor.to_string());
  }
  if (a.expr == b.expr) return true;
  const auto holds = [&](const lang::Expr& e, const StateSnapshot& s) {
    const auto r = evaluate_spec(e, unit, s, options.step_limit);
    return std::holds_alternative<bool>(r) && std::get<bool>(r);
  };
  const auto agree = [&](const StateSnapshot& s) { return holds(a.expr, s) == holds(b.expr, s); };
  const auto states = collect_site_states(unit, a.anchor, a.kind, tests, options.step_limit);
  for (const auto& s : states) {
    if (!agree(s)) return false;
  }
  for (const auto& s : states) {
    for (const auto& n : neighbour_states(s)) {
      if (!agree(n)) return false;
    }
  }
  return true;
}

std::variant<bool, Fault> evaluate_spec(const lang::Expr& expr, const lang::SourceUnit& unit,
                                        const StateSnapshot& state, std::int64_t step_limit) {
  // Clauses cannot assign and calls they make receive copies, so the state
  // is read in place.
  detail::Machine machine(unit, step_limit, nullptr, nullptr);
  detail::Ctx ctx{nullptr, &state.vars, state.result ? &*state.result : nullptr,
                  state.old ? &*state.old : nullptr};
  bool value = false;
  if (auto f = machine.eval_clause(expr, ctx, value)) return *f;
  return value;
}

}  // namespace jmlbench::runtime
