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

#include <gtest/gtest.h>

#include <climits>

#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/runtime/interpreter.hpp"
#include "jmlbench/util/error.hpp"
#include "test_util.hpp"

namespace jmlbench {
namespace {

using namespace runtime;
using lang::load_unit;
using lang::parse_clause;
using testing::load_all_programs;
using testing::load_program;

TestCase call(const std::string& method, std::vector<Value> args) { return TestCase{method, std::move(args), {}}; }

lang::SpecClause clause_at(const std::string& text, lang::Anchor anchor) {
  auto c = parse_clause(text);
  c.anchor = std::move(anchor);
  return c;
}

TEST(Execute, Palindrome) {
  const auto p = load_program("is_palindrome");
  EXPECT_EQ(*execute(p.unit, call("isPalindrome", {Value::of_string("aba")})).outcome.value, Value::of_bool(true));
  EXPECT_EQ(*execute(p.unit, call("isPalindrome", {Value::of_string("")})).outcome.value, Value::of_bool(true));
  EXPECT_EQ(*execute(p.unit, call("isPalindrome", {Value::of_string("abca")})).outcome.value, Value::of_bool(false));
}

TEST(Execute, StepLimitGuardsNontermination) {
  const auto u = load_unit("int spin() { while (true) { } }");
  const auto r = execute(u, call("spin", {}), 10000);
  ASSERT_TRUE(r.outcome.fault);
  EXPECT_EQ(r.outcome.fault->kind, FaultKind::kStepLimitExceeded);
}

TEST(Execute, WraparoundArithmetic) {
  const auto u = load_unit(
      "int add(int a, int b) { return a + b; }\n"
      "int mul(int a, int b) { return a * b; }\n"
      "int div(int a, int b) { return a / b; }\n"
      "int mod(int a, int b) { return a % b; }\n"
      "int neg(int a) { return -a; }\n");
  const auto run = [&](const char* m, std::vector<Value> args) {
    return execute(u, call(m, std::move(args))).outcome;
  };
  EXPECT_EQ(run("add", {Value::of_int(INT_MAX), Value::of_int(1)}).value->as_int(), INT_MIN);
  EXPECT_EQ(run("mul", {Value::of_int(65536), Value::of_int(65536)}).value->as_int(), 0);
  EXPECT_EQ(run("div", {Value::of_int(INT_MIN), Value::of_int(-1)}).value->as_int(), INT_MIN);
  EXPECT_EQ(run("div", {Value::of_int(-7), Value::of_int(2)}).value->as_int(), -3);
  EXPECT_EQ(run("mod", {Value::of_int(-7), Value::of_int(3)}).value->as_int(), -1);
  EXPECT_EQ(run("mod", {Value::of_int(INT_MIN), Value::of_int(-1)}).value->as_int(), 0);
  EXPECT_EQ(run("neg", {Value::of_int(INT_MIN)}).value->as_int(), INT_MIN);
}

TEST(Execute, FaultsCarryLocation) {
  const auto u = load_unit("int f(int a) {\n  int z = 0;\n  return a / z;\n}\nint g(int[] a) {\n  return a[3];\n}");
  const auto r = execute(u, call("f", {Value::of_int(1)})).outcome;
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->kind, FaultKind::kDivisionByZero);
  EXPECT_EQ(r.fault->line, 3);
  const auto r2 = execute(u, call("g", {Value::of_array({1, 2})})).outcome;
  ASSERT_TRUE(r2.fault);
  EXPECT_EQ(r2.fault->kind, FaultKind::kIndexOutOfBounds);
  EXPECT_EQ(r2.fault->line, 6);
}

TEST(Execute, ArraysAreShared) {
  const auto u = load_unit(
      "int fill(int[] a) { for (int i = 0; i < a.length; i++) { a[i] = i; } return 0; }\n"
      "int sum(int[] a) { int[] b = a; int z = fill(b); int s = z; for (int i = 0; i < a.length; i++) { s += a[i]; } return s; }");
  const auto r = execute(u, call("sum", {Value::of_array({9, 9, 9, 9})})).outcome;
  EXPECT_EQ(r.value->as_int(), 6);
  EXPECT_EQ(r.final_args[0], Value::of_array({0, 1, 2, 3}));
}

TEST(Execute, RecursionDepthIsBounded) {
  const auto u = load_unit("int down(int n) { return down(n + 1); }");
  const auto r = execute(u, call("down", {Value::of_int(0)})).outcome;
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->kind, FaultKind::kStackOverflow);
}

TEST(Execute, TestArityChecked) {
  const auto p = load_program("add");
  EXPECT_THROW(execute(p.unit, call("add", {Value::of_int(1)})), TypeError);
  EXPECT_THROW(execute(p.unit, call("add", {Value::of_int(1), Value::of_bool(true)})), TypeError);
  EXPECT_THROW(execute(p.unit, call("nope", {})), TypeError);
}

TEST(Execute, Deterministic) {
  for (const auto& p : load_all_programs()) {
    for (const auto& t : p.tests) {
      const auto a = execute(p.unit, t);
      const auto b = execute(p.unit, t);
      EXPECT_EQ(a.outcome.to_json(), b.outcome.to_json());
      EXPECT_EQ(a.coverage.to_json(), b.coverage.to_json());
    }
  }
}

// Expected values in the corpus suites come from independent reference
// implementations.
TEST(Execute, MatchesReferenceOutputsOverCorpus) {
  for (const auto& p : load_all_programs()) {
    SCOPED_TRACE(p.id);
    for (const auto& t : p.tests) {
      const auto r = execute(p.unit, t).outcome;
      ASSERT_TRUE(r.ok()) << r.fault->to_string();
      if (t.expected) {
        ASSERT_TRUE(r.value);
        EXPECT_EQ(*r.value, *t.expected) << t.to_json().dump();
      }
    }
  }
}

TEST(CheckSpecs, PalindromeAllCorrect) {
  const auto p = load_program("is_palindrome");
  const auto report = check_specs(p.unit, p.tests);
  ASSERT_EQ(report.verdicts.size(), 5u);
  for (const auto& v : report.verdicts) {
    EXPECT_TRUE(v.correct) << lang::print_clause(v.clause);
    EXPECT_FALSE(v.counterexample);
  }
}

TEST(CheckSpecs, EnsuresTrueAlwaysHolds) {
  for (const auto& p : load_all_programs()) {
    for (const auto& m : p.unit.methods) {
      EXPECT_TRUE(check_clause_correct(p.unit, clause_at("ensures true;", {m.name}), p.tests).correct);
    }
  }
}

TEST(CheckSpecs, WeakenedIffIsRefutedAndReplays) {
  const auto p = load_program("is_palindrome");
  const auto c = clause_at(
      "ensures \\result ==> (\\forall int i; 0 <= i && i < s.length(); s.charAt(i) == s.charAt(s.length() - 1 - i));",
      {"isPalindrome"});
  // Weakening to ==> is still valid; the converse direction is refuted by a
  // non-palindrome returning false.
  EXPECT_TRUE(check_clause_correct(p.unit, c, p.tests).correct);
  const auto converse = clause_at(
      "ensures (\\forall int i; 0 <= i && i < s.length(); s.charAt(i) == s.charAt(s.length() - 1 - i)) ==> !\\result;",
      {"isPalindrome"});
  const auto v = check_clause_correct(p.unit, converse, p.tests);
  ASSERT_FALSE(v.correct);
  ASSERT_TRUE(v.counterexample);
  const auto replay = evaluate_spec(converse.expr, p.unit, v.counterexample->snapshot);
  ASSERT_TRUE(std::holds_alternative<bool>(replay));
  EXPECT_FALSE(std::get<bool>(replay));
}

TEST(CheckSpecs, CounterexamplesReplayToFalse) {
  for (const auto& p : load_all_programs()) {
    for (const auto& gt : p.unit.specs) {
      // Negating a valid clause must be refuted on any state where it is checked.
      auto neg = gt;
      neg.expr = lang::make_unary(lang::UnaryOp::kNot, gt.expr);
      const auto v = check_clause_correct(p.unit, neg, p.tests);
      ASSERT_FALSE(v.correct) << p.id << ": " << lang::print_clause(neg);
      const auto replay = evaluate_spec(neg.expr, p.unit, v.counterexample->snapshot);
      if (v.counterexample->fault) {
        EXPECT_TRUE(std::holds_alternative<Fault>(replay));
      } else {
        ASSERT_TRUE(std::holds_alternative<bool>(replay));
        EXPECT_FALSE(std::get<bool>(replay));
      }
    }
  }
}

TEST(CheckSpecs, SpecFaultIsFalsification) {
  const auto p = load_program("array_max");
  const auto v = check_clause_correct(p.unit, clause_at("ensures a[5] == a[5];", {"arrayMax"}), p.tests);
  ASSERT_FALSE(v.correct);
  ASSERT_TRUE(v.counterexample->fault);
  EXPECT_EQ(v.counterexample->fault->kind, FaultKind::kIndexOutOfBounds);
}

TEST(CheckSpecs, QuantifierBudget) {
  const auto p = load_program("add");
  const auto v = check_clause_correct(
      p.unit, clause_at("ensures (\\forall int i; 0 <= i && i < Integer.MAX_VALUE; i >= 0);", {"add"}), p.tests);
  ASSERT_FALSE(v.correct);
  EXPECT_EQ(v.counterexample->fault->kind, FaultKind::kQuantifierBudget);
}

TEST(CheckSpecs, ViolatedPreconditionSkipsPostconditions) {
  const auto u = load_unit(
      "//@ requires x > 0;\n//@ ensures \\result == x;\n//@ ensures \\result > 0;\n"
      "int f(int x) { return x; }");
  const std::vector<TestCase> tests = {call("f", {Value::of_int(3)}), call("f", {Value::of_int(-2)}),
                                       call("f", {Value::of_int(5)})};
  const auto report = check_specs(u, tests);
  ASSERT_EQ(report.verdicts.size(), 3u);
  EXPECT_FALSE(report.verdicts[0].correct);
  EXPECT_EQ(report.verdicts[0].counterexample->site, "entry of f");
  EXPECT_TRUE(report.verdicts[1].correct);
  EXPECT_TRUE(report.verdicts[2].correct);  // the -2 case was skipped
  EXPECT_EQ(report.verdicts[2].skips, 1);
  EXPECT_EQ(report.verdicts[2].evaluations, 2);
  EXPECT_EQ(report.log.size(), 1u);
}

TEST(CheckSpecs, EvaluationsPlusSkipsEqualEncounters) {
  for (const auto& p : load_all_programs()) {
    const auto report = check_specs(p.unit, p.tests);
    for (const auto& v : report.verdicts) {
      EXPECT_EQ(v.evaluations + v.skips, v.encounters) << p.id;
      EXPECT_GT(v.encounters, 0) << p.id << ": clause never checked " << lang::print_clause(v.clause);
    }
  }
}

TEST(CheckSpecs, OldCapturesEntryState) {
  const auto p = load_program("add_one");
  EXPECT_TRUE(check_specs(p.unit, p.tests).all_correct());
  const auto wrong = clause_at("ensures (\\forall int i; 0 <= i && i < a.length; a[i] == \\old(a[i]));", {"addOne"});
  EXPECT_FALSE(check_clause_correct(p.unit, wrong, p.tests).correct);
}

TEST(CheckSpecs, LoopInvariantCheckedOnExit) {
  const auto p = load_program("sum_to");
  // Holds inside the body but fails once i == n + 1 on exit.
  const auto c = clause_at("loop_invariant i <= n;", {"sumTo", 0});
  std::vector<TestCase> positive;
  for (const auto& t : p.tests) {
    if (t.args[0].as_int() > 0) positive.push_back(t);
  }
  const auto v = check_clause_correct(p.unit, c, positive);
  ASSERT_FALSE(v.correct);
  EXPECT_NE(v.counterexample->site.find("after iteration"), std::string::npos);
}

TEST(CheckSpecs, CorpusGroundTruthValid) {
  for (const auto& p : load_all_programs()) {
    const auto report = check_specs(p.unit, p.tests);
    for (const auto& v : report.verdicts) {
      EXPECT_TRUE(v.correct) << p.id << ": " << lang::print_clause(v.clause) << " "
                             << (v.counterexample ? v.counterexample->to_json().dump() : "");
    }
  }
}

TEST(CheckEquivalence, CommutedArithmetic) {
  const auto p = load_program("add");
  EXPECT_TRUE(check_equivalence(clause_at("ensures \\result == a + b;", {"add"}),
                                clause_at("ensures \\result == b + a;", {"add"}), p.unit, p.tests));
}

TEST(CheckEquivalence, ReflexiveOnGroundTruth) {
  for (const auto& p : load_all_programs()) {
    for (const auto& c : p.unit.specs) EXPECT_TRUE(check_equivalence(c, c, p.unit, p.tests)) << p.id;
  }
}

TEST(CheckEquivalence, PostconditionVsTrue) {
  const auto p = load_program("is_palindrome");
  const lang::SpecClause* post = nullptr;
  for (const auto& c : p.unit.specs) {
    if (c.kind == lang::SpecKind::kEnsures) post = &c;
  }
  ASSERT_NE(post, nullptr);
  const auto t = clause_at("ensures true;", {"isPalindrome"});
  EXPECT_FALSE(check_equivalence(*post, t, p.unit, p.tests));
  EXPECT_FALSE(check_equivalence(t, *post, p.unit, p.tests));
}

TEST(CheckEquivalence, NontrivialGroundTruthDiffersFromTrue) {
  for (const char* id : {"int_square", "add_one", "fizz_buzz", "array_max"}) {
    const auto p = load_program(id);
    for (const auto& c : p.unit.specs) {
      if (c.kind == lang::SpecKind::kRequires) continue;
      auto t = c;
      t.expr = lang::make_bool(true);
      EXPECT_FALSE(check_equivalence(c, t, p.unit, p.tests)) << id << ": " << lang::print_clause(c);
    }
  }
}

TEST(CheckEquivalence, LogicalRewritesAreEquivalent) {
  const auto p = load_program("fizz_buzz");
  const lang::Anchor at{"fizzBuzz"};
  EXPECT_TRUE(check_equivalence(clause_at("ensures \\result == 5 <==> n % 5 == 0 && n % 3 != 0;", at),
                                clause_at("ensures n % 3 != 0 && 0 == n % 5 <==> 5 == \\result;", at), p.unit,
                                p.tests));
  EXPECT_FALSE(check_equivalence(clause_at("ensures \\result == 5 <==> n % 5 == 0 && n % 3 != 0;", at),
                                 clause_at("ensures \\result == 5 ==> n % 5 == 0 && n % 3 != 0;", at), p.unit,
                                 p.tests));
}

TEST(CheckEquivalence, SymmetricAndTransitiveOnFixtures) {
  const auto p = load_program("clamp");
  const lang::Anchor at{"clamp"};
  const std::vector<lang::SpecClause> cs = {
      clause_at("ensures lo <= \\result && \\result <= hi;", at),
      clause_at("ensures \\result <= hi && lo <= \\result;", at),
      clause_at("ensures !(\\result < lo || \\result > hi);", at),
      clause_at("ensures \\result >= lo;", at),
      clause_at("ensures true;", at),
  };
  for (const auto& a : cs) {
    for (const auto& b : cs) {
      const bool ab = check_equivalence(a, b, p.unit, p.tests);
      EXPECT_EQ(ab, check_equivalence(b, a, p.unit, p.tests));
      for (const auto& c : cs) {
        if (ab && check_equivalence(b, c, p.unit, p.tests)) EXPECT_TRUE(check_equivalence(a, c, p.unit, p.tests));
      }
    }
  }
  EXPECT_TRUE(check_equivalence(cs[0], cs[2], p.unit, p.tests));
  EXPECT_FALSE(check_equivalence(cs[0], cs[3], p.unit, p.tests));
}

TEST(CheckEquivalence, AnchorMismatch) {
  const auto p = load_program("is_palindrome");
  EXPECT_THROW(check_equivalence(clause_at("ensures true;", {"isPalindrome"}),
                                 clause_at("requires true;", {"isPalindrome"}), p.unit, p.tests),
               AnchorMismatch);
  EXPECT_THROW(check_equivalence(clause_at("loop_invariant true;", {"isPalindrome", 0}),
                                 clause_at("loop_invariant true;", {"isPalindrome", 1}), p.unit, p.tests),
               AnchorMismatch);
}

TEST(Coverage, FizzBuzzFourInputsCoverAllBranches) {
  const auto p = load_program("fizz_buzz");
  std::vector<TestCase> tests;
  for (int n : {3, 5, 15, 7}) tests.push_back(call("fizzBuzz", {Value::of_int(n)}));
  const auto cov = measure_coverage(p.unit, tests);
  EXPECT_DOUBLE_EQ(cov.branch_coverage(), 1.0);
  EXPECT_DOUBLE_EQ(cov.line_coverage(), 1.0);
  const auto partial = measure_coverage(p.unit, {call("fizzBuzz", {Value::of_int(7)})});
  EXPECT_LT(partial.branch_coverage(), 1.0);
}

TEST(Coverage, StraightLineIsVacuouslyCovered) {
  const auto p = load_program("cube");
  const auto cov = measure_coverage(p.unit, {p.tests.front()});
  EXPECT_TRUE(cov.branch_sites.empty());
  EXPECT_DOUBLE_EQ(cov.branch_coverage(), 1.0);
  EXPECT_DOUBLE_EQ(cov.line_coverage(), 1.0);
}

TEST(Coverage, CorpusAverageBranchCoverage) {
  double total = 0;
  const auto programs = load_all_programs();
  for (const auto& p : programs) {
    const double b = measure_coverage(p.unit, p.tests).branch_coverage();
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
    total += b;
  }
  EXPECT_GE(total / static_cast<double>(programs.size()), 0.90);
}

TEST(Coverage, MonotoneInTests) {
  for (const auto& p : load_all_programs()) {
    double line = 0, branch = 0;
    std::vector<TestCase> prefix;
    for (const auto& t : p.tests) {
      prefix.push_back(t);
      const auto cov = measure_coverage(p.unit, prefix);
      EXPECT_GE(cov.line_coverage(), line);
      EXPECT_GE(cov.branch_coverage(), branch);
      line = cov.line_coverage();
      branch = cov.branch_coverage();
    }
  }
}

TEST(Coverage, MergeIsAssociativeAndCommutative) {
  const auto p = load_program("grade");
  const auto a = execute(p.unit, p.tests[0]).coverage;
  const auto b = execute(p.unit, p.tests[3]).coverage;
  const auto c = execute(p.unit, p.tests[9]).coverage;
  auto ab_c = a;
  ab_c.merge(b);
  ab_c.merge(c);
  auto bc = b;
  bc.merge(c);
  auto a_bc = a;
  a_bc.merge(bc);
  auto cba = c;
  cba.merge(b);
  cba.merge(a);
  EXPECT_EQ(ab_c.to_json(), a_bc.to_json());
  EXPECT_EQ(ab_c.to_json(), cba.to_json());
}

TEST(Values, JsonRoundTrip) {
  const std::vector<Value> vals = {Value::of_int(-5), Value::of_bool(true), Value::of_array({1, -2, 3}),
                                   Value::of_array({}), Value::of_string("a\"b")};
  for (const auto& v : vals) EXPECT_EQ(value_from_json(to_json(v)), v);
  EXPECT_THROW(value_from_json(nlohmann::json(1.5)), Error);
  EXPECT_THROW(value_from_json(nlohmann::json(4294967296LL)), Error);
  const auto tests = parse_tests_jsonl("{\"method\": \"f\", \"args\": [1, [2], \"x\"], \"expected\": true}\n\n");
  ASSERT_EQ(tests.size(), 1u);
  EXPECT_EQ(parse_tests_jsonl(write_tests_jsonl(tests))[0].to_json(), tests[0].to_json());
}

}  // namespace
}  // namespace jmlbench
