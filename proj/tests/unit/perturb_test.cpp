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

#include <functional>
#include <regex>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/perturb/perturb.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/runtime/interpreter.hpp"
#include "test_util.hpp"

namespace jmlbench {
namespace {

using namespace perturb;
using lang::load_unit;
using lang::print_clause;
using lang::print_unit;
using lang::SourceUnit;
using testing::load_all_programs;
using testing::load_program;

// The pair sits on lines 4 and 5, as in the usual illustration of the swap.
constexpr const char* kSwapDigits =
    "//@ requires 0 <= x && x <= 9 && 0 <= y && y <= 9;\n"
    "//@ ensures \\result == y * 10 + x;\n"
    "public static int swapDigits(int x, int y) {\n"
    "    int num1 = x;\n"
    "    int num2 = y;\n"
    "    int temp = num1;\n"
    "    num1 = num2;\n"
    "    num2 = temp;\n"
    "    return num1 * 10 + num2;\n"
    "}\n";

std::vector<runtime::TestCase> migrate(const PerturbedUnit& v, const std::vector<runtime::TestCase>& tests) {
  std::vector<runtime::TestCase> out;
  for (const auto& t : tests) out.push_back(v.migration.apply(t));
  return out;
}

// Runs fn on every (program, kind, seed) combination that is eligible.
void for_each_variant(const std::function<void(const testing::Program&, const PerturbedUnit&)>& fn) {
  for (const auto& p : load_all_programs()) {
    for (auto kind : kAllKinds) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        try {
          fn(p, apply_perturbation(kind, p.unit, seed));
        } catch (const NoEligibleVariable&) {
        } catch (const NoEligibleBranch&) {
        } catch (const NoEligiblePair&) {
        } catch (const NoShufflePossible&) {
        }
      }
    }
  }
}

TEST(Perturb, SemanticsPreservedOverCorpus) {
  int variants = 0;
  for_each_variant([&](const testing::Program& p, const PerturbedUnit& v) {
    ++variants;
    const auto mismatches = preservation_mismatches(p.unit, v, p.tests);
    EXPECT_TRUE(mismatches.empty()) << p.id << " " << kind_name(v.kind) << ": " << mismatches.front();
  });
  EXPECT_GT(variants, 24 * 3);
}

TEST(Perturb, MigratedSpecsRemainCorrect) {
  for_each_variant([&](const testing::Program& p, const PerturbedUnit& v) {
    const auto report = runtime::check_specs(v.unit, migrate(v, p.tests));
    for (const auto& verdict : report.verdicts) {
      EXPECT_TRUE(verdict.correct) << p.id << " " << kind_name(v.kind) << ": " << print_clause(verdict.clause)
                                   << "\n"
                                   << print_unit(v.unit);
    }
  });
}

TEST(Perturb, SpecMigrationAgreesWithMigration) {
  for_each_variant([&](const testing::Program& p, const PerturbedUnit& v) {
    ASSERT_EQ(v.spec_migration.size(), p.unit.specs.size());
    for (const auto& [from, to] : v.spec_migration) {
      const auto migrated = v.migration.apply(p.unit.specs[from]);
      EXPECT_EQ(print_clause(migrated), print_clause(v.unit.specs[to])) << p.id << " " << kind_name(v.kind);
      EXPECT_EQ(migrated.anchor, v.unit.specs[to].anchor) << p.id << " " << kind_name(v.kind);
    }
  });
}

TEST(Perturb, VariantsRoundTripThroughText) {
  for_each_variant([&](const testing::Program& p, const PerturbedUnit& v) {
    const auto text = print_unit(v.unit);
    EXPECT_EQ(print_unit(load_unit(text)), text) << p.id << " " << kind_name(v.kind);
  });
}

TEST(Perturb, SeedDeterminism) {
  const auto p = load_program("swap_digits");
  for (auto kind : kAllKinds) {
    if (kind == PerturbKind::kIfElseFlip) continue;
    const auto a = apply_perturbation(kind, p.unit, 42);
    const auto b = apply_perturbation(kind, p.unit, 42);
    EXPECT_EQ(print_unit(a.unit), print_unit(b.unit));
    EXPECT_EQ(a.rename_map, b.rename_map);
    EXPECT_EQ(a.seed, 42u);
  }
  std::set<std::string> distinct;
  for (std::uint64_t seed = 0; seed < 8; ++seed) distinct.insert(print_unit(name_random(p.unit, seed).unit));
  EXPECT_EQ(distinct.size(), 8u);
}

TEST(Perturb, FreshNameShape) {
  const std::regex shape("[A-Za-z][A-Za-z0-9]{4}");
  for (const auto& p : load_all_programs()) {
    const auto before = identifiers(p.unit);
    for (std::uint64_t seed : {5u, 6u}) {
      const auto v = name_random(p.unit, seed);
      std::set<std::string> images;
      for (const auto& [from, to] : v.rename_map) {
        EXPECT_TRUE(std::regex_match(to, shape)) << to;
        EXPECT_FALSE(before.count(to)) << to;
        images.insert(to);
      }
      EXPECT_EQ(images.size(), v.rename_map.size());
      EXPECT_EQ(v.unit.name, p.unit.name);
      for (const auto& m : v.unit.methods) EXPECT_TRUE(std::regex_match(m.name, shape)) << m.name;
      try {
        for (const auto& [from, to] : defuse_break(p.unit, seed).rename_map) {
          EXPECT_TRUE(std::regex_match(to, shape)) << to;
          EXPECT_FALSE(before.count(to)) << to;
        }
      } catch (const NoEligibleVariable&) {
      }
    }
  }
}

TEST(NameRandom, MethodWithoutVariables) {
  const auto u = load_unit("int seven() { return 7; }");
  const auto v = name_random(u, 1);
  ASSERT_EQ(v.rename_map.size(), 1u);
  EXPECT_EQ(v.rename_map.begin()->first, "seven");
  EXPECT_EQ(v.unit.methods[0].name, v.rename_map.begin()->second);
}

TEST(NameShuffle, PermutationAndNeverIdentity) {
  for (const auto& p : load_all_programs()) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      PerturbedUnit v;
      try {
        v = name_shuffle(p.unit, seed);
      } catch (const NoShufflePossible&) {
        continue;
      }
      std::set<std::string> keys, values;
      bool moved = false;
      for (const auto& [from, to] : v.rename_map) {
        keys.insert(from);
        values.insert(to);
        moved = moved || from != to;
      }
      EXPECT_EQ(keys, values) << p.id;
      EXPECT_TRUE(moved) << p.id;
    }
  }
}

TEST(NameShuffle, TwoLocalsExchanged) {
  const auto u = load_unit("int f() { int a = 1; int b = 2; return a - b; }");
  const auto v = name_shuffle(u, 3);
  EXPECT_EQ(v.rename_map.at("a"), "b");
  EXPECT_EQ(v.rename_map.at("b"), "a");
  EXPECT_EQ(*runtime::execute(v.unit, {"f", {}, {}}).outcome.value, runtime::Value::of_int(-1));
}

TEST(NameShuffle, TypesNeverMix) {
  const auto u = load_unit("int f(int[] a, int n) { boolean b = n > 0; if (b) { return a[0]; } return n; }");
  EXPECT_THROW(name_shuffle(u, 1), NoShufflePossible);
}

TEST(NameShuffle, SwapDigitsNeverIdentity) {
  const auto u = load_unit(kSwapDigits);
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const auto v = name_shuffle(u, seed);
    EXPECT_NE(v.rename_map.at("num1"), "num1");
    EXPECT_NE(v.rename_map.at("temp"), "temp");
  }
}

TEST(DefUseBreak, InheritsValueAndReplacesLaterUses) {
  const auto u = load_unit(kSwapDigits);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto v = defuse_break(u, seed);
    ASSERT_FALSE(v.rename_map.empty());
    for (const auto& [key, fresh] : v.rename_map) {
      const std::string var = key.substr(key.find('.') + 1);
      // The fresh variable is declared from the original and the original is
      // never read after the declaration.
      const auto& stmts = v.unit.methods[0].body.stmts;
      std::size_t at = stmts.size();
      for (std::size_t i = 0; i < stmts.size(); ++i) {
        if (stmts[i].is<lang::VarDecl>() && stmts[i].as<lang::VarDecl>().name == fresh) at = i;
      }
      ASSERT_LT(at, stmts.size());
      EXPECT_EQ(*stmts[at].as<lang::VarDecl>().init, lang::make_var(var));
      for (std::size_t i = at + 1; i < stmts.size(); ++i) EXPECT_FALSE(def_use(stmts[i]).uses.count(var));
    }
  }
}

TEST(DefUseBreak, LoopInvariantsFollowTheRename) {
  const auto p = load_program("is_palindrome");
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto v = defuse_break(p.unit, seed);
    EXPECT_TRUE(runtime::check_specs(v.unit, p.tests).all_correct()) << print_unit(v.unit);
  }
}

TEST(DefUseBreak, NoEligibleVariable) {
  EXPECT_THROW(defuse_break(load_unit("int seven() { return 7; }"), 1), NoEligibleVariable);
  EXPECT_THROW(defuse_break(load_unit("int f(int n) { while (n > 0) { n = n - 1; } return n; }"), 1),
               NoEligibleVariable);
}

TEST(IfElseFlip, NegatesAndSwaps) {
  const auto u = load_unit("int f(int a, int b) { int x = 0; if (a < b) { x = 1; } else { x = 2; } return x; }");
  const auto v = ifelse_flip(u, 1);
  const auto expected = load_unit(
      "int f(int a, int b) { int x = 0; if (!(a < b)) { x = 2; } else { x = 1; } return x; }");
  EXPECT_EQ(print_unit(v.unit), print_unit(expected));
  EXPECT_TRUE(v.rename_map.empty());
}

TEST(IfElseFlip, ElseIfChainStaysWellFormed) {
  const auto p = load_program("fizz_buzz");
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto v = ifelse_flip(p.unit, seed);
    EXPECT_TRUE(preservation_mismatches(p.unit, v, p.tests).empty());
    EXPECT_TRUE(runtime::check_specs(v.unit, p.tests).all_correct()) << print_unit(v.unit);
  }
}

TEST(IfElseFlip, DoubleFlipBehavesLikeOriginal) {
  for (const auto& p : load_all_programs()) {
    PerturbedUnit once;
    try {
      once = ifelse_flip(p.unit, 9);
    } catch (const NoEligibleBranch&) {
      continue;
    }
    const auto twice = ifelse_flip(once.unit, 9);
    EXPECT_NE(print_unit(twice.unit), print_unit(p.unit));
    for (const auto& t : p.tests) {
      EXPECT_TRUE(runtime::same_behavior(runtime::execute(p.unit, t).outcome,
                                         runtime::execute(twice.unit, t).outcome))
          << p.id;
    }
  }
}

TEST(IfElseFlip, NoElseBranch) {
  EXPECT_THROW(ifelse_flip(load_unit("int f(int a) { if (a > 0) { return 1; } return 0; }"), 1),
               NoEligibleBranch);
}

TEST(IndependentPairs, SwapDigitsLinesFourAndFive) {
  const auto pairs = find_independent_pairs(load_unit(kSwapDigits));
  ASSERT_FALSE(pairs.empty());
  EXPECT_EQ(pairs.front().first_line, 4);
  EXPECT_EQ(pairs.front().second_line, 5);
  const auto v = independent_swap(load_unit(kSwapDigits), 1);
  EXPECT_NE(print_unit(v.unit), print_unit(load_unit(kSwapDigits)));
  EXPECT_TRUE(v.rename_map.empty());
}

TEST(IndependentPairs, DefThenUseIsNotAPair) {
  const auto u = load_unit(
      "int f() {\n"
      "  int x = 0;\n"
      "  int y = 0;\n"
      "  x = 1;\n"
      "  y = x;\n"
      "  return y;\n"
      "}\n");
  for (const auto& pair : find_independent_pairs(u)) EXPECT_NE(pair.first_line, 4);
  EXPECT_THROW(independent_swap(load_unit("int f() { return 1; }"), 1), NoEligiblePair);
}

TEST(IndependentPairs, ArrayElementsAreOneLocation) {
  const auto u = load_unit("int f(int[] a, int[] b) { a[0] = 1; int x = b[0]; return x; }");
  EXPECT_TRUE(find_independent_pairs(u).empty());
}

TEST(IndependentPairs, ConditionsHold) {
  for (const auto& p : load_all_programs()) {
    std::vector<const lang::Stmt*> by_index;
    std::map<std::string, std::vector<const lang::Stmt*>> stmts;
    for (const auto& m : p.unit.methods) {
      lang::visit_stmts(m.body, [&](const lang::Stmt& s) { stmts[m.name].push_back(&s); });
    }
    for (const auto& pair : find_independent_pairs(p.unit)) {
      const auto a = def_use(*stmts[pair.method][pair.first]);
      const auto b = def_use(*stmts[pair.method][pair.second]);
      for (const auto& d : a.defs) {
        EXPECT_FALSE(b.defs.count(d)) << p.id;
        EXPECT_FALSE(b.uses.count(d)) << p.id;
      }
      for (const auto& u : a.uses) EXPECT_FALSE(b.defs.count(u)) << p.id;
    }
  }
}

// Oracle: swap every adjacent same-block pair and compare outputs on all tests.
// Every flagged pair must be harmless; unflagged pairs may coincide.
TEST(IndependentPairs, FlaggedPairsSurviveSwapAndCompare) {
  const auto programs = load_all_programs();
  int checked = 0;
  for (std::size_t pi = 0; pi < programs.size() && pi < 10; ++pi) {
    const auto& p = programs[pi];
    std::set<std::tuple<std::string, int, int>> flagged;
    for (const auto& pair : find_independent_pairs(p.unit)) flagged.insert({pair.method, pair.first_line, pair.second_line});
    for (std::size_t mi = 0; mi < p.unit.methods.size(); ++mi) {
      std::vector<std::vector<int>> paths;  // block paths are re-found on each copy
      std::function<void(const lang::Block&, std::vector<int>)> walk;
      std::function<void(const lang::Stmt&, std::vector<int>)> walk_stmt = [&](const lang::Stmt& s, std::vector<int> path) {
        if (s.is<lang::If>()) {
          auto q = path;
          q.push_back(0);
          walk(s.as<lang::If>().then_block, q);
          if (s.as<lang::If>().else_branch) {
            q.back() = 1;
            walk_stmt(**s.as<lang::If>().else_branch, q);
          }
        } else if (s.is<lang::While>()) {
          walk(s.as<lang::While>().body, path);
        } else if (s.is<lang::For>()) {
          walk(s.as<lang::For>().body, path);
        } else if (s.is<lang::Block>()) {
          walk(s.as<lang::Block>(), path);
        }
      };
      std::vector<std::pair<const lang::Stmt*, const lang::Stmt*>> adjacent;
      walk = [&](const lang::Block& b, std::vector<int> path) {
        for (std::size_t i = 0; i + 1 < b.stmts.size(); ++i) adjacent.push_back({&b.stmts[i], &b.stmts[i + 1]});
        for (std::size_t i = 0; i < b.stmts.size(); ++i) {
          auto q = path;
          q.push_back(static_cast<int>(i));
          walk_stmt(b.stmts[i], q);
        }
      };
      walk(p.unit.methods[mi].body, {});
      for (const auto& [s1, s2] : adjacent) {
        if (!flagged.count({p.unit.methods[mi].name, s1->line, s2->line})) continue;
        // Locate the same pair in a copy by line numbers and swap it.
        SourceUnit copy = p.unit;
        bool swapped = false;
        std::function<void(lang::Block&)> swap_in = [&](lang::Block& b) {
          for (std::size_t i = 0; i + 1 < b.stmts.size() && !swapped; ++i) {
            if (b.stmts[i].line == s1->line && b.stmts[i + 1].line == s2->line) {
              std::swap(b.stmts[i], b.stmts[i + 1]);
              swapped = true;
            }
          }
        };
        lang::visit_stmts_mut(copy.methods[mi].body, [&](lang::Stmt& s) {
          if (s.is<lang::If>()) swap_in(s.as<lang::If>().then_block);
          if (s.is<lang::While>()) swap_in(s.as<lang::While>().body);
          if (s.is<lang::For>()) swap_in(s.as<lang::For>().body);
          if (s.is<lang::Block>()) swap_in(s.as<lang::Block>());
        });
        swap_in(copy.methods[mi].body);
        ASSERT_TRUE(swapped);
        ++checked;
        for (const auto& t : p.tests) {
          EXPECT_TRUE(runtime::same_behavior(runtime::execute(p.unit, t).outcome, runtime::execute(copy, t).outcome))
              << p.id << " lines " << s1->line << "/" << s2->line;
        }
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(PerturbKind, NamesRoundTrip) {
  for (auto k : kAllKinds) EXPECT_EQ(parse_kind(kind_name(k)), k);
  EXPECT_FALSE(parse_kind("Rot13"));
}

}  // namespace
}  // namespace jmlbench
