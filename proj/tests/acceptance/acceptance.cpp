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

// Offline acceptance gate: one PASS/FAIL line per criterion, nonzero exit
// when any criterion fails.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "jmlbench/cli/commands.hpp"
#include "jmlbench/corpus/corpus.hpp"
#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/lang/scope.hpp"
#include "jmlbench/metrics/metrics.hpp"
#include "jmlbench/modelio/endpoint.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/taskgen/taskgen.hpp"

namespace {

using namespace jmlbench;
namespace fs = std::filesystem;
using taskgen::TaskType;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (problems.size() < 8) problems.push_back(what);
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const corpus::Corpus& bundled() {
  static const corpus::Corpus c = corpus::load_corpus(JMLBENCH_CORPUS_DIR);
  return c;
}

// 1. Perturbations preserve behaviour and ground truth migrates correctly.
Outcome semantics_preservation() {
  Outcome o;
  int variants = 0, ineligible = 0, runs = 0;
  for (const auto& e : bundled().entries) {
    for (auto kind : perturb::kAllKinds) {
      for (std::uint64_t master : {1u, 2u, 3u}) {
        perturb::PerturbedUnit v;
        try {
          v = perturb::apply_perturbation(kind, e.unit, taskgen::perturbation_seed(master, e.id, kind));
        } catch (const perturb::NoEligibleVariable&) {
          ++ineligible;
          continue;
        } catch (const perturb::NoEligibleBranch&) {
          ++ineligible;
          continue;
        } catch (const perturb::NoEligiblePair&) {
          ++ineligible;
          continue;
        } catch (const perturb::NoShufflePossible&) {
          ++ineligible;
          continue;
        }
        ++variants;
        runs += static_cast<int>(e.tests.size());
        const auto mismatches = perturb::preservation_mismatches(e.unit, v, e.tests);
        o.require(mismatches.empty(), e.id + "/" + perturb::kind_name(kind) + ": " +
                                          (mismatches.empty() ? "" : mismatches.front()));
        std::vector<runtime::TestCase> migrated;
        for (const auto& t : e.tests) migrated.push_back(v.migration.apply(t));
        o.require(runtime::check_specs(v.unit, migrated).all_correct(),
                  e.id + "/" + perturb::kind_name(kind) + ": migrated ground truth refuted");
      }
    }
  }
  o.require(bundled().entries.size() >= 20, "fewer than 20 programs");
  o.detail = std::to_string(bundled().entries.size()) + " programs, " + std::to_string(variants) + " variants over 3 seeds, " +
             std::to_string(runs) + " differential runs, " + std::to_string(ineligible) + " ineligible (program, kind, seed)";
  return o;
}

// 2. Ground truth is valid and the suites cover the branches.
Outcome ground_truth_validity() {
  Outcome o;
  std::ostringstream out, err;
  const int code = cli::cmd_validate(JMLBENCH_CORPUS_DIR, out, err);
  o.require(code == cli::kExitOk, "validate exited " + std::to_string(code) + ": " + err.str());
  double coverage = 0;
  int clauses = 0;
  for (const auto& e : bundled().entries) {
    const auto report = runtime::check_specs(e.unit, e.tests);
    for (const auto& v : report.verdicts) {
      ++clauses;
      o.require(v.correct, e.id + ": '" + lang::print_clause(v.clause) + "' refuted");
    }
    coverage += e.branch_coverage;
  }
  coverage /= static_cast<double>(bundled().entries.size());
  o.require(coverage >= 0.90, "average branch coverage " + std::to_string(coverage));
  o.detail = std::to_string(clauses) + " clauses correct, average branch coverage " + std::to_string(coverage);
  return o;
}

// 3. Every emitted incorrect candidate is refuted; unrefutable rate < 10%.
Outcome mutant_refutation() {
  Outcome o;
  taskgen::BuildStats stats;
  int candidates = 0;
  for (const auto& e : bundled().entries) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto j = taskgen::build_judgement(e.unit, e.tests, seed, &stats);
      if (!j.truth) {
        ++candidates;
        o.require(!runtime::check_clause_correct(e.unit, j.candidate, e.tests).correct,
                  e.id + ": judgement candidate '" + lang::print_clause(j.candidate) + "' survives");
      }
      try {
        const auto s = taskgen::build_selection(e.unit, e.tests, seed, &stats);
        for (std::size_t i = 0; i < s.options.size(); ++i) {
          if (s.origins[i] != "mutant") continue;
          ++candidates;
          o.require(!runtime::check_clause_correct(e.unit, s.options[i], e.tests).correct,
                    e.id + ": selection option '" + lang::print_clause(s.options[i]) + "' survives");
        }
      } catch (const taskgen::UnrefutableMutant&) {
      }
    }
  }
  const double rate = stats.mutation_attempts ? static_cast<double>(stats.unrefutable) / stats.mutation_attempts : 0;
  o.require(rate < 0.10, "unrefutable rate " + std::to_string(rate));
  o.detail = std::to_string(candidates) + " incorrect candidates all refuted; unrefutable " +
             std::to_string(stats.unrefutable) + "/" + std::to_string(stats.mutation_attempts) + " attempts";
  return o;
}

struct PipelineRun {
  int gentasks = -1, run = -1, score = -1;
  fs::path dir;
  cli::RunConfig config;
};

PipelineRun pipeline(const std::string& name, nlohmann::json endpoint) {
  PipelineRun p;
  p.dir = fs::temp_directory_path() / ("jmlbench_acceptance_" + name);
  fs::remove_all(p.dir);
  p.config.corpus_root = JMLBENCH_CORPUS_DIR;
  p.config.output_dir = p.dir.string();
  p.config.master_seed = 20240101;
  p.config.endpoint = std::move(endpoint);
  std::ostringstream out, err;
  p.gentasks = cli::cmd_gentasks(p.config, out, err);
  if (p.gentasks == 0) p.run = cli::cmd_run(p.config, out, err);
  if (p.run == 0) p.score = cli::cmd_score(p.config, out, err);
  return p;
}

// 4. The oracle endpoint reaches the ceiling everywhere.
Outcome oracle_ceiling() {
  Outcome o;
  const auto p = pipeline("oracle", {{"type", "oracle"}});
  o.require(p.gentasks == 0 && p.run == 0 && p.score == 0, "pipeline exit codes " + std::to_string(p.gentasks) + "/" +
                                                               std::to_string(p.run) + "/" + std::to_string(p.score));
  if (!o.pass) return o;
  const auto report = nlohmann::json::parse(read_file(fs::path(cli::run_dir(p.config)) / "report.json"));
  const auto& model = report["models"]["oracle"];
  int cells = 0;
  for (const auto& [category, cell] : model["cells"].items()) {
    for (const char* type : {"Judgement", "Selection", "Infilling"}) {
      ++cells;
      o.require(cell[type]["accuracy"] == 1.0, category + "/" + type + " accuracy " + cell[type]["accuracy"].dump());
    }
    const auto& g = cell["Generation"];
    ++cells;
    o.require(g["precision"] == 1.0 && g["recall"] == 1.0 && g["pass"] == g["total"],
              category + "/Generation " + g.dump());
    if (category == taskgen::kOriginal) {
      o.require(g["pass"] == bundled().entries.size(), "Original generation #Pass " + g["pass"].dump());
    }
  }
  int metrics = 0;
  for (const auto& [kind, k] : model["counterfactual"].items()) {
    for (const char* name : {"J_jud", "J_sel", "J_inf", "v_prec", "v_rec"}) {
      ++metrics;
      o.require(!k[name].is_null() && k[name]["value"] == 0.0, kind + " " + name + " " + k[name].dump());
    }
  }
  o.require(model["counterfactual"].size() == 5, "expected 5 perturbation kinds in the report");
  o.detail = std::to_string(cells) + " cells at 1.0, " + std::to_string(metrics) + " counterfactual metrics at 0";
  fs::remove_all(p.dir);
  return o;
}

// 5. Always answering "true" scores about one half on judgement.
Outcome constant_judge() {
  Outcome o;
  std::vector<metrics::GradedResult> graded;
  modelio::FixedAnswerEndpoint judge("true");
  for (std::uint64_t master = 1; master <= 10; ++master) {
    for (const auto& e : bundled().entries) {
      const auto j = taskgen::build_judgement(e.unit, e.tests, taskgen::task_seed(master, e.id, TaskType::kJudgement));
      const auto task = taskgen::to_instance(j, e.id, taskgen::kOriginal, master);
      const taskgen::Subject subject{e.id, taskgen::kOriginal, e.unit, e.tests, std::nullopt};
      const auto reply = judge.query(modelio::build_prompt(task, 2));
      graded.push_back(metrics::grade(task, modelio::parse_answer(task.type, reply), subject, judge.name()));
    }
  }
  const double acc = metrics::accuracy(graded);
  o.require(graded.size() >= 200, "only " + std::to_string(graded.size()) + " builds");
  o.require(std::fabs(acc - 0.5) <= 0.1, "accuracy " + std::to_string(acc));
  o.detail = "accuracy " + std::to_string(acc) + " over " + std::to_string(graded.size()) + " seeded builds";
  return o;
}

std::int64_t ulps_apart(double a, double b) {
  std::int64_t n = 0;
  for (double x = std::min(a, b); x < std::max(a, b) && n <= 64; x = std::nextafter(x, INFINITY)) ++n;
  return n;
}

// 6. Metric fixtures.
Outcome metric_fixtures() {
  Outcome o;
  std::vector<metrics::GradedResult> rs(204);
  for (int i = 0; i < 204; ++i) rs[i].success = i < 166;
  const double acc = metrics::accuracy(rs);
  o.require(std::fabs(acc - 0.8137) <= 0.0001, "accuracy " + std::to_string(acc));
  const double j = metrics::jaccard({"a", "b", "c"}, {"b", "c", "d"});
  o.require(j == 0.5, "jaccard " + std::to_string(j));
  const double v = metrics::avg_variance({{0.5, 0.7}, {0, 0}});
  // The doubles nearest 0.7 and 0.5 differ by 0.19999999999999996, two ulps
  // below the double nearest 0.2; exactness is judged at representation level.
  o.require(ulps_apart(v, 0.2) <= 4, "avg_variance " + std::to_string(v));
  std::ostringstream d;
  d << std::setprecision(17) << "accuracy " << acc << ", jaccard " << j << ", avg_variance " << v << " ("
    << ulps_apart(v, 0.2) << " ulp from 0.2)";
  o.detail = d.str();
  return o;
}

// Swaps the operands of every + and * node.
lang::Expr commute(const lang::Expr& e, int* swaps) {
  lang::Expr out = e;
  lang::visit_mut(out, [&](lang::Expr& x) {
    if (!x.is<lang::Binary>()) return;
    auto& b = x.as<lang::Binary>();
    if (b.op != lang::BinaryOp::kAdd && b.op != lang::BinaryOp::kMul) return;
    std::swap(b.lhs, b.rhs);
    ++*swaps;
  });
  return out;
}

// 7. Equivalence is reflexive, separates ground truth from `true`, and
// accepts commuted arithmetic.
Outcome equivalence_soundness() {
  Outcome o;
  int reflexive = 0, separated = 0, commuted = 0;
  for (const auto& e : bundled().entries) {
    for (const auto& s : e.unit.specs) {
      ++reflexive;
      o.require(runtime::check_equivalence(s, s, e.unit, e.tests), e.id + ": not reflexive on " + lang::print_clause(s));

      // A refuting behaviour: a reached return state whose result, changed
      // by one, falsifies the clause.
      if (s.kind == lang::SpecKind::kEnsures) {
        bool refutable = false;
        for (const auto& state : runtime::collect_site_states(e.unit, s.anchor, s.kind, e.tests)) {
          if (!state.result) continue;
          auto altered = state;
          const auto& r = *state.result;
          if (r.is_int()) {
            altered.result = runtime::Value::of_int(r.as_int() + 1);
          } else if (r.is_bool()) {
            altered.result = runtime::Value::of_bool(!r.as_bool());
          } else {
            continue;
          }
          const auto verdict = runtime::evaluate_spec(s.expr, e.unit, altered);
          if (!std::holds_alternative<bool>(verdict) || !std::get<bool>(verdict)) {
            refutable = true;
            break;
          }
        }
        if (refutable) {
          lang::SpecClause trivial = s;
          trivial.expr = lang::make_bool(true);
          ++separated;
          o.require(!runtime::check_equivalence(s, trivial, e.unit, e.tests),
                    e.id + ": '" + lang::print_clause(s) + "' judged equivalent to true");
        }
      }

      int swaps = 0;
      lang::SpecClause c = s;
      c.expr = commute(s.expr, &swaps);
      if (swaps == 0 || lang::print_expr(c.expr) == lang::print_expr(s.expr)) continue;
      ++commuted;
      o.require(runtime::check_equivalence(s, c, e.unit, e.tests),
                e.id + ": commuted '" + lang::print_clause(c) + "' not equivalent");
    }
  }
  o.require(separated > 0, "no ground-truth clause with a refuting behaviour");
  o.require(commuted >= 5, "only " + std::to_string(commuted) + " commuted fixtures");
  o.detail = std::to_string(reflexive) + " reflexive, " + std::to_string(separated) + " separated from true, " +
             std::to_string(commuted) + " commuted rewrites equivalent";
  return o;
}

// 8. The isPalindrome, FizzBuzz and IntSquare analogs.
Outcome figure_reproductions() {
  Outcome o;
  const auto* pal = bundled().find("is_palindrome");
  const auto* fizz = bundled().find("fizz_buzz");
  const auto* square = bundled().find("int_square");
  o.require(pal && fizz && square, "figure programs missing from the corpus");
  if (!o.pass) return o;

  o.require(pal->unit.specs.size() == 5, "isPalindrome has " + std::to_string(pal->unit.specs.size()) + " clauses");
  o.require(runtime::check_specs(pal->unit, pal->tests).all_correct(), "isPalindrome ground truth refuted");

  // Option A is the ground-truth clause; B to D mutate its operators.
  const auto table = lang::resolve_scopes(fizz->unit);
  const auto& truth = fizz->unit.specs[2];
  std::vector<lang::SpecClause> options{truth};
  std::set<std::string> seen{lang::print_clause(truth)};
  for (std::uint64_t seed = 0; options.size() < 4 && seed < 64; ++seed) {
    const auto m = taskgen::mutate_spec(truth, table, fizz->unit, fizz->tests, seed);
    if (seen.insert(lang::print_clause(m)).second) options.push_back(m);
  }
  o.require(options.size() == 4, "could not build four FizzBuzz options");
  int correct = 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    const bool ok = runtime::check_clause_correct(fizz->unit, options[i], fizz->tests).correct;
    correct += ok;
    o.require(ok == (i == 0), std::string("FizzBuzz option ") + static_cast<char>('A' + i) +
                                  (ok ? " passes" : " refuted"));
  }
  o.require(correct == 1, "FizzBuzz has " + std::to_string(correct) + " correct options");

  // Every mask site of every IntSquare clause fills back to a passing clause.
  int round_trips = 0;
  for (const auto& c : square->unit.specs) {
    for (std::size_t site = 0; site < taskgen::mask_sites(c).size(); ++site) {
      const auto masked = taskgen::mask_at(c, site);
      const auto filled = taskgen::fill_mask(masked.masked, masked.hidden_answer);
      ++round_trips;
      o.require(lang::print_clause(filled) == lang::print_clause(c), "IntSquare round trip changed " + lang::print_clause(c));
      o.require(runtime::check_clause_correct(square->unit, filled, square->tests).correct,
                "IntSquare filled clause refuted");
    }
  }
  o.detail = "isPalindrome 5 clauses valid; FizzBuzz A unique of 4 (" + lang::print_clause(truth) +
             "); IntSquare " + std::to_string(round_trips) + " infilling round trips";
  return o;
}

// 9. Identical config and seed give byte-identical tasks and reports.
Outcome determinism() {
  Outcome o;
  const auto a = pipeline("det_a", {{"type", "oracle"}});
  const auto b = pipeline("det_b", {{"type", "oracle"}});
  o.require(a.score == 0 && b.score == 0, "pipeline failed");
  if (!o.pass) return o;
  const auto ta = read_file(cli::tasks_path(a.config)), tb = read_file(cli::tasks_path(b.config));
  const auto ra = read_file(fs::path(cli::run_dir(a.config)) / "report.json");
  const auto rb = read_file(fs::path(cli::run_dir(b.config)) / "report.json");
  o.require(ta == tb, "tasks.jsonl differs");
  o.require(ra == rb, "report.json differs");
  o.detail = "tasks.jsonl " + std::to_string(ta.size()) + " bytes and report.json " + std::to_string(ra.size()) +
             " bytes identical";
  fs::remove_all(a.dir);
  fs::remove_all(b.dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"semantics preservation", semantics_preservation},
      {"ground-truth validity", ground_truth_validity},
      {"mutant refutation", mutant_refutation},
      {"oracle ceiling", oracle_ceiling},
      {"constant-judge baseline", constant_judge},
      {"metric fixtures", metric_fixtures},
      {"equivalence soundness", equivalence_soundness},
      {"figure reproductions", figure_reproductions},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.problems.push_back(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << "\n";
    for (const auto& p : o.problems) std::cout << "    " << p << "\n";
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
