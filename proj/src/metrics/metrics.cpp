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

#include "jmlbench/metrics/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/lang/scope.hpp"
#include "jmlbench/runtime/checker.hpp"

namespace jmlbench::metrics {

using taskgen::TaskType;

nlohmann::json GradedResult::to_json() const {
  nlohmann::json j = {{"task_id", task_id}, {"model", model},   {"program", program},
                      {"category", category}, {"type", taskgen::task_type_name(type)}, {"success", success}};
  if (type == TaskType::kGeneration) {
    j["precision"] = precision;
    j["recall"] = recall;
    j["all_pass"] = all_pass;
    j["nothing_generated"] = nothing_generated;
  }
  if (!note.empty()) j["note"] = note;
  return j;
}

GradedResult GradedResult::from_json(const nlohmann::json& j) {
  GradedResult r;
  r.task_id = j.at("task_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.program = j.at("program").get<std::string>();
  r.category = j.at("category").get<std::string>();
  const auto type = taskgen::parse_task_type(j.at("type").get<std::string>());
  if (!type) throw Error("unknown task type in graded result");
  r.type = *type;
  r.success = j.at("success").get<bool>();
  r.precision = j.value("precision", 0.0);
  r.recall = j.value("recall", 0.0);
  r.all_pass = j.value("all_pass", false);
  r.nothing_generated = j.value("nothing_generated", false);
  r.note = j.value("note", std::string());
  return r;
}

double accuracy(const std::vector<GradedResult>& results, const std::function<bool(const GradedResult&)>& filter) {
  std::size_t total = 0, hits = 0;
  for (const auto& r : results) {
    if (filter && !filter(r)) continue;
    ++total;
    hits += r.success;
  }
  if (total == 0) throw EmptySlice("no results in slice");
  return static_cast<double>(hits) / static_cast<double>(total);
}

namespace {

// Well-formed at its anchor: the anchor exists, the kind fits it, and the
// clause resolves and type-checks there.
bool well_formed(const lang::SpecClause& c, const lang::SourceUnit& unit, const lang::SymbolTable& table) {
  const lang::Method* m = unit.find_method(c.anchor.method);
  if (!m) return false;
  if (c.anchor.is_loop() != (c.kind == lang::SpecKind::kLoopInvariant)) return false;
  if (c.anchor.is_loop() && c.anchor.loop >= lang::count_loops(*m)) return false;
  try {
    lang::check_clause(c, table);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

GenerationScores generation_scores(const lang::SourceUnit& unit, const modelio::ParsedAnswer& answer,
                                   const std::vector<runtime::TestCase>& tests) {
  GenerationScores s;
  s.ground_truth = static_cast<int>(unit.specs.size());
  if (answer.kind != modelio::ParsedAnswer::Kind::kGeneration || answer.clauses.empty()) return s;
  const auto table = lang::resolve_scopes(unit);
  std::vector<const lang::SpecClause*> valid;
  for (const auto& g : answer.clauses) {
    ++s.generated;
    if (!well_formed(g.clause, unit, table)) continue;
    valid.push_back(&g.clause);
    if (runtime::check_clause_correct(unit, g.clause, tests).correct) ++s.correct;
  }
  for (const auto& truth : unit.specs) {
    for (const auto* g : valid) {
      if (g->anchor != truth.anchor || g->kind != truth.kind) continue;
      if (runtime::check_equivalence(truth, *g, unit, tests)) {
        ++s.recalled;
        break;
      }
    }
  }
  s.precision = static_cast<double>(s.correct) / s.generated;
  s.recall = s.ground_truth ? static_cast<double>(s.recalled) / s.ground_truth : 0.0;
  s.all_pass = s.correct == s.generated;
  return s;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t both = 0;
  for (const auto& x : a) both += b.count(x);
  const std::size_t either = a.size() + b.size() - both;
  if (either == 0) return 0.0;
  return 1.0 - static_cast<double>(both) / static_cast<double>(either);
}

double avg_variance(const std::vector<std::pair<double, double>>& pairs) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& [m, m2] : pairs) {
    if (m > 0 || m2 > 0) {
      sum += std::fabs(m2 - m);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

GradedResult grade_failure(const taskgen::TaskInstance& task, const std::string& model, const std::string& note) {
  GradedResult r;
  r.task_id = task.task_id;
  r.model = model;
  r.program = task.program;
  r.category = task.category;
  r.type = task.type;
  r.success = false;
  r.nothing_generated = task.type == TaskType::kGeneration;
  r.note = note;
  return r;
}

GradedResult grade(const taskgen::TaskInstance& task, const modelio::ParsedAnswer& answer,
                   const taskgen::Subject& subject, const std::string& model) {
  GradedResult r = grade_failure(task, model, "");
  r.nothing_generated = false;
  if (!answer.parsed()) {
    r.note = "unparseable answer";
    r.nothing_generated = task.type == TaskType::kGeneration;
    return r;
  }
  switch (task.type) {
    case TaskType::kJudgement:
      r.success = answer.kind == modelio::ParsedAnswer::Kind::kJudgement &&
                  answer.verdict == task.answer_key.at("truth").get<bool>();
      break;
    case TaskType::kSelection:
      r.success = answer.kind == modelio::ParsedAnswer::Kind::kSelection &&
                  std::string(1, answer.label) == task.answer_key.at("answer").get<std::string>();
      break;
    case TaskType::kInfilling: {
      const auto& masked_json = task.payload.at("masked");
      auto masked = lang::parse_clause(masked_json.at("clause").get<std::string>());
      masked.anchor = taskgen::anchor_from_json(masked_json.at("anchor"));
      try {
        const auto filled = taskgen::fill_mask(masked, answer.expression);
        lang::check_clause(filled, lang::resolve_scopes(subject.unit));
        r.success = runtime::check_clause_correct(subject.unit, filled, subject.tests).correct;
      } catch (const Error& e) {
        r.note = std::string("ill-formed infill: ") + e.what();
      }
      break;
    }
    case TaskType::kGeneration: {
      const auto s = generation_scores(subject.unit, answer, subject.tests);
      r.precision = s.precision;
      r.recall = s.recall;
      r.all_pass = s.generated > 0 && s.all_pass;
      r.success = r.all_pass;
      r.nothing_generated = s.generated == 0;
      if (answer.dropped) r.note = std::to_string(answer.dropped) + " clause line(s) dropped";
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace {

std::string pct(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v * 100;
  return out.str();
}

std::string fixed4(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

struct Cell {
  std::vector<const GradedResult*> results;
};

}  // namespace

EvalReport aggregate_report(const std::vector<GradedResult>& graded, const std::vector<std::string>& categories_in,
                            const std::vector<TaskType>& types_in) {
  std::set<std::string> models;
  std::vector<std::string> categories = categories_in;
  std::vector<TaskType> types = types_in;
  if (categories.empty()) {
    std::set<std::string> seen;
    for (const auto& r : graded) seen.insert(r.category);
    for (const auto& c : taskgen::all_categories()) {
      if (seen.count(c)) categories.push_back(c);
    }
  }
  if (types.empty()) {
    std::set<TaskType> seen;
    for (const auto& r : graded) seen.insert(r.type);
    for (auto t : taskgen::kAllTaskTypes) {
      if (seen.count(t)) types.push_back(t);
    }
  }
  // (model, category, type) -> results
  std::map<std::tuple<std::string, std::string, TaskType>, Cell> cells;
  for (const auto& r : graded) {
    models.insert(r.model);
    cells[{r.model, r.category, r.type}].results.push_back(&r);
  }

  EvalReport report;
  nlohmann::json jmodels = nlohmann::json::object();
  for (const auto& model : models) {
    nlohmann::json jcats = nlohmann::json::object();
    for (const auto& category : categories) {
      nlohmann::json jcell = nlohmann::json::object();
      for (auto type : types) {
        auto it = cells.find({model, category, type});
        const char* tname = taskgen::task_type_name(type);
        if (it == cells.end()) {
          report.missing.push_back(model + "/" + category + "/" + tname);
          jcell[tname] = nullptr;
          continue;
        }
        const auto& rs = it->second.results;
        int successes = 0, undefined = 0;
        double prec = 0, rec = 0;
        for (const auto* r : rs) {
          successes += r->success;
          prec += r->precision;
          rec += r->recall;
          undefined += r->nothing_generated;
        }
        const double n = static_cast<double>(rs.size());
        nlohmann::json c = {{"total", rs.size()}};
        if (type == TaskType::kGeneration) {
          c["precision"] = prec / n;
          c["recall"] = rec / n;
          c["pass"] = successes;
          c["precision_undefined"] = undefined;
        } else {
          c["accuracy"] = successes / n;
          c["successes"] = successes;
          if (type == TaskType::kInfilling) c["pass"] = successes;
        }
        jcell[tname] = c;
      }
      jcats[category] = jcell;
    }

    // Counterfactual metrics per perturbation kind, against Original.
    nlohmann::json jcf = nlohmann::json::object();
    std::map<std::string, std::vector<double>> column_values;
    for (const auto& category : categories) {
      if (category == taskgen::kOriginal) continue;
      nlohmann::json k = nlohmann::json::object();
      std::vector<double> metric_values;
      for (auto type : {TaskType::kJudgement, TaskType::kSelection, TaskType::kInfilling}) {
        auto orig = cells.find({model, taskgen::kOriginal, type});
        auto pert = cells.find({model, category, type});
        const std::string name = std::string("J_") + (type == TaskType::kJudgement   ? "jud"
                                                      : type == TaskType::kSelection ? "sel"
                                                                                     : "inf");
        if (orig == cells.end() || pert == cells.end()) {
          k[name] = nullptr;
          continue;
        }
        std::set<std::string> programs_o, programs_p, handled_o, handled_p;
        for (const auto* r : orig->second.results) programs_o.insert(r->program);
        for (const auto* r : pert->second.results) programs_p.insert(r->program);
        for (const auto* r : orig->second.results) {
          if (r->success && programs_p.count(r->program)) handled_o.insert(r->program);
        }
        for (const auto* r : pert->second.results) {
          if (r->success && programs_o.count(r->program)) handled_p.insert(r->program);
        }
        const double j = jaccard(handled_o, handled_p);
        k[name] = {{"value", j}, {"handled_original", handled_o.size()}, {"handled_perturbed", handled_p.size()}};
        metric_values.push_back(j);
        column_values[name].push_back(j);
      }
      auto orig = cells.find({model, taskgen::kOriginal, TaskType::kGeneration});
      auto pert = cells.find({model, category, TaskType::kGeneration});
      for (const char* name : {"v_prec", "v_rec"}) {
        if (orig == cells.end() || pert == cells.end()) {
          k[name] = nullptr;
          continue;
        }
        std::map<std::string, double> before;
        for (const auto* r : orig->second.results) before[r->program] = name[2] == 'p' ? r->precision : r->recall;
        std::vector<std::pair<double, double>> pairs;
        for (const auto* r : pert->second.results) {
          auto b = before.find(r->program);
          if (b != before.end()) pairs.emplace_back(b->second, name[2] == 'p' ? r->precision : r->recall);
        }
        const double v = avg_variance(pairs);
        std::size_t eligible = 0;
        for (const auto& [a, b] : pairs) eligible += a > 0 || b > 0;
        k[name] = {{"value", v}, {"pairs", eligible}};
        metric_values.push_back(v);
        column_values[name].push_back(v);
      }
      double sum = 0;
      for (double v : metric_values) sum += v;
      k["avg"] = metric_values.empty() ? nlohmann::json(nullptr) : nlohmann::json(sum / metric_values.size());
      jcf[category] = k;
    }
    nlohmann::json javg = nlohmann::json::object();
    for (const auto& [name, values] : column_values) {
      double sum = 0;
      for (double v : values) sum += v;
      javg[name] = sum / values.size();
    }
    jmodels[model] = {{"cells", jcats}, {"counterfactual", jcf}, {"counterfactual_avg", javg}};
  }
  report.json = {{"models", jmodels}, {"missing", report.missing}};

  // Markdown: task performance, then perturbation impact.
  std::ostringstream md;
  md << "# Evaluation report\n\n## Task performance\n\n";
  md << "| Category | Model | Judgement Acc | Selection Acc | Infilling Acc | Infilling #Pass | Generation Prec | "
        "Generation Rec | Generation #Pass |\n";
  md << "|---|---|---|---|---|---|---|---|---|\n";
  const auto cell_value = [&](const std::string& model, const std::string& category, TaskType type,
                              const char* field) -> std::string {
    const auto& c = jmodels[model]["cells"][category][taskgen::task_type_name(type)];
    if (c.is_null()) return "n/a";
    const auto& v = c.at(field);
    if (v.is_number_float()) return pct(v.get<double>());
    return std::to_string(v.get<int>()) + "/" + std::to_string(c.at("total").get<int>());
  };
  const auto has_type = [&](TaskType t) { return std::find(types.begin(), types.end(), t) != types.end(); };
  for (const auto& category : categories) {
    for (const auto& model : models) {
      md << "| " << category << " | " << model;
      md << " | " << (has_type(TaskType::kJudgement) ? cell_value(model, category, TaskType::kJudgement, "accuracy") : "n/a");
      md << " | " << (has_type(TaskType::kSelection) ? cell_value(model, category, TaskType::kSelection, "accuracy") : "n/a");
      if (has_type(TaskType::kInfilling)) {
        md << " | " << cell_value(model, category, TaskType::kInfilling, "accuracy") << " | "
           << cell_value(model, category, TaskType::kInfilling, "pass");
      } else {
        md << " | n/a | n/a";
      }
      if (has_type(TaskType::kGeneration)) {
        md << " | " << cell_value(model, category, TaskType::kGeneration, "precision") << " | "
           << cell_value(model, category, TaskType::kGeneration, "recall") << " | "
           << cell_value(model, category, TaskType::kGeneration, "pass");
      } else {
        md << " | n/a | n/a | n/a";
      }
      md << " |\n";
    }
  }
  md << "\n## Perturbation impact\n\n";
  md << "| Model | Perturbation | J_jud | J_sel | J_inf | v_prec | v_rec | Avg |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& model : models) {
    for (const auto& [category, k] : jmodels[model]["counterfactual"].items()) {
      md << "| " << model << " | " << category;
      for (const char* name : {"J_jud", "J_sel", "J_inf", "v_prec", "v_rec"}) {
        md << " | " << (k[name].is_null() ? "n/a" : fixed4(k[name]["value"].get<double>()));
      }
      md << " | " << (k["avg"].is_null() ? "n/a" : fixed4(k["avg"].get<double>())) << " |\n";
    }
  }
  if (!report.missing.empty()) {
    md << "\nMissing cells:";
    for (const auto& m : report.missing) md << " " << m;
    md << "\n";
  }
  report.markdown = md.str();
  return report;
}

}  // namespace jmlbench::metrics
