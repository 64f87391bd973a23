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

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jmlbench/modelio/modelio.hpp"
#include "jmlbench/taskgen/taskgen.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::metrics {

class EmptySlice : public Error {
 public:
  using Error::Error;
};

struct GradedResult {
  std::string task_id;
  std::string model;
  std::string program;
  std::string category;
  taskgen::TaskType type = taskgen::TaskType::kJudgement;
  bool success = false;
  // Generation only.
  double precision = 0;
  double recall = 0;
  bool all_pass = false;
  bool nothing_generated = false;  // precision set to 0 by convention
  std::string note;

  nlohmann::json to_json() const;
  static GradedResult from_json(const nlohmann::json& j);
};

double accuracy(const std::vector<GradedResult>& results,
                const std::function<bool(const GradedResult&)>& filter = {});  // throws EmptySlice

struct GenerationScores {
  double precision = 0;
  double recall = 0;
  bool all_pass = false;
  int generated = 0;
  int correct = 0;
  int recalled = 0;
  int ground_truth = 0;
};

// `unit` carries the ground truth as its specs. A generated clause counts as
// correct when it is well-formed at its anchor and survives runtime checking;
// a ground-truth clause is recalled when some generated clause of the same
// kind at the same anchor is equivalent to it.
GenerationScores generation_scores(const lang::SourceUnit& unit, const modelio::ParsedAnswer& answer,
                                   const std::vector<runtime::TestCase>& tests);

double jaccard(const std::set<std::string>& handled_original, const std::set<std::string>& handled_perturbed);

// Mean of |m' - m| over pairs where either metric is positive; 0 if none.
double avg_variance(const std::vector<std::pair<double, double>>& pairs);

// Grades a parsed answer against the task's key, running the program of the
// task's subject where needed.
GradedResult grade(const taskgen::TaskInstance& task, const modelio::ParsedAnswer& answer,
                   const taskgen::Subject& subject, const std::string& model);

GradedResult grade_failure(const taskgen::TaskInstance& task, const std::string& model, const std::string& note);

struct EvalReport {
  nlohmann::json json;
  std::string markdown;
  std::vector<std::string> missing;  // cells without any graded result
};

// Cells are (model, category, task type). Expected categories and types
// default to those present in the input.
EvalReport aggregate_report(const std::vector<GradedResult>& graded,
                            const std::vector<std::string>& categories = {},
                            const std::vector<taskgen::TaskType>& types = {});

}  // namespace jmlbench::metrics
