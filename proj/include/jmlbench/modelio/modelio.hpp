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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jmlbench/lang/ast.hpp"
#include "jmlbench/taskgen/taskgen.hpp"

namespace jmlbench::modelio {

struct Shot {
  std::string request;
  std::string reply;
};

struct PromptBundle {
  std::string task_id;
  taskgen::TaskType type = taskgen::TaskType::kJudgement;
  std::string system;
  std::vector<Shot> shots;
  std::string task_text;
  int k = 0;

  // Chat messages: system, then alternating user/assistant shots, then the task.
  nlohmann::json messages() const;
};

// Request text for a task payload; shots and tasks share these templates.
std::string render_request(taskgen::TaskType type, const nlohmann::json& payload);

// Throws Error unless 0 <= k <= 2. Reads only the task's public fields.
PromptBundle build_prompt(const taskgen::TaskInstance& task, int k);

// The bundled request/reply examples for a task type.
std::vector<Shot> shots_for(taskgen::TaskType type);

// ---------------------------------------------------------------------------
// Responses
// ---------------------------------------------------------------------------

struct GeneratedClause {
  lang::Anchor anchor;
  lang::SpecClause clause;
};

struct ParsedAnswer {
  enum class Kind { kJudgement, kSelection, kInfilling, kGeneration, kUnparseable };
  Kind kind = Kind::kUnparseable;
  bool verdict = false;
  char label = 0;
  std::string expression;
  std::vector<GeneratedClause> clauses;
  int dropped = 0;  // generation lines that did not parse as clauses
  std::string raw;

  bool parsed() const { return kind != Kind::kUnparseable; }
  nlohmann::json to_json() const;
};

// All parsers are total: any text yields a value.
ParsedAnswer parse_judgement(const std::string& raw);
ParsedAnswer parse_selection(const std::string& raw);
ParsedAnswer parse_infilling(const std::string& raw);
ParsedAnswer parse_generation(const std::string& raw);
ParsedAnswer parse_answer(taskgen::TaskType type, const std::string& raw);

}  // namespace jmlbench::modelio
