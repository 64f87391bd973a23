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
#include <vector>

#include <json.hpp>

#include "jmlbench/lang/ast.hpp"
#include "jmlbench/lang/scope.hpp"
#include "jmlbench/perturb/perturb.hpp"
#include "jmlbench/runtime/value.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::taskgen {

inline constexpr int kMaxRetries = 8;

class UnrefutableMutant : public Error {
 public:
  using Error::Error;
};
class NoMaskableNode : public Error {
 public:
  using Error::Error;
};

enum class TaskType { kJudgement, kSelection, kInfilling, kGeneration };

inline constexpr TaskType kAllTaskTypes[] = {TaskType::kJudgement, TaskType::kSelection, TaskType::kInfilling,
                                             TaskType::kGeneration};

const char* task_type_name(TaskType t);
std::optional<TaskType> parse_task_type(const std::string& name);

inline constexpr const char* kOriginal = "Original";

// "Original" followed by the five perturbation kinds.
std::vector<std::string> all_categories();

// Counters shared by the builders; attempts count mutate_spec calls.
struct BuildStats {
  int mutation_attempts = 0;
  int unrefutable = 0;
  std::vector<std::string> log;
};

// ---------------------------------------------------------------------------
// Mutation and masking
// ---------------------------------------------------------------------------

// Mutates variables (to a same-type variable in scope), operators (within
// their group) and quantifier kinds, each with probability 0.5 and at least
// one. The result type-checks, differs from every ground-truth clause at the
// anchor and is refuted by the tests. Throws UnrefutableMutant when
// max_retries attempts all fail.
lang::SpecClause mutate_spec(const lang::SpecClause& spec, const lang::SymbolTable& scope,
                             const lang::SourceUnit& unit, const std::vector<runtime::TestCase>& tests,
                             std::uint64_t seed, int max_retries = kMaxRetries, BuildStats* stats = nullptr);

// Distinct well-typed mutants of `spec` that differ from the ground truth,
// without the refutation requirement; at most `count`.
std::vector<lang::SpecClause> candidate_mutants(const lang::SpecClause& spec, const lang::SymbolTable& scope,
                                                const lang::SourceUnit& unit, std::uint64_t seed, std::size_t count);

enum class MaskClass { kArrayIndex, kVariable, kMethodName, kQuantifierRange };
const char* mask_class_name(MaskClass c);

struct MaskSite {
  MaskClass cls;
  std::string text;  // the hidden sub-expression or method name
};

// Maskable nodes of a clause in pre-order.
std::vector<MaskSite> mask_sites(const lang::SpecClause& spec);

struct MaskedSpec {
  lang::SpecClause masked;
  std::string hidden_answer;
  MaskClass cls;
  std::size_t site = 0;  // index into mask_sites()
};

MaskedSpec mask_at(const lang::SpecClause& spec, std::size_t site);
MaskedSpec mask_spec(const lang::SpecClause& spec, std::uint64_t seed);  // throws NoMaskableNode

// Substitutes an answer for the placeholder. Expression answers replace the
// node; a method-name placeholder takes an identifier. Throws Error when the
// answer does not fit.
lang::SpecClause fill_mask(const lang::SpecClause& masked, const std::string& answer);

// Clauses too weak to be incorrect that fit the given anchor and kind.
std::vector<lang::SpecClause> trivial_pool(const lang::SourceUnit& unit, const lang::Anchor& anchor,
                                           lang::SpecKind kind);

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

struct RequiredAnchor {
  lang::Anchor anchor;
  lang::SpecKind kind;
  bool operator==(const RequiredAnchor&) const = default;
};

struct JudgementTask {
  lang::SourceUnit unit;  // specs stripped
  lang::SpecClause candidate;
  bool truth = true;
};

struct SelectionTask {
  lang::SourceUnit unit;  // specs stripped
  std::vector<lang::SpecClause> options;  // A to D
  std::vector<std::string> origins;       // "ground_truth", "mutant" or "trivial" per option
  char answer = 'A';
};

struct InfillingTask {
  lang::SourceUnit unit;  // ground truth with the masked clause in place
  std::size_t clause = 0;  // index of the masked clause in unit.specs
  MaskedSpec mask;
  lang::SpecClause source;  // the unmasked clause
};

struct GenerationTask {
  lang::SourceUnit unit;  // specs stripped
  std::vector<RequiredAnchor> required;
  std::vector<lang::SpecClause> ground_truth;
};

std::vector<RequiredAnchor> required_anchors(const lang::SourceUnit& unit);

JudgementTask build_judgement(const lang::SourceUnit& unit, const std::vector<runtime::TestCase>& tests,
                              std::uint64_t seed, BuildStats* stats = nullptr);
SelectionTask build_selection(const lang::SourceUnit& unit, const std::vector<runtime::TestCase>& tests,
                              std::uint64_t seed, BuildStats* stats = nullptr);
InfillingTask build_infilling(const lang::SourceUnit& unit, std::uint64_t seed);
GenerationTask build_generation(const lang::SourceUnit& unit);

// Carry a task over to a perturbed variant of its program.
JudgementTask migrate(const JudgementTask& t, const perturb::PerturbedUnit& v);
SelectionTask migrate(const SelectionTask& t, const perturb::PerturbedUnit& v);
InfillingTask migrate(const InfillingTask& t, const perturb::PerturbedUnit& v);
GenerationTask migrate(const GenerationTask& t, const perturb::PerturbedUnit& v);

// ---------------------------------------------------------------------------
// Serialized form
// ---------------------------------------------------------------------------

// The program text shown to a model is in payload["program"]; the answer key
// is kept apart from everything a prompt is built from.
struct TaskInstance {
  std::string task_id;
  TaskType type;
  std::string category;
  std::string program;
  std::uint64_t seed = 0;
  nlohmann::json payload;
  nlohmann::json answer_key;

  nlohmann::json to_json() const;  // without the answer key
  nlohmann::json key_json() const;  // {task_id, answer_key}
  static TaskInstance from_json(const nlohmann::json& j);
};

std::string task_id(const std::string& program, const std::string& category, TaskType type);

TaskInstance to_instance(const JudgementTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed);
TaskInstance to_instance(const SelectionTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed);
TaskInstance to_instance(const InfillingTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed);
TaskInstance to_instance(const GenerationTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed);

nlohmann::json anchor_json(const lang::Anchor& a);
lang::Anchor anchor_from_json(const nlohmann::json& j);
lang::SpecKind parse_spec_kind(const std::string& keyword);  // throws Error

// "method f" or "the loop on line N of method f", lines as printed.
std::string describe_anchor(const lang::SourceUnit& unit, const lang::Anchor& anchor);

// ---------------------------------------------------------------------------
// Per-program generation
// ---------------------------------------------------------------------------

// A program as seen in one category: the (possibly perturbed) unit with its
// ground truth, and the tests migrated to it.
struct Subject {
  std::string program;
  std::string category;
  lang::SourceUnit unit;
  std::vector<runtime::TestCase> tests;
  std::optional<perturb::PerturbedUnit> variant;
};

std::uint64_t perturbation_seed(std::uint64_t master, const std::string& program, perturb::PerturbKind kind);
std::uint64_t task_seed(std::uint64_t master, const std::string& program, TaskType type);

// Throws the perturbation's eligibility errors for categories that do not
// apply to the program.
Subject make_subject(const std::string& program, const lang::SourceUnit& unit,
                     const std::vector<runtime::TestCase>& tests, const std::string& category,
                     std::uint64_t master_seed);

struct GeneratedTasks {
  std::vector<TaskInstance> tasks;
  BuildStats stats;
};

// Builds every requested type in every requested category for one program.
// Tasks that cannot be built are skipped and logged.
GeneratedTasks generate_program_tasks(const std::string& program, const lang::SourceUnit& unit,
                                      const std::vector<runtime::TestCase>& tests,
                                      const std::vector<std::string>& categories,
                                      const std::vector<TaskType>& types, std::uint64_t master_seed);

}  // namespace jmlbench::taskgen
