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
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "jmlbench/perturb/perturb.hpp"
#include "jmlbench/taskgen/taskgen.hpp"

namespace jmlbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitPreservation = 3;
inline constexpr int kExitMissingCells = 4;

struct RunConfig {
  std::string corpus_root = "corpus";
  std::string output_dir = "out";
  std::vector<std::string> categories = taskgen::all_categories();
  std::vector<taskgen::TaskType> task_types{std::begin(taskgen::kAllTaskTypes), std::end(taskgen::kAllTaskTypes)};
  int shots = 2;
  nlohmann::json endpoint = {{"type", "oracle"}};
  std::uint64_t master_seed = 20240101;
  int concurrency = 4;
  std::string run_id;  // defaults to the endpoint type

  // Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
  std::string effective_run_id() const;
};

// Output layout under output_dir.
std::string tasks_path(const RunConfig& c);        // tasks.jsonl
std::string keys_path(const RunConfig& c);         // .keys/answer_keys.jsonl
std::string variants_dir(const RunConfig& c);      // variants/<Kind>/<program>.sj
std::string run_dir(const RunConfig& c);           // runs/<run_id>/

using Rewriter = std::function<perturb::PerturbedUnit(perturb::PerturbKind, const lang::SourceUnit&, std::uint64_t)>;

// Writes root/manifest.json for the corpus as it is on disk.
int cmd_manifest(const std::string& corpus_root, std::ostream& out, std::ostream& err);
int cmd_validate(const std::string& corpus_root, std::ostream& out, std::ostream& err);
// `rewriter` replaces apply_perturbation; tests inject faulty ones.
int cmd_perturb(const RunConfig& config, std::ostream& out, std::ostream& err, const Rewriter& rewriter = {});
int cmd_gentasks(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err);

// Writes through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace jmlbench::cli
