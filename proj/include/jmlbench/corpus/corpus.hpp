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
#include "jmlbench/runtime/interpreter.hpp"
#include "jmlbench/runtime/value.hpp"
#include "jmlbench/util/error.hpp"
#include "jmlbench/util/rng.hpp"

namespace jmlbench::corpus {

inline constexpr int kSchemaVersion = 1;

class ValidationFailure : public Error {
 public:
  ValidationFailure(std::string entry, std::string reason)
      : Error(entry + ": " + reason), entry_(std::move(entry)), reason_(std::move(reason)) {}
  const std::string& entry() const { return entry_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string entry_;
  std::string reason_;
};

class ManifestMismatch : public Error {
 public:
  using Error::Error;
};

enum class StructureClass { kSequential, kBranchOnly, kSingleLoop, kNestedLoop };
const char* structure_name(StructureClass c);

// By maximum loop nesting depth, then by the presence of an `if`.
StructureClass classify_structure(const lang::SourceUnit& unit);
int max_loop_depth(const lang::SourceUnit& unit);

struct ProgramStats {
  int loc = 0;         // non-blank source lines that are not specification comments
  int cyclomatic = 0;  // sum over methods of 1 + decision points (if, while, for, &&, ||)
  StructureClass structure = StructureClass::kSequential;
};

ProgramStats program_stats(const lang::SourceUnit& unit, const std::string& source_text);

struct CorpusEntry {
  std::string id;
  std::string source_text;
  lang::SourceUnit unit;  // specs are the ground truth
  std::vector<runtime::TestCase> tests;
  ProgramStats stats;
  double line_coverage = 0;
  double branch_coverage = 0;
  std::string program_sha256;
  std::string tests_sha256;

  nlohmann::json manifest_json() const;
};

struct Corpus {
  std::string root;
  std::vector<CorpusEntry> entries;  // sorted by id
  std::vector<std::string> warnings;

  const CorpusEntry* find(const std::string& id) const;
  nlohmann::json aggregate_json() const;
  nlohmann::json manifest_json() const;  // schema version, per-entry hashes and stats, aggregate
};

std::string sha256_hex(const std::string& data);

// Parses, resolves and runtime-checks one program against its suite.
// Throws ValidationFailure naming the refuting test for incorrect ground truth.
CorpusEntry load_entry(const std::string& id, const std::string& source_text, const std::string& tests_text);

struct LoadOptions {
  bool verify_manifest = true;  // a missing manifest is a mismatch unless the corpus is empty
  int jobs = 0;                 // 0 means hardware concurrency
};

// Loads root/programs/<id>.sj with root/tests/<id>.jsonl and checks them
// against root/manifest.json. Throws the first ValidationFailure in id order.
Corpus load_corpus(const std::string& root, const LoadOptions& options = {});

// Writes root/manifest.json atomically for an already-validated corpus.
void write_manifest(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Test augmentation
// ---------------------------------------------------------------------------

struct AugmentOptions {
  std::size_t budget = 20;              // at most this many added tests
  std::size_t draws_per_test = 40;      // random candidates tried per budget unit
  std::size_t mutants_per_clause = 3;   // sampled mutants each test may refute
  int int_min = -100;
  int int_max = 100;
  std::size_t max_length = 12;          // arrays and strings
};

struct AugmentResult {
  std::vector<runtime::TestCase> added;  // expected values recorded from execution
  double branch_coverage_before = 0;
  double branch_coverage_after = 0;
  std::size_t mutants_sampled = 0;
  std::vector<std::string> survived;  // MutantSurvived warnings, one per unrefuted mutant
};

// A random argument of the given type within the option bounds.
runtime::Value random_value(lang::TypeTag type, Rng& rng, const AugmentOptions& options);

// Adds random type-directed tests while they gain branch outcomes or refute
// a sampled mutant not yet refuted. Added tests satisfy every ground-truth
// clause and do not fault.
AugmentResult augment_tests(const CorpusEntry& entry, std::uint64_t seed, const AugmentOptions& options = {});

}  // namespace jmlbench::corpus
