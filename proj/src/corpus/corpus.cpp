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

#include "jmlbench/corpus/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/lang/scope.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/taskgen/taskgen.hpp"

namespace jmlbench::corpus {

namespace fs = std::filesystem;
using lang::Block;
using lang::Stmt;

const char* structure_name(StructureClass c) {
  switch (c) {
    case StructureClass::kSequential: return "sequential";
    case StructureClass::kBranchOnly: return "branch-only";
    case StructureClass::kSingleLoop: return "single-loop";
    case StructureClass::kNestedLoop: return "nested-loop";
  }
  return "?";
}

namespace {

int block_depth(const Block& b);

int stmt_depth(const Stmt& s) {
  if (s.is<lang::While>()) return 1 + block_depth(s.as<lang::While>().body);
  if (s.is<lang::For>()) return 1 + block_depth(s.as<lang::For>().body);
  if (s.is<lang::Block>()) return block_depth(s.as<lang::Block>());
  if (s.is<lang::If>()) {
    const auto& i = s.as<lang::If>();
    int d = block_depth(i.then_block);
    if (i.else_branch) d = std::max(d, stmt_depth(**i.else_branch));
    return d;
  }
  return 0;
}

int block_depth(const Block& b) {
  int d = 0;
  for (const auto& s : b.stmts) d = std::max(d, stmt_depth(s));
  return d;
}

}  // namespace

int max_loop_depth(const lang::SourceUnit& unit) {
  int d = 0;
  for (const auto& m : unit.methods) d = std::max(d, block_depth(m.body));
  return d;
}

StructureClass classify_structure(const lang::SourceUnit& unit) {
  const int depth = max_loop_depth(unit);
  if (depth >= 2) return StructureClass::kNestedLoop;
  if (depth == 1) return StructureClass::kSingleLoop;
  bool branches = false;
  for (const auto& m : unit.methods) {
    lang::visit_stmts(m.body, [&](const Stmt& s) { branches = branches || s.is<lang::If>(); });
  }
  return branches ? StructureClass::kBranchOnly : StructureClass::kSequential;
}

ProgramStats program_stats(const lang::SourceUnit& unit, const std::string& source_text) {
  ProgramStats stats;
  std::istringstream in(source_text);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line.compare(first, 3, "//@") == 0) continue;
    ++stats.loc;
  }
  for (const auto& m : unit.methods) {
    int decisions = 0;
    lang::visit_stmts(m.body, [&](const Stmt& s) {
      decisions += s.is<lang::If>() || s.is<lang::While>() || s.is<lang::For>();
    });
    for (const auto& s : m.body.stmts) {
      lang::visit_stmt_exprs(s, [&](const lang::Expr& e) {
        if (!e.is<lang::Binary>()) return;
        const auto op = e.as<lang::Binary>().op;
        decisions += op == lang::BinaryOp::kAnd || op == lang::BinaryOp::kOr;
      });
    }
    stats.cyclomatic += 1 + decisions;
  }
  stats.structure = classify_structure(unit);
  return stats;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

nlohmann::json CorpusEntry::manifest_json() const {
  return {{"id", id},
          {"program_sha256", program_sha256},
          {"tests_sha256", tests_sha256},
          {"tests", tests.size()},
          {"ground_truth", unit.specs.size()},
          {"loc", stats.loc},
          {"cyclomatic", stats.cyclomatic},
          {"structure", structure_name(stats.structure)},
          {"line_coverage", line_coverage},
          {"branch_coverage", branch_coverage}};
}

const CorpusEntry* Corpus::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

nlohmann::json Corpus::aggregate_json() const {
  const double n = static_cast<double>(entries.size());
  double loc = 0, cc = 0, tests = 0, branch = 0, line = 0;
  std::map<std::string, int> classes;
  for (auto c : {StructureClass::kSequential, StructureClass::kBranchOnly, StructureClass::kSingleLoop,
                 StructureClass::kNestedLoop}) {
    classes[structure_name(c)] = 0;
  }
  for (const auto& e : entries) {
    loc += e.stats.loc;
    cc += e.stats.cyclomatic;
    tests += static_cast<double>(e.tests.size());
    branch += e.branch_coverage;
    line += e.line_coverage;
    ++classes[structure_name(e.stats.structure)];
  }
  if (entries.empty()) return {{"programs", 0}, {"structure", classes}};
  return {{"programs", entries.size()},
          {"avg_loc", loc / n},
          {"avg_cyclomatic", cc / n},
          {"avg_tests", tests / n},
          {"avg_line_coverage", line / n},
          {"avg_branch_coverage", branch / n},
          {"structure", classes}};
}

nlohmann::json Corpus::manifest_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) list.push_back(e.manifest_json());
  return {{"schema_version", kSchemaVersion}, {"entries", list}, {"aggregate", aggregate_json()}};
}

CorpusEntry load_entry(const std::string& id, const std::string& source_text, const std::string& tests_text) {
  CorpusEntry e;
  e.id = id;
  e.source_text = source_text;
  e.program_sha256 = sha256_hex(source_text);
  e.tests_sha256 = sha256_hex(tests_text);
  try {
    e.unit = lang::load_unit(source_text);
  } catch (const Error& err) {
    throw ValidationFailure(id, std::string("program does not load: ") + err.what());
  }
  try {
    e.tests = runtime::parse_tests_jsonl(tests_text);
  } catch (const std::exception& err) {
    throw ValidationFailure(id, std::string("tests do not parse: ") + err.what());
  }
  if (e.tests.empty()) throw ValidationFailure(id, "empty test suite");
  for (std::size_t i = 0; i < e.tests.size(); ++i) {
    const auto& t = e.tests[i];
    runtime::ExecResult r;
    try {
      runtime::check_test_arity(e.unit, t);
      r = runtime::execute(e.unit, t);
    } catch (const Error& err) {
      throw ValidationFailure(id, "test " + std::to_string(i + 1) + " " + t.to_json().dump() + ": " + err.what());
    }
    if (!r.outcome.ok()) {
      throw ValidationFailure(id, "test " + std::to_string(i + 1) + " " + t.to_json().dump() + " faults: " +
                                      r.outcome.to_json().dump());
    }
    if (t.expected && !(r.outcome.value && *r.outcome.value == *t.expected)) {
      throw ValidationFailure(id, "test " + std::to_string(i + 1) + " " + t.to_json().dump() + " returns " +
                                      (r.outcome.value ? r.outcome.value->to_string() : "nothing"));
    }
  }
  const auto report = runtime::check_specs(e.unit, e.tests);
  for (const auto& v : report.verdicts) {
    if (v.correct) continue;
    std::string reason = "ground truth '" + lang::print_clause(v.clause) + "' is refuted";
    if (v.counterexample) {
      reason += " by test " + v.counterexample->test.to_json().dump() + " at " + v.counterexample->site;
    }
    throw ValidationFailure(id, reason);
  }
  const auto coverage = runtime::measure_coverage(e.unit, e.tests);
  e.line_coverage = coverage.line_coverage();
  e.branch_coverage = coverage.branch_coverage();
  e.stats = program_stats(e.unit, source_text);
  return e;
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void check_manifest(const Corpus& corpus, const fs::path& path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(path));
  } catch (const std::exception& e) {
    throw ManifestMismatch("unreadable manifest " + path.string() + ": " + e.what());
  }
  if (manifest.value("schema_version", 0) != kSchemaVersion) {
    throw ManifestMismatch("manifest schema version differs from " + std::to_string(kSchemaVersion));
  }
  std::map<std::string, nlohmann::json> recorded;
  for (const auto& e : manifest.at("entries")) recorded[e.at("id").get<std::string>()] = e;
  std::vector<std::string> problems;
  for (const auto& e : corpus.entries) {
    auto it = recorded.find(e.id);
    if (it == recorded.end()) {
      problems.push_back(e.id + " is not in the manifest");
      continue;
    }
    if (it->second.at("program_sha256") != e.program_sha256) problems.push_back(e.id + ".sj hash differs");
    if (it->second.at("tests_sha256") != e.tests_sha256) problems.push_back(e.id + ".jsonl hash differs");
    recorded.erase(it);
  }
  for (const auto& [id, _] : recorded) problems.push_back(id + " is in the manifest but missing on disk");
  if (!problems.empty()) {
    std::string message = "manifest mismatch:";
    for (const auto& p : problems) message += " " + p + ";";
    throw ManifestMismatch(message);
  }
}

}  // namespace

Corpus load_corpus(const std::string& root, const LoadOptions& options) {
  Corpus corpus;
  corpus.root = root;
  const fs::path programs = fs::path(root) / "programs";
  const fs::path tests = fs::path(root) / "tests";
  std::vector<std::string> ids;
  if (fs::is_directory(programs)) {
    for (const auto& e : fs::directory_iterator(programs)) {
      if (e.path().extension() == ".sj") ids.push_back(e.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) corpus.warnings.push_back("corpus at " + root + " has no programs");

  std::vector<std::optional<CorpusEntry>> loaded(ids.size());
  std::vector<std::optional<ValidationFailure>> failures(ids.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      try {
        const auto test_path = tests / (ids[i] + ".jsonl");
        if (!fs::exists(test_path)) throw ValidationFailure(ids[i], "missing test suite " + test_path.string());
        loaded[i] = load_entry(ids[i], read_text(programs / (ids[i] + ".sj")), read_text(test_path));
      } catch (const ValidationFailure& f) {
        failures[i] = f;
      } catch (const Error& e) {
        failures[i] = ValidationFailure(ids[i], e.what());
      }
    }
  };
  const unsigned jobs = options.jobs > 0 ? static_cast<unsigned>(options.jobs)
                                         : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, ids.size()); ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  for (auto& f : failures) {
    if (f) throw *f;
  }
  for (auto& e : loaded) corpus.entries.push_back(std::move(*e));

  if (options.verify_manifest) {
    const auto manifest = fs::path(root) / "manifest.json";
    if (fs::exists(manifest)) {
      check_manifest(corpus, manifest);
    } else if (!ids.empty()) {
      throw ManifestMismatch("no manifest at " + manifest.string());
    }
  }
  return corpus;
}

void write_manifest(const Corpus& corpus) {
  const auto path = fs::path(corpus.root) / "manifest.json";
  const auto temp = fs::path(corpus.root) / "manifest.json.tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + temp.string());
    out << corpus.manifest_json().dump(2) << "\n";
  }
  fs::rename(temp, path);
}

// ---------------------------------------------------------------------------
// Test augmentation
// ---------------------------------------------------------------------------

runtime::Value random_value(lang::TypeTag type, Rng& rng, const AugmentOptions& options) {
  switch (type) {
    case lang::TypeTag::kInt:
      return runtime::Value::of_int(static_cast<std::int32_t>(rng.range(options.int_min, options.int_max)));
    case lang::TypeTag::kBool:
      return runtime::Value::of_bool(rng.coin());
    case lang::TypeTag::kIntArray: {
      std::vector<std::int32_t> xs(rng.below(options.max_length + 1));
      for (auto& x : xs) x = static_cast<std::int32_t>(rng.range(options.int_min, options.int_max));
      return runtime::Value::of_array(std::move(xs));
    }
    case lang::TypeTag::kString: {
      // A small alphabet makes repeated characters and palindromes likely.
      std::string s(rng.below(options.max_length + 1), 'a');
      for (auto& c : s) c = static_cast<char>('a' + rng.below(3));
      return runtime::Value::of_string(std::move(s));
    }
    case lang::TypeTag::kVoid:
      break;
  }
  throw TypeError("no random values of type " + lang::type_name(type));
}

namespace {

std::size_t outcomes_covered(const runtime::CoverageReport& c) {
  std::size_t n = 0;
  for (const auto& [line, b] : c.branch_outcomes) n += (b.true_taken > 0) + (b.false_taken > 0);
  return n;
}

}  // namespace

AugmentResult augment_tests(const CorpusEntry& entry, std::uint64_t seed, const AugmentOptions& options) {
  AugmentResult result;
  const auto& unit = entry.unit;
  Rng rng(seed);

  std::vector<lang::SpecClause> mutants;
  const auto table = lang::resolve_scopes(unit);
  for (std::size_t i = 0; i < unit.specs.size(); ++i) {
    for (auto& m : taskgen::candidate_mutants(unit.specs[i], table, unit, derive_seed(seed, entry.id, "mutant" + std::to_string(i)),
                                              options.mutants_per_clause)) {
      mutants.push_back(std::move(m));
    }
  }
  result.mutants_sampled = mutants.size();
  std::vector<bool> refuted(mutants.size());
  for (std::size_t i = 0; i < mutants.size(); ++i) {
    refuted[i] = !runtime::check_clause_correct(unit, mutants[i], entry.tests).correct;
  }

  auto coverage = runtime::measure_coverage(unit, entry.tests);
  result.branch_coverage_before = coverage.branch_coverage();

  // Entry points are the methods that the suite already calls.
  std::vector<const lang::Method*> targets;
  {
    std::set<std::string> called;
    for (const auto& t : entry.tests) called.insert(t.method);
    for (const auto& m : unit.methods) {
      if (called.count(m.name)) targets.push_back(&m);
    }
  }
  if (targets.empty()) {
    result.branch_coverage_after = result.branch_coverage_before;
    return result;
  }

  const std::size_t draws = options.budget * options.draws_per_test;
  for (std::size_t d = 0; d < draws && result.added.size() < options.budget; ++d) {
    const auto* method = targets[rng.below(targets.size())];
    runtime::TestCase t;
    t.method = method->name;
    for (const auto& p : method->params) t.args.push_back(random_value(p.type, rng, options));
    const auto run = runtime::execute(unit, t);
    if (!run.outcome.ok()) continue;
    if (!runtime::check_specs(unit, {t}).all_correct()) continue;  // violates a requires or the ground truth

    auto merged = coverage;
    merged.merge(run.coverage);
    bool useful = outcomes_covered(merged) > outcomes_covered(coverage);
    std::vector<std::size_t> newly_refuted;
    for (std::size_t i = 0; i < mutants.size(); ++i) {
      if (!refuted[i] && !runtime::check_clause_correct(unit, mutants[i], {t}).correct) newly_refuted.push_back(i);
    }
    useful = useful || !newly_refuted.empty();
    if (!useful) continue;
    t.expected = run.outcome.value;
    result.added.push_back(t);
    coverage = std::move(merged);
    for (auto i : newly_refuted) refuted[i] = true;
  }
  result.branch_coverage_after = coverage.branch_coverage();
  for (std::size_t i = 0; i < mutants.size(); ++i) {
    if (!refuted[i]) {
      result.survived.push_back("MutantSurvived: " + entry.id + ": '" + lang::print_clause(mutants[i]) + "' at " +
                                mutants[i].anchor.to_string());
    }
  }
  return result;
}

}  // namespace jmlbench::corpus
