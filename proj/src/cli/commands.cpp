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

#include "jmlbench/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "jmlbench/corpus/corpus.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/metrics/metrics.hpp"
#include "jmlbench/modelio/endpoint.hpp"
#include "jmlbench/runtime/checker.hpp"

namespace jmlbench::cli {

namespace fs = std::filesystem;
using taskgen::TaskInstance;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"corpus",   "output",      "categories", "task_types", "shots",
                                           "endpoint", "seed",        "concurrency", "run_id"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error("unknown config key '" + key + "'");
  }
  RunConfig c;
  c.corpus_root = j.value("corpus", c.corpus_root);
  c.output_dir = j.value("output", c.output_dir);
  if (j.contains("categories")) {
    c.categories.clear();
    const auto all = taskgen::all_categories();
    for (const auto& name : j.at("categories")) {
      const auto s = name.get<std::string>();
      if (std::find(all.begin(), all.end(), s) == all.end()) throw Error("unknown category '" + s + "'");
      c.categories.push_back(s);
    }
  }
  if (j.contains("task_types")) {
    c.task_types.clear();
    for (const auto& name : j.at("task_types")) {
      const auto t = taskgen::parse_task_type(name.get<std::string>());
      if (!t) throw Error("unknown task type '" + name.get<std::string>() + "'");
      c.task_types.push_back(*t);
    }
  }
  c.shots = j.value("shots", c.shots);
  if (c.shots < 0 || c.shots > 2) throw Error("shots must be 0, 1 or 2");
  if (j.contains("endpoint")) c.endpoint = j.at("endpoint");
  c.master_seed = j.value("seed", c.master_seed);
  c.concurrency = j.value("concurrency", c.concurrency);
  if (c.concurrency < 1) throw Error("concurrency must be at least 1");
  c.run_id = j.value("run_id", c.run_id);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json types = nlohmann::json::array();
  for (auto t : task_types) types.push_back(taskgen::task_type_name(t));
  return {{"corpus", corpus_root}, {"output", output_dir},   {"categories", categories},
          {"task_types", types},   {"shots", shots},         {"endpoint", endpoint},
          {"seed", master_seed},   {"concurrency", concurrency}, {"run_id", run_id}};
}

std::string RunConfig::effective_run_id() const {
  return run_id.empty() ? endpoint.value("type", std::string("run")) : run_id;
}

std::string tasks_path(const RunConfig& c) { return (fs::path(c.output_dir) / "tasks.jsonl").string(); }
std::string keys_path(const RunConfig& c) { return (fs::path(c.output_dir) / ".keys" / "answer_keys.jsonl").string(); }
std::string variants_dir(const RunConfig& c) { return (fs::path(c.output_dir) / "variants").string(); }
std::string run_dir(const RunConfig& c) { return (fs::path(c.output_dir) / "runs" / c.effective_run_id()).string(); }

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + temp.string());
    out << content;
    if (!out.flush()) throw Error("short write to " + temp.string());
  }
  fs::rename(temp, target);
}

namespace {

std::vector<nlohmann::json> read_jsonl(const std::string& path, bool tolerate_torn_tail) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception&) {
      if (!tolerate_torn_tail || in.peek() != EOF) throw Error("malformed line in " + path);
    }
  }
  return out;
}

std::string to_jsonl(const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < std::max(1, jobs) && static_cast<std::size_t>(t) < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<perturb::PerturbKind> configured_kinds(const RunConfig& c) {
  std::vector<perturb::PerturbKind> kinds;
  for (const auto& name : c.categories) {
    if (auto k = perturb::parse_kind(name)) kinds.push_back(*k);
  }
  return kinds;
}

bool is_eligibility_error(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const perturb::NoEligibleVariable&) {
    return true;
  } catch (const perturb::NoEligibleBranch&) {
    return true;
  } catch (const perturb::NoEligiblePair&) {
    return true;
  } catch (const perturb::NoShufflePossible&) {
    return true;
  } catch (...) {
    return false;
  }
}

// Loads the corpus and reports validation problems; nullopt means exit 2.
std::optional<corpus::Corpus> load_checked(const std::string& root, std::ostream& err) {
  try {
    auto c = corpus::load_corpus(root);
    for (const auto& w : c.warnings) err << "warning: " << w << "\n";
    return c;
  } catch (const corpus::ValidationFailure& f) {
    err << "validation failure: " << f.what() << "\n";
  } catch (const corpus::ManifestMismatch& m) {
    err << "manifest mismatch: " << m.what() << "\n";
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// manifest / validate
// ---------------------------------------------------------------------------

int cmd_manifest(const std::string& corpus_root, std::ostream& out, std::ostream& err) {
  try {
    corpus::LoadOptions options;
    options.verify_manifest = false;
    const auto c = corpus::load_corpus(corpus_root, options);
    corpus::write_manifest(c);
    out << "wrote " << (fs::path(corpus_root) / "manifest.json").string() << " for " << c.entries.size()
        << " programs\n";
    return kExitOk;
  } catch (const corpus::ValidationFailure& f) {
    err << "validation failure: " << f.what() << "\n";
    return kExitValidation;
  }
}

int cmd_validate(const std::string& corpus_root, std::ostream& out, std::ostream& err) {
  const auto c = load_checked(corpus_root, err);
  if (!c) return kExitValidation;
  out << "| Program | Structure | LoC | CC | Tests | Specs | Line cov | Branch cov |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& e : c->entries) {
    out << "| " << e.id << " | " << corpus::structure_name(e.stats.structure) << " | " << e.stats.loc << " | "
        << e.stats.cyclomatic << " | " << e.tests.size() << " | " << e.unit.specs.size() << " | "
        << fixed(e.line_coverage * 100, 2) << " | " << fixed(e.branch_coverage * 100, 2) << " |\n";
  }
  const auto agg = c->aggregate_json();
  out << "\n" << c->entries.size() << " programs valid";
  if (!c->entries.empty()) {
    out << "; avg LoC " << fixed(agg["avg_loc"].get<double>(), 2) << ", avg CC "
        << fixed(agg["avg_cyclomatic"].get<double>(), 2) << ", avg tests " << fixed(agg["avg_tests"].get<double>(), 2)
        << ", avg branch coverage " << fixed(agg["avg_branch_coverage"].get<double>() * 100, 2) << "%";
  }
  out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// perturb
// ---------------------------------------------------------------------------

int cmd_perturb(const RunConfig& config, std::ostream& out, std::ostream& err, const Rewriter& rewriter_in) {
  const auto c = load_checked(config.corpus_root, err);
  if (!c) return kExitValidation;
  const Rewriter rewriter = rewriter_in ? rewriter_in : Rewriter(perturb::apply_perturbation);
  const auto kinds = configured_kinds(config);

  struct Outcome {
    std::optional<perturb::PerturbedUnit> variant;
    std::string skipped;
    std::vector<std::string> failures;
  };
  const std::size_t n = c->entries.size() * kinds.size();
  std::vector<Outcome> outcomes(n);
  parallel_for(n, config.concurrency, [&](std::size_t i) {
    const auto& entry = c->entries[i / kinds.size()];
    const auto kind = kinds[i % kinds.size()];
    auto& o = outcomes[i];
    try {
      o.variant = rewriter(kind, entry.unit, taskgen::perturbation_seed(config.master_seed, entry.id, kind));
    } catch (...) {
      if (!is_eligibility_error(std::current_exception())) throw;
      try {
        throw;
      } catch (const Error& e) {
        o.skipped = e.what();
      }
      return;
    }
    for (auto& m : perturb::preservation_mismatches(entry.unit, *o.variant, entry.tests)) o.failures.push_back(m);
    std::vector<runtime::TestCase> migrated;
    for (const auto& t : entry.tests) migrated.push_back(o.variant->migration.apply(t));
    try {
      const auto report = runtime::check_specs(o.variant->unit, migrated);
      for (const auto& v : report.verdicts) {
        if (!v.correct) o.failures.push_back("migrated clause '" + lang::print_clause(v.clause) + "' is refuted");
      }
    } catch (const Error& e) {
      o.failures.push_back(std::string("migrated suite does not run: ") + e.what());
    }
  });

  int written = 0, skipped = 0, failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = c->entries[i / kinds.size()];
    const char* kind = perturb::kind_name(kinds[i % kinds.size()]);
    const auto& o = outcomes[i];
    if (!o.skipped.empty()) {
      ++skipped;
      err << "skipped " << kind << "/" << entry.id << ": " << o.skipped << "\n";
      continue;
    }
    if (!o.failures.empty()) {
      ++failed;
      for (const auto& f : o.failures) err << "PRESERVATION FAILURE " << kind << "/" << entry.id << ": " << f << "\n";
      continue;
    }
    const fs::path dir = fs::path(variants_dir(config)) / kind;
    write_file_atomic((dir / (entry.id + ".sj")).string(), lang::print_unit(o.variant->unit));
    nlohmann::json map = {{"kind", kind},
                          {"seed", o.variant->seed},
                          {"rename_map", o.variant->rename_map_json()}};
    write_file_atomic((dir / (entry.id + ".rename_map.json")).string(), map.dump(2) + "\n");
    ++written;
  }
  out << "variants written: " << written << ", skipped as ineligible: " << skipped
      << ", preservation failures: " << failed << "\n";
  return failed ? kExitPreservation : kExitOk;
}

// ---------------------------------------------------------------------------
// gen-tasks
// ---------------------------------------------------------------------------

int cmd_gentasks(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto c = load_checked(config.corpus_root, err);
  if (!c) return kExitValidation;
  std::vector<taskgen::GeneratedTasks> generated(c->entries.size());
  parallel_for(c->entries.size(), config.concurrency, [&](std::size_t i) {
    const auto& e = c->entries[i];
    generated[i] =
        taskgen::generate_program_tasks(e.id, e.unit, e.tests, config.categories, config.task_types, config.master_seed);
  });
  std::vector<nlohmann::json> tasks, keys;
  int attempts = 0, unrefutable = 0;
  std::vector<std::string> log;
  for (const auto& g : generated) {
    for (const auto& t : g.tasks) {
      tasks.push_back(t.to_json());
      keys.push_back(t.key_json());
    }
    attempts += g.stats.mutation_attempts;
    unrefutable += g.stats.unrefutable;
    log.insert(log.end(), g.stats.log.begin(), g.stats.log.end());
  }
  write_file_atomic(tasks_path(config), to_jsonl(tasks));
  write_file_atomic(keys_path(config), to_jsonl(keys));
  fs::permissions(fs::path(keys_path(config)).parent_path(), fs::perms::owner_all, fs::perm_options::replace);
  fs::permissions(keys_path(config), fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
  const nlohmann::json stats = {{"tasks", tasks.size()},
                                {"programs", c->entries.size()},
                                {"mutation_attempts", attempts},
                                {"unrefutable", unrefutable},
                                {"log", log}};
  write_file_atomic((fs::path(config.output_dir) / "gen_tasks_stats.json").string(), stats.dump(2) + "\n");
  for (const auto& line : log) err << "note: " << line << "\n";
  out << "tasks: " << tasks.size() << " for " << c->entries.size() << " programs; unrefutable mutants "
      << unrefutable << "/" << attempts << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto c = load_checked(config.corpus_root, err);
  if (!c) return kExitValidation;

  std::vector<TaskInstance> tasks;
  for (const auto& j : read_jsonl(tasks_path(config), false)) tasks.push_back(TaskInstance::from_json(j));
  std::map<std::string, nlohmann::json> keys;
  for (const auto& j : read_jsonl(keys_path(config), false)) {
    keys[j.at("task_id").get<std::string>()] = j.at("answer_key");
  }

  // Only the oracle sees keys; every other endpoint is built from nothing but its spec.
  std::vector<TaskInstance> keyed;
  if (config.endpoint.value("type", std::string()) == "oracle") {
    keyed = tasks;
    for (auto& t : keyed) t.answer_key = keys.at(t.task_id);
  }
  const auto endpoint = modelio::make_endpoint(config.endpoint, keyed);

  const fs::path dir = run_dir(config);
  fs::create_directories(dir);
  const auto graded_path = (dir / "graded.jsonl").string();
  std::set<std::string> done;
  if (fs::exists(graded_path)) {
    // Drop a torn final line left by an interrupted run before appending.
    const auto previous = read_jsonl(graded_path, true);
    for (const auto& j : previous) done.insert(j.at("task_id").get<std::string>());
    write_file_atomic(graded_path, to_jsonl(previous));
  }

  std::vector<const TaskInstance*> pending;
  for (const auto& t : tasks) {
    if (!done.count(t.task_id)) pending.push_back(&t);
  }

  std::map<std::pair<std::string, std::string>, taskgen::Subject> subjects;
  for (const auto* t : pending) {
    const auto key = std::make_pair(t->program, t->category);
    if (subjects.count(key)) continue;
    const auto* e = c->find(t->program);
    if (!e) throw Error("task " + t->task_id + " names a program missing from the corpus");
    subjects.emplace(key, taskgen::make_subject(e->id, e->unit, e->tests, t->category, config.master_seed));
  }

  modelio::Transcript transcript((dir / "transcript.jsonl").string());
  std::ofstream graded_out(graded_path, std::ios::app);
  if (!graded_out) throw Error("cannot append to " + graded_path);
  std::mutex graded_mutex;
  std::atomic<int> failures{0};
  std::string first_error;
  const std::string model = endpoint->name();

  parallel_for(pending.size(), config.concurrency, [&](std::size_t i) {
    TaskInstance task = *pending[i];
    const auto prompt = modelio::build_prompt(task, config.shots);
    nlohmann::json record = {{"task_id", task.task_id}, {"model", model}, {"shots", config.shots},
                             {"messages", prompt.messages()}};
    metrics::GradedResult result;
    task.answer_key = keys.at(task.task_id);  // grading only; the prompt is already built
    try {
      const auto reply = endpoint->query(prompt);
      record["response"] = reply;
      const auto parsed = modelio::parse_answer(task.type, reply);
      record["parsed"] = parsed.to_json();
      result = metrics::grade(task, parsed, subjects.at({task.program, task.category}), model);
    } catch (const Error& e) {
      record["error"] = e.what();
      result = metrics::grade_failure(task, model, std::string("endpoint error: ") + e.what());
      if (failures++ == 0) {
        std::lock_guard<std::mutex> lock(graded_mutex);
        first_error = e.what();
      }
    }
    transcript.append(record);
    std::lock_guard<std::mutex> lock(graded_mutex);
    graded_out << result.to_json().dump() << "\n";
    graded_out.flush();
  });

  out << "dispatched " << pending.size() << " tasks (" << done.size() << " already graded); endpoint errors "
      << failures.load() << "\n";
  if (failures > 0) err << "first endpoint error: " << first_error << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const fs::path dir = run_dir(config);
  const auto graded_path = (dir / "graded.jsonl").string();
  if (!fs::exists(graded_path)) {
    err << "no graded results at " << graded_path << "\n";
    return kExitMissingCells;
  }
  std::vector<metrics::GradedResult> graded;
  for (const auto& j : read_jsonl(graded_path, true)) graded.push_back(metrics::GradedResult::from_json(j));
  std::sort(graded.begin(), graded.end(),
            [](const auto& a, const auto& b) { return std::tie(a.model, a.task_id) < std::tie(b.model, b.task_id); });
  const auto report = metrics::aggregate_report(graded, config.categories, config.task_types);
  write_file_atomic((dir / "report.json").string(), report.json.dump(2) + "\n");
  write_file_atomic((dir / "report.md").string(), report.markdown);
  out << report.markdown;
  if (!report.missing.empty()) {
    for (const auto& m : report.missing) err << "missing cell: " << m << "\n";
    return kExitMissingCells;
  }
  return kExitOk;
}

}  // namespace jmlbench::cli
