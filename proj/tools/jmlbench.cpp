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

#include <CLI11.hpp>

#include <iostream>
#include <json.hpp>

#include "jmlbench/cli/commands.hpp"

namespace {

using namespace jmlbench;

struct Overrides {
  std::string config_path;
  std::string corpus;
  std::string output;
  std::string endpoint;
  std::string run_id;
  std::vector<std::string> categories;
  std::vector<std::string> task_types;
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  std::optional<int> concurrency;
};

void add_overrides(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON run configuration file");
  sub->add_option("--corpus", o.corpus, "Corpus root directory");
  sub->add_option("--output", o.output, "Output directory");
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--shots", o.shots, "Shot count")->check(CLI::Range(0, 2));
  sub->add_option("--categories", o.categories, "Categories to include")->delimiter(',');
  sub->add_option("--task-types", o.task_types, "Task types to include")->delimiter(',');
  sub->add_option("--endpoint", o.endpoint, "Endpoint as JSON, or one of oracle, random");
  sub->add_option("--run-id", o.run_id, "Run identifier");
  sub->add_option("--concurrency", o.concurrency, "Parallel workers")->check(CLI::PositiveNumber);
}

cli::RunConfig resolve(const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) j = cli::RunConfig::load(o.config_path).to_json();
  if (!o.corpus.empty()) j["corpus"] = o.corpus;
  if (!o.output.empty()) j["output"] = o.output;
  if (o.seed) j["seed"] = *o.seed;
  if (o.shots) j["shots"] = *o.shots;
  if (!o.categories.empty()) j["categories"] = o.categories;
  if (!o.task_types.empty()) j["task_types"] = o.task_types;
  if (!o.endpoint.empty()) {
    j["endpoint"] = o.endpoint.front() == '{' ? nlohmann::json::parse(o.endpoint)
                                              : nlohmann::json{{"type", o.endpoint}};
  }
  if (!o.run_id.empty()) j["run_id"] = o.run_id;
  if (o.concurrency) j["concurrency"] = *o.concurrency;
  return cli::RunConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Specification comprehension benchmark harness"};
  app.require_subcommand(1);

  std::string corpus_root = "corpus";
  auto* validate = app.add_subcommand("validate", "Validate the corpus and print coverage");
  validate->add_option("corpus", corpus_root, "Corpus root directory");
  auto* manifest = app.add_subcommand("manifest", "Write the corpus manifest");
  manifest->add_option("corpus", corpus_root, "Corpus root directory");

  Overrides o;
  auto* perturb = app.add_subcommand("perturb", "Write perturbed variants and rename maps");
  auto* gentasks = app.add_subcommand("gen-tasks", "Build tasks and answer keys");
  auto* run = app.add_subcommand("run", "Query the endpoint and grade answers");
  auto* score = app.add_subcommand("score", "Aggregate graded results into reports");
  for (auto* sub : {perturb, gentasks, run, score}) add_overrides(sub, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cli::cmd_validate(corpus_root, std::cout, std::cerr);
    if (*manifest) return cli::cmd_manifest(corpus_root, std::cout, std::cerr);
    const auto config = resolve(o);
    if (*perturb) return cli::cmd_perturb(config, std::cout, std::cerr);
    if (*gentasks) return cli::cmd_gentasks(config, std::cout, std::cerr);
    if (*run) return cli::cmd_run(config, std::cout, std::cerr);
    if (*score) return cli::cmd_score(config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitError;
  }
  return cli::kExitError;
}
