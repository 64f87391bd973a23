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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jmlbench/corpus/corpus.hpp"
#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/metrics/metrics.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/util/rng.hpp"
#include "stub_server.hpp"
#include "test_util.hpp"

namespace jmlbench {
namespace {

namespace fs = std::filesystem;
using namespace cli;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    out_dir_ = fs::temp_directory_path() /
               ("jmlbench_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(out_dir_);
    config_.corpus_root = testing::corpus_dir();
    config_.output_dir = out_dir_.string();
    config_.master_seed = 11;
  }
  void TearDown() override { fs::remove_all(out_dir_); }

  template <typename Cmd>
  int run(Cmd cmd) {
    out_.str("");
    err_.str("");
    if constexpr (std::is_invocable_v<Cmd, const RunConfig&, std::ostream&, std::ostream&>) {
      return cmd(config_, out_, err_);
    } else {
      return cmd(config_, out_, err_, Rewriter{});
    }
  }
  std::vector<nlohmann::json> lines(const std::string& path) {
    std::vector<nlohmann::json> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
  }

  fs::path out_dir_;
  RunConfig config_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, ValidateCleanCorpus) {
  EXPECT_EQ(cmd_validate(config_.corpus_root, out_, err_), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("| fizz_buzz | branch-only |"), std::string::npos);
  EXPECT_NE(out_.str().find("Branch cov"), std::string::npos);
}

TEST_F(CliTest, ValidateRefutedGroundTruthExitsTwo) {
  fs::create_directories(out_dir_);
  fs::copy(config_.corpus_root, out_dir_ / "corpus", fs::copy_options::recursive);
  const auto path = out_dir_ / "corpus" / "programs" / "max3.sj";
  auto text = testing::read_file(path.string());
  const auto at = text.find("\\result >= a");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 12, "\\result <= a");
  std::ofstream(path, std::ios::trunc) << text;
  EXPECT_EQ(cmd_validate((out_dir_ / "corpus").string(), out_, err_), kExitValidation);
  EXPECT_NE(err_.str().find("by test"), std::string::npos) << err_.str();
}

TEST_F(CliTest, PerturbWritesEveryEligibleVariantDeterministically) {
  ASSERT_EQ(run(cmd_perturb), kExitOk) << err_.str();
  const auto n = testing::corpus_ids().size();
  int variants = 0, maps = 0;
  for (const auto& e : fs::recursive_directory_iterator(variants_dir(config_))) {
    variants += e.path().extension() == ".sj";
    maps += e.path().string().ends_with(".rename_map.json");
  }
  int skipped = 0;
  std::istringstream log(err_.str());
  for (std::string line; std::getline(log, line);) skipped += line.rfind("skipped ", 0) == 0;
  EXPECT_EQ(variants + skipped, static_cast<int>(5 * n));
  EXPECT_EQ(maps, variants);

  std::map<std::string, std::string> first;
  for (const auto& e : fs::recursive_directory_iterator(variants_dir(config_))) {
    if (e.is_regular_file()) first[e.path().string()] = testing::read_file(e.path().string());
  }
  fs::remove_all(variants_dir(config_));
  ASSERT_EQ(run(cmd_perturb), kExitOk);
  for (const auto& [path, text] : first) EXPECT_EQ(testing::read_file(path), text) << path;
}

TEST_F(CliTest, BrokenRewriterExitsThree) {
  // Flips an if without negating its condition.
  const Rewriter broken = [](perturb::PerturbKind kind, const lang::SourceUnit& unit, std::uint64_t seed) {
    auto v = perturb::apply_perturbation(kind, unit, seed);
    if (kind != perturb::PerturbKind::kIfElseFlip) return v;
    for (auto& m : v.unit.methods) {
      bool done = false;
      lang::visit_stmts_mut(m.body, [&](lang::Stmt& s) {
        if (done || !s.is<lang::If>()) return;
        auto& i = s.as<lang::If>();
        if (!i.cond.is<lang::Unary>()) return;
        lang::Expr inner = *i.cond.as<lang::Unary>().operand;
        i.cond = std::move(inner);
        done = true;
      });
      if (done) break;
    }
    return v;
  };
  EXPECT_EQ(cmd_perturb(config_, out_, err_, broken), kExitPreservation);
  EXPECT_NE(err_.str().find("PRESERVATION FAILURE IfElseFlip/"), std::string::npos) << err_.str();
}

TEST_F(CliTest, GenTasksCardinalityAndKeySeparation) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk) << err_.str();
  const auto tasks = lines(tasks_path(config_));
  const auto keys = lines(keys_path(config_));
  ASSERT_EQ(tasks.size(), keys.size());
  int category_skips = 0, type_skips = 0;
  std::istringstream log(err_.str());
  for (std::string line; std::getline(log, line);) {
    if (line.find(": skipped, ") != std::string::npos) ++category_skips;
    else if (line.find("note: ") == 0 && line.find("unrefutable") == std::string::npos) ++type_skips;
  }
  const auto n = testing::corpus_ids().size();
  EXPECT_EQ(tasks.size() + 4 * category_skips + type_skips, 6 * 4 * n);
  for (const auto& t : tasks) EXPECT_FALSE(t.contains("answer_key")) << t["task_id"];
  const auto text = testing::read_file(tasks_path(config_));
  EXPECT_EQ(text.find("ground_truth"), std::string::npos);
  EXPECT_EQ(text.find("hidden_answer"), std::string::npos);
  EXPECT_EQ(text.find("\"truth\""), std::string::npos);
  EXPECT_EQ(fs::status(keys_path(config_)).permissions() & fs::perms::others_read, fs::perms::none);
}

TEST_F(CliTest, FizzBuzzSelectionHasOneCorrectOptionOfFour) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  const auto p = testing::load_program("fizz_buzz");
  std::map<std::string, nlohmann::json> keys;
  for (const auto& k : lines(keys_path(config_))) keys[k["task_id"]] = k["answer_key"];
  for (const auto& t : lines(tasks_path(config_))) {
    if (t["task_id"] != "fizz_buzz/Original/Selection") continue;
    const auto& options = t["payload"]["options"];
    ASSERT_EQ(options.size(), 4u);
    int correct = 0;
    std::string correct_label;
    for (const auto& o : options) {
      auto clause = lang::parse_clause(o["clause"].get<std::string>());
      clause.anchor = taskgen::anchor_from_json(t["payload"]["anchor"]);
      if (runtime::check_clause_correct(p.unit, clause, p.tests).correct) {
        ++correct;
        correct_label = o["label"];
      }
    }
    const auto& origins = keys[t["task_id"]]["origins"];
    const bool has_trivial = std::find(origins.begin(), origins.end(), "trivial") != origins.end();
    EXPECT_EQ(correct, has_trivial ? 2 : 1);
    if (!has_trivial) EXPECT_EQ(correct_label, keys[t["task_id"]]["answer"]);
    return;
  }
  FAIL() << "no FizzBuzz selection task";
}

TEST_F(CliTest, OracleRunScoresPerfectly) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  ASSERT_EQ(run(cmd_run), kExitOk) << err_.str();
  const auto graded = lines(fs::path(run_dir(config_)) / "graded.jsonl");
  EXPECT_EQ(graded.size(), lines(tasks_path(config_)).size());
  for (const auto& g : graded) EXPECT_TRUE(g["success"].get<bool>()) << g.dump();
  EXPECT_EQ(lines(fs::path(run_dir(config_)) / "transcript.jsonl").size(), graded.size());
  ASSERT_EQ(run(cmd_score), kExitOk) << err_.str();
  const auto report = nlohmann::json::parse(testing::read_file(run_dir(config_) + "/report.json"));
  for (const auto& [category, cell] : report["models"]["oracle"]["cells"].items()) {
    EXPECT_EQ(cell["Judgement"]["accuracy"], 1.0) << category;
    EXPECT_EQ(cell["Generation"]["recall"], 1.0) << category;
  }
}

TEST_F(CliTest, ResumedRunMatchesUninterruptedRun) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  config_.endpoint = {{"type", "random"}, {"seed", 3}};
  ASSERT_EQ(run(cmd_run), kExitOk);
  ASSERT_EQ(run(cmd_score), kExitOk);
  const auto uninterrupted = testing::read_file(run_dir(config_) + "/report.json");

  // Keep the first 37 graded lines plus a torn one, as after a crash.
  const auto graded_path = run_dir(config_) + "/graded.jsonl";
  std::istringstream all(testing::read_file(graded_path));
  std::string kept, line;
  for (int i = 0; i < 37 && std::getline(all, line); ++i) kept += line + "\n";
  std::getline(all, line);
  kept += line.substr(0, line.size() / 2);
  std::ofstream(graded_path, std::ios::trunc) << kept;

  ASSERT_EQ(run(cmd_run), kExitOk);
  EXPECT_NE(out_.str().find("(37 already graded)"), std::string::npos) << out_.str();
  ASSERT_EQ(run(cmd_score), kExitOk);
  EXPECT_EQ(testing::read_file(run_dir(config_) + "/report.json"), uninterrupted);
}

TEST_F(CliTest, TranscriptCarriesNoAnswerKeyText) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  config_.endpoint = {{"type", "random"}, {"seed", 1}};
  ASSERT_EQ(run(cmd_run), kExitOk);
  std::map<std::string, nlohmann::json> keys;
  for (const auto& k : lines(keys_path(config_))) keys[k["task_id"]] = k["answer_key"];
  for (const auto& record : lines(run_dir(config_) + "/transcript.jsonl")) {
    const auto prompt = record["messages"].back()["content"].get<std::string>();
    const auto& key = keys.at(record["task_id"]);
    EXPECT_FALSE(record.contains("answer_key"));
    if (key.contains("ground_truth")) {
      for (const auto& c : key["ground_truth"]) EXPECT_EQ(prompt.find(c["clause"].get<std::string>()), std::string::npos);
    }
    if (key.contains("clause")) EXPECT_EQ(prompt.find(key["clause"].get<std::string>()), std::string::npos);
  }
}

TEST_F(CliTest, ChaoticEndpointDegradesTasksNotTheRun) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  // Every tenth task (by prompt hash) always fails with a server error.
  testing::StubChatServer server([](const nlohmann::json& body, int) {
    if (stable_hash(body["messages"].dump()) % 10 == 0) return std::pair{503, std::string()};
    return std::pair{200, std::string("true")};
  });
  config_.endpoint = {{"type", "http"}, {"base_url", server.base_url()}, {"model", "stub"},
                      {"api_key_env", ""}, {"max_retries", 1}, {"backoff_ms", 1}};
  ASSERT_EQ(run(cmd_run), kExitOk) << err_.str();
  const auto tasks = lines(tasks_path(config_));
  const auto graded = lines(run_dir(config_) + "/graded.jsonl");
  const auto transcript = lines(run_dir(config_) + "/transcript.jsonl");
  EXPECT_EQ(graded.size(), tasks.size());
  EXPECT_EQ(transcript.size(), tasks.size());
  int dropped = 0, errors = 0;
  for (const auto& r : transcript) errors += r.contains("error");
  for (const auto& g : graded) {
    if (g.value("note", std::string()).rfind("endpoint error", 0) == 0) {
      ++dropped;
      EXPECT_FALSE(g["success"].get<bool>());
    }
  }
  EXPECT_EQ(dropped, errors);
  EXPECT_GT(dropped, 0);
  EXPECT_LT(dropped, static_cast<int>(tasks.size()) / 4);
}

TEST_F(CliTest, ScoreWithoutResultsExitsFour) { EXPECT_EQ(run(cmd_score), kExitMissingCells); }

TEST_F(CliTest, ScoreMissingConfiguredCellExitsFour) {
  config_.task_types = {taskgen::TaskType::kJudgement};
  config_.categories = {"Original"};
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  ASSERT_EQ(run(cmd_run), kExitOk);
  config_.categories = {"Original", "NameRandom"};
  EXPECT_EQ(run(cmd_score), kExitMissingCells);
  EXPECT_NE(err_.str().find("oracle/NameRandom/Judgement"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MixedModelReportMatchesHandCount) {
  // Two models, two programs, Judgement only: a handles p1 and p2 on Original
  // and p1 on NameRandom; b handles nothing on Original and p2 on NameRandom.
  config_.categories = {"Original", "NameRandom"};
  config_.task_types = {taskgen::TaskType::kJudgement};
  config_.run_id = "mixed";
  std::string graded;
  const auto add = [&](const std::string& model, const std::string& program, const std::string& category, bool ok) {
    metrics::GradedResult r;
    r.task_id = taskgen::task_id(program, category, taskgen::TaskType::kJudgement);
    r.model = model;
    r.program = program;
    r.category = category;
    r.type = taskgen::TaskType::kJudgement;
    r.success = ok;
    graded += r.to_json().dump() + "\n";
  };
  add("a", "p1", "Original", true);
  add("a", "p2", "Original", true);
  add("a", "p1", "NameRandom", true);
  add("a", "p2", "NameRandom", false);
  add("b", "p1", "Original", false);
  add("b", "p2", "Original", false);
  add("b", "p1", "NameRandom", false);
  add("b", "p2", "NameRandom", true);
  fs::create_directories(run_dir(config_));
  std::ofstream(run_dir(config_) + "/graded.jsonl") << graded;
  ASSERT_EQ(run(cmd_score), kExitOk) << err_.str();
  const auto report = nlohmann::json::parse(testing::read_file(run_dir(config_) + "/report.json"));
  EXPECT_EQ(report["models"]["a"]["cells"]["Original"]["Judgement"]["accuracy"], 1.0);
  EXPECT_EQ(report["models"]["a"]["cells"]["NameRandom"]["Judgement"]["accuracy"], 0.5);
  EXPECT_EQ(report["models"]["b"]["cells"]["NameRandom"]["Judgement"]["successes"], 1);
  EXPECT_EQ(report["models"]["a"]["counterfactual"]["NameRandom"]["J_jud"]["value"], 0.5);  // 1 - 1/2
  EXPECT_EQ(report["models"]["b"]["counterfactual"]["NameRandom"]["J_jud"]["value"], 1.0);  // 1 - 0/1
  const auto md = testing::read_file(run_dir(config_) + "/report.md");
  EXPECT_NE(md.find("| Original | a | 100.00 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| NameRandom | b | 50.00 |"), std::string::npos) << md;
}

TEST_F(CliTest, EndToEndDeterminism) {
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  ASSERT_EQ(run(cmd_run), kExitOk);
  ASSERT_EQ(run(cmd_score), kExitOk);
  const auto tasks = testing::read_file(tasks_path(config_));
  const auto report = testing::read_file(run_dir(config_) + "/report.json");
  fs::remove_all(out_dir_);
  ASSERT_EQ(run(cmd_gentasks), kExitOk);
  ASSERT_EQ(run(cmd_run), kExitOk);
  ASSERT_EQ(run(cmd_score), kExitOk);
  EXPECT_EQ(testing::read_file(tasks_path(config_)), tasks);
  EXPECT_EQ(testing::read_file(run_dir(config_) + "/report.json"), report);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(RunConfig::from_json({{"sed", 1}}), Error);
  EXPECT_THROW(RunConfig::from_json({{"shots", 3}}), Error);
  EXPECT_THROW(RunConfig::from_json({{"categories", {"Shuffled"}}}), Error);
  const auto c = RunConfig::from_json({{"seed", 5}, {"task_types", {"Infilling"}}, {"endpoint", {{"type", "random"}}}});
  EXPECT_EQ(c.master_seed, 5u);
  EXPECT_EQ(c.effective_run_id(), "random");
  EXPECT_EQ(RunConfig::from_json(c.to_json()).to_json(), c.to_json());
}

}  // namespace
}  // namespace jmlbench
