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

#include "jmlbench/modelio/endpoint.hpp"

#include <cstdlib>
#include <ctime>
#include <regex>
#include <thread>

#include <httplib.h>

#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/util/rng.hpp"

namespace jmlbench::modelio {

using taskgen::TaskType;

// ---------------------------------------------------------------------------
// Mock endpoints
// ---------------------------------------------------------------------------

OracleEndpoint::OracleEndpoint(const std::vector<taskgen::TaskInstance>& tasks_with_keys) {
  for (const auto& t : tasks_with_keys) tasks_[t.task_id] = t;
}

std::string OracleEndpoint::query(const PromptBundle& prompt) {
  auto it = tasks_.find(prompt.task_id);
  if (it == tasks_.end()) throw Error("oracle has no key for task " + prompt.task_id);
  const auto& task = it->second;
  const auto& key = task.answer_key;
  switch (task.type) {
    case TaskType::kJudgement:
      return key.at("truth").get<bool>() ? "true" : "false";
    case TaskType::kSelection:
      return key.at("answer").get<std::string>();
    case TaskType::kInfilling:
      return "```jml\n" + key.at("hidden_answer").get<std::string>() + "\n```";
    case TaskType::kGeneration: {
      auto unit = lang::parse_unit(task.payload.at("program").get<std::string>());
      unit.specs.clear();
      for (const auto& g : key.at("ground_truth")) {
        auto c = lang::parse_clause(g.at("clause").get<std::string>());
        c.anchor = taskgen::anchor_from_json(g.at("anchor"));
        unit.specs.push_back(std::move(c));
      }
      return "```java\n" + lang::print_unit(unit) + "```";
    }
  }
  return "";
}

std::string RandomAnswerEndpoint::query(const PromptBundle& prompt) {
  Rng rng(derive_seed(seed_, prompt.task_id, "random-answer"));
  switch (prompt.type) {
    case TaskType::kJudgement:
      return rng.coin() ? "true" : "false";
    case TaskType::kSelection:
      return std::string(1, static_cast<char>('A' + rng.below(4)));
    case TaskType::kInfilling:
      return "```jml\n" + std::to_string(rng.range(-1, 1)) + "\n```";
    case TaskType::kGeneration: {
      // `ensures true` above every method header of the program in the prompt.
      static const std::regex header(R"(^\s*(?:public\s+)?(?:static\s+)?(?:int\s*\[\s*\]|int|boolean|void|String)\s+\w+\s*\()");
      std::string out = "```java\n";
      std::istringstream in(prompt.task_text);
      bool inside = false;
      for (std::string line; std::getline(in, line);) {
        if (line.rfind("```", 0) == 0) {
          if (inside) break;
          inside = true;
          continue;
        }
        if (!inside) continue;
        if (std::regex_search(line, header)) out += "    //@ ensures true;\n";
        out += line + "\n";
      }
      return out + "```";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// HTTP chat endpoint
// ---------------------------------------------------------------------------

HttpChatConfig HttpChatConfig::from_json(const nlohmann::json& j) {
  HttpChatConfig c;
  c.base_url = j.at("base_url").get<std::string>();
  c.model = j.value("model", std::string("default"));
  c.api_key_env = j.value("api_key_env", std::string(kApiKeyEnv));
  c.temperature = j.value("temperature", 0.0);
  c.top_k = j.value("top_k", 1);
  c.timeout_seconds = j.value("timeout_seconds", 60.0);
  c.max_retries = j.value("max_retries", 3);
  c.backoff_ms = j.value("backoff_ms", 500);
  c.requests_per_second = j.value("requests_per_second", 0.0);
  return c;
}

HttpChatEndpoint::HttpChatEndpoint(HttpChatConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, url)) throw Error("malformed base_url '" + config_.base_url + "'");
  scheme_host_port_ = m[1].str();
  path_ = m[2].str();
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
  tokens_ = std::max(1.0, config_.requests_per_second);
  last_refill_ = std::chrono::steady_clock::now();
}

nlohmann::json HttpChatEndpoint::request_body(const PromptBundle& prompt) const {
  return {{"model", config_.model},
          {"messages", prompt.messages()},
          {"temperature", config_.temperature},
          {"top_k", config_.top_k}};
}

void HttpChatEndpoint::acquire_token() {
  if (config_.requests_per_second <= 0) return;
  const double capacity = std::max(1.0, config_.requests_per_second);
  for (;;) {
    std::chrono::duration<double> wait{0};
    {
      std::lock_guard<std::mutex> lock(bucket_mutex_);
      const auto now = std::chrono::steady_clock::now();
      const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
      tokens_ = std::min(capacity, tokens_ + elapsed * config_.requests_per_second);
      last_refill_ = now;
      if (tokens_ >= 1) {
        tokens_ -= 1;
        return;
      }
      wait = std::chrono::duration<double>((1 - tokens_) / config_.requests_per_second);
    }
    std::this_thread::sleep_for(wait);
  }
}

std::string HttpChatEndpoint::query(const PromptBundle& prompt) {
  if (!config_.api_key_env.empty() && api_key_.empty()) {
    throw AuthError("environment variable " + config_.api_key_env + " is not set");
  }
  const std::string body = request_body(prompt).dump();
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const auto seconds = static_cast<time_t>(config_.timeout_seconds);
  const auto micros = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(seconds)) * 1e6);

  std::string last_error = "no attempt made";
  bool last_was_timeout = false;
  int backoff = config_.backoff_ms;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    acquire_token();
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(path_ + "/chat/completions", headers, body, "application/json");
    if (!res) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      last_was_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                         (res.error() == httplib::Error::Read && elapsed >= config_.timeout_seconds);
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 429 || res->status >= 500) {
      last_was_timeout = false;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed completion: ") + e.what());
    }
  }
  const std::string message = "giving up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error;
  if (last_was_timeout) throw TimeoutError(message);
  throw TransportError(message);
}

std::unique_ptr<Endpoint> make_endpoint(const nlohmann::json& spec,
                                        const std::vector<taskgen::TaskInstance>& tasks_with_keys) {
  const auto type = spec.at("type").get<std::string>();
  if (type == "oracle") return std::make_unique<OracleEndpoint>(tasks_with_keys);
  if (type == "fixed") return std::make_unique<FixedAnswerEndpoint>(spec.at("text").get<std::string>());
  if (type == "random") return std::make_unique<RandomAnswerEndpoint>(spec.value("seed", std::uint64_t{0}));
  if (type == "http") return std::make_unique<HttpChatEndpoint>(HttpChatConfig::from_json(spec));
  throw Error("unknown endpoint type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Transcript
// ---------------------------------------------------------------------------

Transcript::Transcript(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw Error("cannot open transcript " + path);
}

void Transcript::append(nlohmann::json record) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  record["timestamp"] = stamp;
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << record.dump() << "\n";
  out_.flush();
}

}  // namespace jmlbench::modelio
