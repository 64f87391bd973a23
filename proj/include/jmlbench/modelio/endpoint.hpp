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

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "jmlbench/modelio/modelio.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::modelio {

class TransportError : public Error {
 public:
  using Error::Error;
};
class AuthError : public Error {
 public:
  using Error::Error;
};
class TimeoutError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kApiKeyEnv = "SPECEVAL_API_KEY";

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual std::string name() const = 0;
  // Must be safe to call from several threads at once.
  virtual std::string query(const PromptBundle& prompt) = 0;
};

// Answers every task from its answer key.
class OracleEndpoint : public Endpoint {
 public:
  explicit OracleEndpoint(const std::vector<taskgen::TaskInstance>& tasks_with_keys);
  std::string name() const override { return "oracle"; }
  std::string query(const PromptBundle& prompt) override;

 private:
  std::map<std::string, taskgen::TaskInstance> tasks_;
};

class FixedAnswerEndpoint : public Endpoint {
 public:
  explicit FixedAnswerEndpoint(std::string text) : text_(std::move(text)) {}
  std::string name() const override { return "fixed"; }
  std::string query(const PromptBundle&) override { return text_; }

 private:
  std::string text_;
};

// A well-formed but uninformed answer, a function of (seed, task id).
class RandomAnswerEndpoint : public Endpoint {
 public:
  explicit RandomAnswerEndpoint(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }
  std::string query(const PromptBundle& prompt) override;

 private:
  std::uint64_t seed_;
};

struct HttpChatConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model;
  std::string api_key_env = kApiKeyEnv;
  double temperature = 0.0;
  int top_k = 1;
  double timeout_seconds = 60;
  int max_retries = 3;
  int backoff_ms = 500;       // doubled after each failed attempt
  double requests_per_second = 0;  // 0 disables rate limiting

  static HttpChatConfig from_json(const nlohmann::json& j);
};

// Chat-completions style endpoint: POST {base_url}/chat/completions.
class HttpChatEndpoint : public Endpoint {
 public:
  explicit HttpChatEndpoint(HttpChatConfig config);
  std::string name() const override { return config_.model; }
  std::string query(const PromptBundle& prompt) override;

  nlohmann::json request_body(const PromptBundle& prompt) const;

 private:
  void acquire_token();

  HttpChatConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::mutex bucket_mutex_;
  double tokens_ = 1;
  std::chrono::steady_clock::time_point last_refill_;
};

// Builds an endpoint from `{"type": "oracle" | "fixed" | "random" | "http", ...}`.
// The oracle needs the tasks with their keys.
std::unique_ptr<Endpoint> make_endpoint(const nlohmann::json& spec,
                                        const std::vector<taskgen::TaskInstance>& tasks_with_keys);

// Append-only JSON-lines log; each record gets a UTC timestamp.
class Transcript {
 public:
  explicit Transcript(const std::string& path);
  void append(nlohmann::json record);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace jmlbench::modelio
