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

#include "jmlbench/runtime/value.hpp"

#include <limits>
#include <sstream>

#include "jmlbench/util/error.hpp"

namespace jmlbench::runtime {

using nlohmann::json;

lang::TypeTag Value::type() const {
  switch (v_.index()) {
    case 0: return lang::TypeTag::kInt;
    case 1: return lang::TypeTag::kBool;
    case 2: return lang::TypeTag::kIntArray;
    default: return lang::TypeTag::kString;
  }
}

Value Value::deep_copy() const {
  if (is_array()) return of_array(*as_array());
  return *this;
}

std::string Value::to_string() const {
  if (is_int()) return std::to_string(as_int());
  if (is_bool()) return as_bool() ? "true" : "false";
  if (is_string()) return to_json(*this).dump();
  std::ostringstream os;
  os << "[";
  const auto& xs = *as_array();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ", ";
    os << xs[i];
  }
  os << "]";
  return os.str();
}

bool operator==(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return false;
  if (a.is_array()) return *a.as_array() == *b.as_array();
  return a.v_ == b.v_;
}

json to_json(const Value& v) {
  if (v.is_int()) return v.as_int();
  if (v.is_bool()) return v.as_bool();
  if (v.is_string()) return v.as_string();
  return *v.as_array();
}

namespace {

std::int32_t json_int(const json& j) {
  if (!j.is_number_integer()) throw Error("expected an integer, got " + j.dump());
  const auto x = j.get<std::int64_t>();
  if (x < std::numeric_limits<std::int32_t>::min() || x > std::numeric_limits<std::int32_t>::max()) {
    throw Error("integer out of 32-bit range: " + j.dump());
  }
  return static_cast<std::int32_t>(x);
}

}  // namespace

Value value_from_json(const json& j) {
  if (j.is_boolean()) return Value::of_bool(j.get<bool>());
  if (j.is_number()) return Value::of_int(json_int(j));
  if (j.is_string()) return Value::of_string(j.get<std::string>());
  if (j.is_array()) {
    std::vector<std::int32_t> xs;
    xs.reserve(j.size());
    for (const auto& e : j) xs.push_back(json_int(e));
    return Value::of_array(std::move(xs));
  }
  throw Error("unsupported JSON value: " + j.dump());
}

json StateSnapshot::to_json() const {
  json j;
  j["vars"] = json::object();
  for (const auto& [k, v] : vars) j["vars"][k] = runtime::to_json(v);
  if (result) j["result"] = runtime::to_json(*result);
  if (old) {
    j["old"] = json::object();
    for (const auto& [k, v] : *old) j["old"][k] = runtime::to_json(v);
  }
  return j;
}

json TestCase::to_json() const {
  json j;
  j["method"] = method;
  j["args"] = json::array();
  for (const auto& a : args) j["args"].push_back(runtime::to_json(a));
  if (expected) j["expected"] = runtime::to_json(*expected);
  return j;
}

TestCase TestCase::from_json(const json& j) {
  if (!j.is_object() || !j.contains("method") || !j.contains("args") || !j["args"].is_array()) {
    throw Error("test case must be an object with \"method\" and \"args\": " + j.dump());
  }
  TestCase t;
  t.method = j["method"].get<std::string>();
  for (const auto& a : j["args"]) t.args.push_back(value_from_json(a));
  if (j.contains("expected") && !j["expected"].is_null()) t.expected = value_from_json(j["expected"]);
  return t;
}

std::vector<TestCase> parse_tests_jsonl(const std::string& text) {
  std::vector<TestCase> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(TestCase::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error("tests line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("tests line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string write_tests_jsonl(const std::vector<TestCase>& tests) {
  std::string out;
  for (const auto& t : tests) out += t.to_json().dump() + "\n";
  return out;
}

void check_test_arity(const lang::SourceUnit& unit, const TestCase& test) {
  const lang::Method* m = unit.find_method(test.method);
  if (!m) throw TypeError("test calls unknown method '" + test.method + "'");
  if (m->params.size() != test.args.size()) {
    throw TypeError("test for '" + test.method + "' has " + std::to_string(test.args.size()) +
                    " arguments, expected " + std::to_string(m->params.size()));
  }
  for (std::size_t i = 0; i < test.args.size(); ++i) {
    const auto want = m->params[i].type;
    const auto got = test.args[i].type();
    // An empty JSON array decodes as int[] already, so types compare directly.
    if (want != got) {
      throw TypeError("test for '" + test.method + "': argument " + std::to_string(i + 1) + " has type " +
                      lang::type_name(got) + ", expected " + lang::type_name(want));
    }
  }
}

}  // namespace jmlbench::runtime
