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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jmlbench/lang/ast.hpp"

namespace jmlbench::runtime {

// Arrays have reference semantics, as in Java: assignment aliases, callee
// mutations are visible to the caller.
using ArrayRef = std::shared_ptr<std::vector<std::int32_t>>;

class Value {
 public:
  Value() : v_(std::int32_t{0}) {}
  static Value of_int(std::int32_t x) { return Value(x); }
  static Value of_bool(bool b) { return Value(b); }
  static Value of_array(std::vector<std::int32_t> xs) {
    return Value(std::make_shared<std::vector<std::int32_t>>(std::move(xs)));
  }
  static Value of_string(std::string s) { return Value(std::move(s)); }

  lang::TypeTag type() const;
  bool is_int() const { return std::holds_alternative<std::int32_t>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_array() const { return std::holds_alternative<ArrayRef>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }

  std::int32_t as_int() const { return std::get<std::int32_t>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const ArrayRef& as_array() const { return std::get<ArrayRef>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }

  // Copy that shares no array storage with this value.
  Value deep_copy() const;

  std::string to_string() const;

  // Element-wise equality for arrays.
  friend bool operator==(const Value& a, const Value& b);

 private:
  explicit Value(std::int32_t x) : v_(x) {}
  explicit Value(bool b) : v_(b) {}
  explicit Value(ArrayRef a) : v_(std::move(a)) {}
  explicit Value(std::string s) : v_(std::move(s)) {}

  std::variant<std::int32_t, bool, ArrayRef, std::string> v_;
};

// JSON encoding: Int as number, Bool as boolean, IntArray as array of
// numbers, Str as string. Throws Error on anything else.
nlohmann::json to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

using Bindings = std::map<std::string, Value>;

// Program state at a check site (deep copies).
struct StateSnapshot {
  Bindings vars;
  std::optional<Value> result;
  std::optional<Bindings> old;

  nlohmann::json to_json() const;
};

struct TestCase {
  std::string method;
  std::vector<Value> args;
  std::optional<Value> expected;

  nlohmann::json to_json() const;
  static TestCase from_json(const nlohmann::json& j);
};

// JSON-lines: one test per non-empty line.
std::vector<TestCase> parse_tests_jsonl(const std::string& text);
std::string write_tests_jsonl(const std::vector<TestCase>& tests);

// Throws TypeError when the method is unknown or arity/types do not match.
void check_test_arity(const lang::SourceUnit& unit, const TestCase& test);

}  // namespace jmlbench::runtime
