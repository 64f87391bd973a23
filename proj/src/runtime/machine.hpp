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

// Internal: the tree-walking interpreter shared by execute() and the clause
// checker.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jmlbench/lang/ast.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/runtime/interpreter.hpp"
#include "jmlbench/runtime/value.hpp"

namespace jmlbench::runtime::detail {

struct FaultSignal {
  Fault fault;
};

struct Frame {
  const lang::Method* method = nullptr;
  std::vector<std::pair<std::string, Value>> vars;  // innermost last
  std::optional<Value> ret;
  bool requires_ok = true;
  std::optional<Bindings> entry;  // parameter values at entry, arrays shared
  std::optional<Bindings> old;    // deep copies at entry

  Value* find(const std::string& name);
  Bindings snapshot() const;
};

// Collects the states reached at one check site.
struct SiteRecorder {
  lang::Anchor anchor;
  lang::SpecKind kind;
  std::vector<StateSnapshot> states;
};

// Clause bookkeeping for one check_specs() call.
struct Monitor {
  SiteRecorder* recorder = nullptr;
  std::map<std::string, std::vector<std::size_t>> requires_of;
  std::map<std::string, std::vector<std::size_t>> ensures_of;
  std::map<lang::Anchor, std::vector<std::size_t>> invariants_of;
  std::vector<SpecVerdict> verdicts;
  std::vector<std::string> log;
  const TestCase* test = nullptr;

  explicit Monitor(const lang::SourceUnit& unit);
  bool all_refuted() const;
};

using Binders = std::vector<std::pair<std::string, std::int32_t>>;

// Where names resolve during evaluation.
struct Ctx {
  Frame* frame = nullptr;            // live program variables
  const Bindings* fixed = nullptr;   // used instead of a frame (ensures, replay)
  const Value* result = nullptr;
  const Bindings* old = nullptr;
  Binders* binders = nullptr;
};

class Machine {
 public:
  Machine(const lang::SourceUnit& unit, std::int64_t step_limit, CoverageReport* coverage,
          Monitor* monitor);

  ExecOutcome run(const TestCase& test);

  // Evaluates a clause expression; returns the fault if it raised one.
  std::optional<Fault> eval_clause(const lang::Expr& e, const Ctx& ctx, bool& value);

 private:
  std::optional<Value> invoke(const lang::Method& m, std::vector<Value> args);
  bool exec(const lang::Stmt& s, Frame& f);
  bool exec_block(const lang::Block& b, Frame& f);
  bool exec_while(const lang::While& w, int line, Frame& f);
  bool exec_for(const lang::For& w, int line, Frame& f);
  void exec_assign(const lang::Assign& a, Frame& f);

  Value eval(const lang::Expr& e, const Ctx& ctx);
  Value eval_binary(const lang::Binary& b, const Ctx& ctx);
  bool eval_quant(const lang::Quant& q, const Ctx& ctx);
  Value lookup(const std::string& name, const Ctx& ctx);

  void step();
  void hit(int line);
  void branch(int line, bool taken);
  [[noreturn]] void fault(FaultKind kind, const std::string& message);

  void on_entry(Frame& f);
  void on_return(Frame& f);
  void check_invariants(const lang::Method& m, int loop_id, Frame& f, const std::string& when);
  void refute(std::size_t idx, const std::optional<Fault>& fault, StateSnapshot snap,
              const std::string& site);

  const lang::SourceUnit& unit_;
  std::int64_t step_limit_;
  CoverageReport* coverage_;
  Monitor* monitor_;
  std::int64_t steps_ = 0;
  int depth_ = 0;
  int line_ = 0;
  int spec_depth_ = 0;  // > 0 while evaluating a clause
  std::int64_t quant_iters_ = 0;
};

}  // namespace jmlbench::runtime::detail
