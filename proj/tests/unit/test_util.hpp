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

#include <string>
#include <vector>

#include "jmlbench/lang/ast.hpp"
#include "jmlbench/runtime/value.hpp"

namespace jmlbench::testing {

std::string read_file(const std::string& path);
std::string corpus_dir();
std::vector<std::string> corpus_ids();

struct Program {
  std::string id;
  lang::SourceUnit unit;
  std::vector<runtime::TestCase> tests;
};

Program load_program(const std::string& id);
std::vector<Program> load_all_programs();

}  // namespace jmlbench::testing
