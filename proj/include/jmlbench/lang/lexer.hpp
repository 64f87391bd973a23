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
#include <string_view>
#include <vector>

namespace jmlbench::lang {

enum class Tok {
  kEnd,
  kIdent,
  kIntLit,
  kStringLit,
  kSpecLine,  // the text following `//@` up to end of line
  kPunct,     // operators and punctuation, spelled in `text`
  kBackslash, // \result, \old, \forall, \exists (text without the backslash)
  kMask,      // <MASK>
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int col = 1;

  bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
  bool punct(std::string_view t) const { return is(Tok::kPunct, t); }
  bool ident(std::string_view t) const { return is(Tok::kIdent, t); }
};

// Tokenizes subject-language text. `//@` comments become kSpecLine tokens;
// other comments are dropped. Throws SyntaxError or UnsupportedFeature.
std::vector<Token> tokenize(std::string_view text, int first_line = 1, int first_col = 1);

}  // namespace jmlbench::lang
