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

#include "jmlbench/lang/lexer.hpp"

#include <array>
#include <cctype>

#include "jmlbench/util/error.hpp"

namespace jmlbench::lang {
namespace {

// Longest first so that maximal munch works with a linear scan.
constexpr std::array<std::string_view, 33> kPuncts = {
    "<==>", "==>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=",
    "/=",   "%=",  "++", "--", "<",  ">",  "+",  "-",  "*",  "/",  "%",
    "!",    "=",   "(",  ")",  "{",  "}",  "[",  "]",  ";",  ",",  ".",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

class Lexer {
 public:
  Lexer(std::string_view text, int line, int col) : text_(text), line_(line), col_(col) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) break;
      out.push_back(next());
      if (out.back().kind == Tok::kEnd) out.pop_back();
    }
    out.push_back(Token{Tok::kEnd, "", line_, col_});
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  Token next() {
    Token tok;
    tok.line = line_;
    tok.col = col_;
    const char c = peek();

    if (c == '/' && peek(1) == '/') {
      if (peek(2) == '@') {
        advance(3);
        tok.kind = Tok::kSpecLine;
        // The clause text starts where the `//@` ends.
        tok.line = line_;
        tok.col = col_;
        while (pos_ < text_.size() && peek() != '\n') {
          tok.text.push_back(peek());
          advance();
        }
        return tok;
      }
      while (pos_ < text_.size() && peek() != '\n') advance();
      return Token{Tok::kEnd, "", tok.line, tok.col};
    }
    if (c == '/' && peek(1) == '*') {
      if (peek(2) == '@') throw UnsupportedFeature(line_, "/*@ annotation block");
      advance(2);
      while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/')) advance();
      if (pos_ >= text_.size()) throw SyntaxError(tok.line, tok.col, "unterminated comment");
      advance(2);
      return Token{Tok::kEnd, "", tok.line, tok.col};
    }
    if (text_.substr(pos_, 6) == "<MASK>") {
      advance(6);
      tok.kind = Tok::kMask;
      tok.text = "<MASK>";
      return tok;
    }
    if (ident_start(c)) {
      tok.kind = Tok::kIdent;
      while (ident_char(peek())) {
        tok.text.push_back(peek());
        advance();
      }
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = Tok::kIntLit;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        tok.text.push_back(peek());
        advance();
      }
      if (ident_char(peek()) || peek() == '.') {
        throw UnsupportedFeature(tok.line, "numeric literal suffix or floating point");
      }
      return tok;
    }
    if (c == '"') {
      tok.kind = Tok::kStringLit;
      advance();
      while (true) {
        const char d = peek();
        if (d == '\0' || d == '\n') throw SyntaxError(tok.line, tok.col, "unterminated string literal");
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\') {
          const char e = peek(1);
          switch (e) {
            case 'n': tok.text.push_back('\n'); break;
            case 't': tok.text.push_back('\t'); break;
            case '"': tok.text.push_back('"'); break;
            case '\\': tok.text.push_back('\\'); break;
            default: throw SyntaxError(line_, col_, "unknown escape sequence");
          }
          advance(2);
          continue;
        }
        tok.text.push_back(d);
        advance();
      }
      return tok;
    }
    if (c == '\'') throw UnsupportedFeature(line_, "char literal");
    if (c == '\\') {
      advance();
      tok.kind = Tok::kBackslash;
      while (ident_char(peek())) {
        tok.text.push_back(peek());
        advance();
      }
      if (tok.text != "result" && tok.text != "old" && tok.text != "forall" && tok.text != "exists") {
        throw UnsupportedFeature(tok.line, "\\" + tok.text);
      }
      return tok;
    }
    for (std::string_view p : kPuncts) {
      if (text_.substr(pos_, p.size()) == p) {
        advance(p.size());
        tok.kind = Tok::kPunct;
        tok.text = std::string(p);
        return tok;
      }
    }
    if (c == '?' || c == ':' || c == '&' || c == '|' || c == '^' || c == '~') {
      throw UnsupportedFeature(line_, std::string("operator '") + c + "'");
    }
    throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
  int col_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text, int first_line, int first_col) {
  return Lexer(text, first_line, first_col).run();
}

}  // namespace jmlbench::lang
