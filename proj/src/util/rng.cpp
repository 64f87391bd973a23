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

#include "jmlbench/util/rng.hpp"

namespace jmlbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view text) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

}  // namespace

std::uint64_t stable_hash(std::string_view text) { return splitmix64(fnv1a(kFnvOffset, text)); }

std::uint64_t derive_seed(std::uint64_t master, std::string_view program, std::string_view kind) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a(h, std::to_string(master));
  h = fnv1a(h, "\x1f");
  h = fnv1a(h, program);
  h = fnv1a(h, "\x1f");
  h = fnv1a(h, kind);
  return splitmix64(h);
}

std::string fresh_identifier(Rng& rng) {
  static constexpr std::string_view kLetters =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
  static constexpr std::string_view kAlnum =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  // Five-letter reserved words of the subject language.
  static constexpr std::string_view kReserved[] = {"break", "catch", "class", "const", "false",
                                                   "final", "float", "short", "super", "throw",
                                                   "while", "yield"};
  for (;;) {
    std::string out;
    out += kLetters[rng.below(kLetters.size())];
    for (int i = 0; i < 4; ++i) out += kAlnum[rng.below(kAlnum.size())];
    bool reserved = false;
    for (auto r : kReserved) reserved = reserved || out == r;
    if (!reserved) return out;
  }
}

}  // namespace jmlbench
