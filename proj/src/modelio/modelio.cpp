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

#include "jmlbench/modelio/modelio.hpp"

#include <cctype>
#include <regex>
#include <sstream>

#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "shots_data.hpp"

namespace jmlbench::modelio {

using taskgen::TaskType;

namespace {

constexpr const char* kSystem =
    "You are an expert in the Java Modeling Language (JML). You read Java programs, reason about every "
    "execution they admit, and check or write JML specifications that describe them.";

std::string fenced(const std::string& lang, const std::string& text) {
  std::string body = text;
  if (!body.empty() && body.back() != '\n') body += '\n';
  return "```" + lang + "\n" + body + "```\n";
}

}  // namespace

std::string render_request(TaskType type, const nlohmann::json& payload) {
  std::ostringstream out;
  const auto program = payload.at("program").get<std::string>();
  switch (type) {
    case TaskType::kJudgement:
      out << "The Java program below carries one JML specification, attached to "
          << payload.at("location").get<std::string>() << ".\n\n"
          << fenced("java", program) << "\nIs the specification `" << payload.at("candidate").at("clause").get<std::string>()
          << "` correct, that is, does it hold on every execution of the program? Answer with one word: true or false.\n";
      break;
    case TaskType::kSelection:
      out << "Here is a Java program.\n\n"
          << fenced("java", program) << "\nWhich of the following JML specifications for "
          << payload.at("location").get<std::string>()
          << " is the most appropriate, that is, correct and as strong as possible?\n\n";
      for (const auto& o : payload.at("options")) {
        out << o.at("label").get<std::string>() << ". " << o.at("clause").get<std::string>() << "\n";
      }
      out << "\nAnswer with the letter of one option.\n";
      break;
    case TaskType::kInfilling:
      out << "In the Java program below, one JML specification contains the placeholder <MASK>.\n\n"
          << fenced("java", program) << "\nReplace <MASK> in `" << payload.at("masked").at("clause").get<std::string>()
          << "` so that the specification is correct for the program. Reply with the replacement only, inside a "
             "```jml block.\n";
      break;
    case TaskType::kGeneration:
      out << "Write JML specifications for the Java program below. Provide:\n";
      for (const auto& r : payload.at("required")) {
        out << "- a `" << r.at("kind").get<std::string>() << "` clause for " << r.at("location").get<std::string>()
            << "\n";
      }
      out << "\n"
          << fenced("java", program)
          << "\nReply with the whole program, with each clause on its own `//@` line directly above the method or "
             "loop it describes.\n";
      break;
  }
  return out.str();
}

std::vector<Shot> shots_for(TaskType type) {
  static const nlohmann::json all = nlohmann::json::parse(kShotsJson);
  std::vector<Shot> out;
  for (const auto& s : all.at(taskgen::task_type_name(type))) {
    out.push_back({render_request(type, s.at("payload")), s.at("reply").get<std::string>()});
  }
  return out;
}

PromptBundle build_prompt(const taskgen::TaskInstance& task, int k) {
  if (k < 0 || k > 2) throw Error("shot count must be 0, 1 or 2, got " + std::to_string(k));
  PromptBundle p;
  p.task_id = task.task_id;
  p.type = task.type;
  p.system = kSystem;
  p.k = k;
  auto shots = shots_for(task.type);
  shots.resize(static_cast<std::size_t>(k));
  p.shots = std::move(shots);
  p.task_text = render_request(task.type, task.payload);
  return p;
}

nlohmann::json PromptBundle::messages() const {
  nlohmann::json m = nlohmann::json::array();
  m.push_back({{"role", "system"}, {"content", system}});
  for (const auto& s : shots) {
    m.push_back({{"role", "user"}, {"content", s.request}});
    m.push_back({{"role", "assistant"}, {"content", s.reply}});
  }
  m.push_back({{"role", "user"}, {"content", task_text}});
  return m;
}

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

nlohmann::json ParsedAnswer::to_json() const {
  static const char* kNames[] = {"Judgement", "Selection", "Infilling", "Generation", "Unparseable"};
  nlohmann::json j = {{"kind", kNames[static_cast<int>(kind)]}};
  switch (kind) {
    case Kind::kJudgement: j["verdict"] = verdict; break;
    case Kind::kSelection: j["label"] = std::string(1, label); break;
    case Kind::kInfilling: j["expression"] = expression; break;
    case Kind::kGeneration: {
      nlohmann::json cs = nlohmann::json::array();
      for (const auto& c : clauses) cs.push_back({{"anchor", c.anchor.to_string()}, {"clause", print_clause(c.clause)}});
      j["clauses"] = cs;
      j["dropped"] = dropped;
      break;
    }
    case Kind::kUnparseable: break;
  }
  return j;
}

namespace {

ParsedAnswer unparseable(const std::string& raw) {
  ParsedAnswer a;
  a.raw = raw;
  return a;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Contents of every ``` block, in order.
std::vector<std::string> fenced_blocks(const std::string& raw) {
  std::vector<std::string> out;
  std::string current;
  bool inside = false;
  for (const auto& line : lines_of(raw)) {
    if (trim(line).rfind("```", 0) == 0) {
      if (inside) out.push_back(current);
      current.clear();
      inside = !inside;
      continue;
    }
    if (inside) current += line + "\n";
  }
  return out;
}

}  // namespace

ParsedAnswer parse_judgement(const std::string& raw) {
  static const std::regex word("[A-Za-z]+");
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), word); it != std::sregex_iterator(); ++it) {
    std::string w = it->str();
    for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::optional<bool> v;
    if (w == "true" || w == "correct" || w == "yes") v = true;
    if (w == "false" || w == "incorrect" || w == "no") v = false;
    if (v) {
      ParsedAnswer a;
      a.kind = ParsedAnswer::Kind::kJudgement;
      a.verdict = *v;
      a.raw = raw;
      return a;
    }
  }
  return unparseable(raw);
}

ParsedAnswer parse_selection(const std::string& raw) {
  static const std::regex token("[A-Za-z0-9_]+");
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), token); it != std::sregex_iterator(); ++it) {
    const std::string t = it->str();
    if (t.size() == 1 && t[0] >= 'A' && t[0] <= 'D') {
      ParsedAnswer a;
      a.kind = ParsedAnswer::Kind::kSelection;
      a.label = t[0];
      a.raw = raw;
      return a;
    }
  }
  return unparseable(raw);
}

ParsedAnswer parse_infilling(const std::string& raw) {
  static const std::regex spec_operator(R"(==|!=|<=|>=|<|>|&&|\|\||\\forall|\\exists|\\result|[-+*/%])");
  std::string text;
  const auto blocks = fenced_blocks(raw);
  for (const auto& b : blocks) {
    if (!trim(b).empty()) {
      text = trim(b);
      break;
    }
  }
  if (text.empty()) {
    for (const auto& line : lines_of(raw)) {
      if (std::regex_search(line, spec_operator)) {
        text = trim(line);
        break;
      }
    }
  }
  if (text.empty()) {
    for (const auto& line : lines_of(raw)) {
      if (!trim(line).empty()) {
        text = trim(line);
        break;
      }
    }
  }
  while (!text.empty() && (text.back() == ';' || text.back() == '`')) text.pop_back();
  while (!text.empty() && text.front() == '`') text.erase(text.begin());
  text = trim(text);
  if (text.empty()) return unparseable(raw);
  ParsedAnswer a;
  a.kind = ParsedAnswer::Kind::kInfilling;
  a.expression = text;
  a.raw = raw;
  return a;
}

ParsedAnswer parse_generation(const std::string& raw) {
  static const std::regex loop_header(R"(^\s*(while|for)\s*\()");
  static const std::regex method_header(
      R"(^\s*(?:(?:public|private|protected|static|final)\s+)*(?:int\s*\[\s*\]|int|boolean|void|String)\s+([A-Za-z_]\w*)\s*\()");
  const auto blocks = fenced_blocks(raw);
  std::string text;
  for (const auto& b : blocks) text += b;
  if (blocks.empty()) text = raw;

  ParsedAnswer a;
  a.raw = raw;
  std::vector<std::string> pending;
  std::string method;
  int loops = 0;
  bool saw_clause_line = false;
  const auto attach = [&](const lang::Anchor& anchor) {
    for (const auto& p : pending) {
      try {
        auto c = lang::parse_clause(p);
        c.anchor = anchor;
        a.clauses.push_back({anchor, std::move(c)});
      } catch (const Error&) {
        ++a.dropped;
      }
    }
    pending.clear();
  };
  for (const auto& line : lines_of(text)) {
    const std::string t = trim(line);
    if (t.rfind("//@", 0) == 0) {
      saw_clause_line = true;
      pending.push_back(trim(t.substr(3)));
      continue;
    }
    std::smatch m;
    if (std::regex_search(line, loop_header)) {
      attach(lang::Anchor{method, loops++});
    } else if (std::regex_search(line, m, method_header)) {
      method = m[1].str();
      loops = 0;
      attach(lang::Anchor{method, -1});
    }
  }
  a.dropped += static_cast<int>(pending.size());
  if (!saw_clause_line) return unparseable(raw);
  a.kind = ParsedAnswer::Kind::kGeneration;
  return a;
}

ParsedAnswer parse_answer(TaskType type, const std::string& raw) {
  switch (type) {
    case TaskType::kJudgement: return parse_judgement(raw);
    case TaskType::kSelection: return parse_selection(raw);
    case TaskType::kInfilling: return parse_infilling(raw);
    case TaskType::kGeneration: return parse_generation(raw);
  }
  return unparseable(raw);
}

}  // namespace jmlbench::modelio
