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

#include "jmlbench/taskgen/taskgen.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/parser.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/runtime/checker.hpp"
#include "jmlbench/util/rng.hpp"

namespace jmlbench::taskgen {

using namespace lang;

const char* task_type_name(TaskType t) {
  switch (t) {
    case TaskType::kJudgement: return "Judgement";
    case TaskType::kSelection: return "Selection";
    case TaskType::kInfilling: return "Infilling";
    case TaskType::kGeneration: return "Generation";
  }
  return "?";
}

std::optional<TaskType> parse_task_type(const std::string& name) {
  for (auto t : kAllTaskTypes) {
    if (name == task_type_name(t)) return t;
  }
  return std::nullopt;
}

std::vector<std::string> all_categories() {
  std::vector<std::string> out{kOriginal};
  for (auto k : perturb::kAllKinds) out.emplace_back(perturb::kind_name(k));
  return out;
}

const char* mask_class_name(MaskClass c) {
  switch (c) {
    case MaskClass::kArrayIndex: return "array_index";
    case MaskClass::kVariable: return "variable";
    case MaskClass::kMethodName: return "method_name";
    case MaskClass::kQuantifierRange: return "quantifier_range";
  }
  return "?";
}

namespace {

// Pre-order walk that tracks quantifier binders in scope.
void walk_bound(Expr& e, std::set<std::string>& bound, const std::function<void(Expr&, const std::set<std::string>&)>& fn) {
  fn(e, bound);
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayIndex> || std::is_same_v<T, CharAt>) {
          walk_bound(*n.base, bound, fn);
          walk_bound(*n.index, bound, fn);
        } else if constexpr (std::is_same_v<T, Length>) {
          walk_bound(*n.base, bound, fn);
        } else if constexpr (std::is_same_v<T, Unary>) {
          walk_bound(*n.operand, bound, fn);
        } else if constexpr (std::is_same_v<T, Binary>) {
          walk_bound(*n.lhs, bound, fn);
          walk_bound(*n.rhs, bound, fn);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (auto& a : n.args) walk_bound(a, bound, fn);
        } else if constexpr (std::is_same_v<T, Old>) {
          walk_bound(*n.inner, bound, fn);
        } else if constexpr (std::is_same_v<T, Quant>) {
          const bool fresh = bound.insert(n.binder).second;
          walk_bound(*n.range, bound, fn);
          walk_bound(*n.body, bound, fn);
          if (fresh) bound.erase(n.binder);
        }
      },
      e.node);
}

void walk_bound(Expr& e, const std::function<void(Expr&, const std::set<std::string>&)>& fn) {
  std::set<std::string> bound;
  walk_bound(e, bound, fn);
}

const std::vector<BinaryOp> kRelational{BinaryOp::kLt, BinaryOp::kLe, BinaryOp::kGt,
                                        BinaryOp::kGe, BinaryOp::kEq, BinaryOp::kNe};
const std::vector<BinaryOp> kEquality{BinaryOp::kEq, BinaryOp::kNe};
const std::vector<BinaryOp> kArithmetic{BinaryOp::kAdd, BinaryOp::kSub, BinaryOp::kMul};
const std::vector<BinaryOp> kLogical{BinaryOp::kAnd, BinaryOp::kOr};
const std::vector<BinaryOp> kImplication{BinaryOp::kImplies, BinaryOp::kIff};

bool is_int_valued(const Expr& e, const SymbolTable& scope, const Anchor& anchor, const std::set<std::string>& bound) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, ArrayIndex> || std::is_same_v<T, Length> ||
                      std::is_same_v<T, CharAt>) {
          return true;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          if (bound.count(n.name)) return true;
          try {
            return scope.type_at(anchor, n.name) == TypeTag::kInt;
          } catch (const ScopeError&) {
            return false;
          }
        } else if constexpr (std::is_same_v<T, Unary>) {
          return n.op == UnaryOp::kNeg;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return n.op == BinaryOp::kAdd || n.op == BinaryOp::kSub || n.op == BinaryOp::kMul ||
                 n.op == BinaryOp::kDiv || n.op == BinaryOp::kMod;
        } else if constexpr (std::is_same_v<T, Call>) {
          auto it = scope.methods.find(n.method);
          return it != scope.methods.end() && it->second.return_type == TypeTag::kInt;
        } else if constexpr (std::is_same_v<T, Result>) {
          auto it = scope.methods.find(anchor.method);
          return it != scope.methods.end() && it->second.return_type == TypeTag::kInt;
        } else if constexpr (std::is_same_v<T, Old>) {
          return is_int_valued(*n.inner, scope, anchor, bound);
        } else {
          return false;
        }
      },
      e.node);
}

const std::vector<BinaryOp>* op_group(const Binary& b, const SymbolTable& scope, const Anchor& anchor,
                                      const std::set<std::string>& bound) {
  switch (b.op) {
    case BinaryOp::kLt: case BinaryOp::kLe: case BinaryOp::kGt: case BinaryOp::kGe:
      return &kRelational;
    case BinaryOp::kEq: case BinaryOp::kNe:
      return is_int_valued(*b.lhs, scope, anchor, bound) ? &kRelational : &kEquality;
    case BinaryOp::kAdd: case BinaryOp::kSub: case BinaryOp::kMul:
      return &kArithmetic;
    case BinaryOp::kAnd: case BinaryOp::kOr:
      return &kLogical;
    case BinaryOp::kImplies: case BinaryOp::kIff:
      return &kImplication;
    default:
      return nullptr;
  }
}

// Replacement choices for one mutable node; empty when it is not mutable.
std::size_t alternatives(const Expr& e, const std::set<std::string>& bound, const SymbolTable& scope,
                         const Anchor& anchor, std::vector<std::string>* vars) {
  if (e.is<VarRef>()) {
    const auto& name = e.as<VarRef>().name;
    if (bound.count(name)) return 0;
    auto it = scope.visible.find(anchor);
    if (it == scope.visible.end()) return 0;
    TypeTag type = TypeTag::kVoid;
    for (const auto& p : it->second) {
      if (p.name == name) type = p.type;
    }
    std::vector<std::string> out;
    for (const auto& p : it->second) {
      if (p.name != name && p.type == type && !bound.count(p.name)) out.push_back(p.name);
    }
    if (vars) *vars = out;
    return out.size();
  }
  if (e.is<Binary>()) {
    const auto* g = op_group(e.as<Binary>(), scope, anchor, bound);
    return g ? g->size() - 1 : 0;
  }
  if (e.is<Quant>()) return 1;
  return 0;
}

std::string expr_key(const Expr& e) { return print_expr(e); }

std::size_t count_components(const SpecClause& spec, const SymbolTable& scope) {
  std::size_t n = 0;
  Expr probe = spec.expr;
  walk_bound(probe, [&](Expr& e, const std::set<std::string>& bound) {
    if (alternatives(e, bound, scope, spec.anchor, nullptr) > 0) ++n;
  });
  return n;
}

// Ground-truth clauses that have something to mutate; all of them if none do.
std::vector<std::size_t> mutable_clauses(const SourceUnit& unit, const SymbolTable& scope) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < unit.specs.size(); ++i) {
    if (count_components(unit.specs[i], scope) > 0) out.push_back(i);
  }
  if (out.empty()) {
    for (std::size_t i = 0; i < unit.specs.size(); ++i) out.push_back(i);
  }
  return out;
}

}  // namespace

namespace {

std::set<std::string> ground_truth_keys(const SpecClause& spec, const SourceUnit& unit) {
  std::set<std::string> keys;
  for (const auto& c : unit.specs) {
    if (c.anchor == spec.anchor && c.kind == spec.kind) keys.insert(expr_key(c.expr));
  }
  keys.insert(expr_key(spec.expr));
  return keys;
}

// One mutation attempt; empty when the mutant is ill-typed or coincides with
// a ground-truth clause.
std::optional<SpecClause> propose_mutant(const SpecClause& spec, const SymbolTable& scope, std::size_t components,
                                         const std::set<std::string>& ground_truth, Rng& rng) {
  std::vector<bool> chosen(components);
  bool any = false;
  for (std::size_t i = 0; i < components; ++i) {
    chosen[i] = rng.coin();
    any = any || chosen[i];
  }
  if (!any) chosen[rng.below(components)] = true;

  SpecClause mutant = spec;
  std::size_t index = 0;
  walk_bound(mutant.expr, [&](Expr& e, const std::set<std::string>& bound) {
    std::vector<std::string> vars;
    if (alternatives(e, bound, scope, spec.anchor, &vars) == 0) return;
    if (!chosen[index++]) return;
    if (e.is<VarRef>()) {
      e.as<VarRef>().name = vars[rng.below(vars.size())];
    } else if (e.is<Binary>()) {
      auto& b = e.as<Binary>();
      std::vector<BinaryOp> group = *op_group(b, scope, spec.anchor, bound);
      group.erase(std::find(group.begin(), group.end(), b.op));
      b.op = group[rng.below(group.size())];
    } else if (e.is<Quant>()) {
      auto& q = e.as<Quant>();
      q.kind = q.kind == QuantKind::kForall ? QuantKind::kExists : QuantKind::kForall;
    }
  });
  try {
    check_clause(mutant, scope);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (ground_truth.count(expr_key(mutant.expr))) return std::nullopt;
  return mutant;
}

}  // namespace

SpecClause mutate_spec(const SpecClause& spec, const SymbolTable& scope, const SourceUnit& unit,
                       const std::vector<runtime::TestCase>& tests, std::uint64_t seed, int max_retries,
                       BuildStats* stats) {
  if (stats) ++stats->mutation_attempts;
  Rng rng(seed);
  const auto ground_truth = ground_truth_keys(spec, unit);
  const std::size_t components = count_components(spec, scope);
  for (int attempt = 0; components > 0 && attempt < max_retries; ++attempt) {
    auto mutant = propose_mutant(spec, scope, components, ground_truth, rng);
    if (mutant && !runtime::check_clause_correct(unit, *mutant, tests).correct) return *mutant;
  }
  if (stats) {
    ++stats->unrefutable;
    stats->log.push_back("unrefutable mutant for '" + print_clause(spec) + "' at " + spec.anchor.to_string());
  }
  throw UnrefutableMutant("no refuted mutant of '" + print_clause(spec) + "' after " + std::to_string(max_retries) +
                          " attempts");
}

std::vector<SpecClause> candidate_mutants(const SpecClause& spec, const SymbolTable& scope, const SourceUnit& unit,
                                          std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  const auto ground_truth = ground_truth_keys(spec, unit);
  const std::size_t components = count_components(spec, scope);
  std::vector<SpecClause> out;
  std::set<std::string> seen;
  for (std::size_t attempt = 0; components > 0 && out.size() < count && attempt < 4 * count; ++attempt) {
    auto mutant = propose_mutant(spec, scope, components, ground_truth, rng);
    if (mutant && seen.insert(expr_key(mutant->expr)).second) out.push_back(std::move(*mutant));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Masking
// ---------------------------------------------------------------------------

namespace {

std::optional<MaskClass> mask_class_of(const Expr& e) {
  if (e.is<ArrayIndex>() || e.is<CharAt>()) return MaskClass::kArrayIndex;
  if (e.is<VarRef>()) return MaskClass::kVariable;
  if (e.is<Call>()) return MaskClass::kMethodName;
  if (e.is<Quant>()) return MaskClass::kQuantifierRange;
  return std::nullopt;
}

std::string site_text(const Expr& e) {
  if (e.is<ArrayIndex>()) return print_expr(*e.as<ArrayIndex>().index);
  if (e.is<CharAt>()) return print_expr(*e.as<CharAt>().index);
  if (e.is<VarRef>()) return e.as<VarRef>().name;
  if (e.is<Call>()) return e.as<Call>().method;
  return print_expr(*e.as<Quant>().range);
}

}  // namespace

std::vector<MaskSite> mask_sites(const SpecClause& spec) {
  std::vector<MaskSite> out;
  visit(spec.expr, [&](const Expr& e) {
    if (auto c = mask_class_of(e)) out.push_back({*c, site_text(e)});
  });
  return out;
}

MaskedSpec mask_at(const SpecClause& spec, std::size_t site) {
  MaskedSpec out;
  out.masked = spec;
  out.site = site;
  std::size_t index = 0;
  bool done = false;
  visit_mut(out.masked.expr, [&](Expr& e) {
    if (done) return;
    auto c = mask_class_of(e);
    if (!c || index++ != site) return;
    out.cls = *c;
    out.hidden_answer = site_text(e);
    done = true;
    if (e.is<ArrayIndex>()) {
      *e.as<ArrayIndex>().index = Expr{Mask{}};
    } else if (e.is<CharAt>()) {
      *e.as<CharAt>().index = Expr{Mask{}};
    } else if (e.is<VarRef>()) {
      e = Expr{Mask{}};
    } else if (e.is<Call>()) {
      e.as<Call>().method = "<MASK>";
    } else {
      *e.as<Quant>().range = Expr{Mask{}};
    }
  });
  if (!done) throw NoMaskableNode("clause has no mask site " + std::to_string(site));
  return out;
}

MaskedSpec mask_spec(const SpecClause& spec, std::uint64_t seed) {
  const auto sites = mask_sites(spec);
  if (sites.empty()) throw NoMaskableNode("no maskable node in '" + print_clause(spec) + "'");
  Rng rng(seed);
  return mask_at(spec, rng.below(sites.size()));
}

SpecClause fill_mask(const SpecClause& masked, const std::string& answer) {
  SpecClause out = masked;
  bool method_slot = false;
  visit(masked.expr, [&](const Expr& e) {
    if (e.is<Call>() && e.as<Call>().method == "<MASK>") method_slot = true;
  });
  if (method_slot) {
    const Expr name = parse_expression(answer, false);
    if (!name.is<VarRef>()) throw Error("expected a method name, got '" + answer + "'");
    visit_mut(out.expr, [&](Expr& e) {
      if (e.is<Call>() && e.as<Call>().method == "<MASK>") e.as<Call>().method = name.as<VarRef>().name;
    });
    return out;
  }
  const Expr filler = parse_expression(answer, true);
  bool placed = false;
  visit(filler, [&](const Expr& e) {
    if (e.is<Mask>()) throw Error("answer contains a placeholder");
  });
  visit_mut(out.expr, [&](Expr& e) {
    if (e.is<Mask>()) {
      e = filler;
      placed = true;
    }
  });
  if (!placed) throw Error("clause has no placeholder");
  return out;
}

std::vector<SpecClause> trivial_pool(const SourceUnit& unit, const Anchor& anchor, SpecKind kind) {
  std::vector<std::string> texts;
  switch (kind) {
    case SpecKind::kRequires:
      texts = {"requires true"};
      break;
    case SpecKind::kEnsures: {
      texts = {"ensures true"};
      const Method* m = unit.find_method(anchor.method);
      if (m && m->return_type == TypeTag::kInt) {
        texts.push_back("ensures \\result <= Integer.MAX_VALUE");
        texts.push_back("ensures \\result >= Integer.MIN_VALUE");
      }
      break;
    }
    case SpecKind::kLoopInvariant:
      texts = {"loop_invariant true"};
      break;
  }
  std::vector<SpecClause> out;
  for (const auto& t : texts) {
    auto c = parse_clause(t);
    c.anchor = anchor;
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

std::vector<RequiredAnchor> required_anchors(const SourceUnit& unit) {
  std::vector<RequiredAnchor> out;
  for (const auto& m : unit.methods) {
    out.push_back({Anchor{m.name, -1}, SpecKind::kRequires});
    out.push_back({Anchor{m.name, -1}, SpecKind::kEnsures});
    for (int i = 0; i < count_loops(m); ++i) out.push_back({Anchor{m.name, i}, SpecKind::kLoopInvariant});
  }
  return out;
}

JudgementTask build_judgement(const SourceUnit& unit, const std::vector<runtime::TestCase>& tests,
                              std::uint64_t seed, BuildStats* stats) {
  if (unit.specs.empty()) throw Error("judgement task needs ground truth");
  Rng rng(seed);
  const auto table = resolve_scopes(unit);
  JudgementTask t;
  t.unit = strip_specs(unit);
  t.truth = rng.coin();
  const auto candidates = t.truth ? std::vector<std::size_t>{} : mutable_clauses(unit, table);
  const auto& source =
      t.truth ? unit.specs[rng.below(unit.specs.size())] : unit.specs[candidates[rng.below(candidates.size())]];
  t.candidate = source;
  const std::uint64_t mutation_seed = rng.next();
  if (!t.truth) {
    try {
      t.candidate = mutate_spec(source, table, unit, tests, mutation_seed, kMaxRetries, stats);
    } catch (const UnrefutableMutant& e) {
      t.truth = true;
      if (stats) stats->log.push_back(std::string("judgement falls back to a correct candidate: ") + e.what());
    }
  }
  return t;
}

SelectionTask build_selection(const SourceUnit& unit, const std::vector<runtime::TestCase>& tests,
                              std::uint64_t seed, BuildStats* stats) {
  if (unit.specs.empty()) throw Error("selection task needs ground truth");
  Rng rng(seed);
  const auto table = resolve_scopes(unit);
  const auto candidates = mutable_clauses(unit, table);
  const auto& source = unit.specs[candidates[rng.below(candidates.size())]];

  std::vector<SpecClause> pool;
  for (auto& c : trivial_pool(unit, source.anchor, source.kind)) {
    if (print_clause(c) != print_clause(source)) pool.push_back(std::move(c));
  }
  std::vector<SpecClause> options{source};
  std::vector<std::string> origins{"ground_truth"};
  std::set<std::string> seen{print_clause(source)};
  bool trivial_used = false;
  if (!pool.empty() && rng.coin()) {
    options.push_back(pool[rng.below(pool.size())]);
    origins.push_back("trivial");
    seen.insert(print_clause(options.back()));
    trivial_used = true;
  }
  int failures = 0;
  while (options.size() < 4) {
    if (failures > kMaxRetries) {
      throw UnrefutableMutant("cannot find three distinct refuted options for '" + print_clause(source) + "'");
    }
    try {
      auto m = mutate_spec(source, table, unit, tests, rng.next(), kMaxRetries, stats);
      if (!seen.insert(print_clause(m)).second) {
        ++failures;
        continue;
      }
      options.push_back(std::move(m));
      origins.push_back("mutant");
    } catch (const UnrefutableMutant&) {
      ++failures;
      if (!trivial_used && !pool.empty()) {
        options.push_back(pool[rng.below(pool.size())]);
        origins.push_back("trivial");
        trivial_used = true;
      }
    }
  }
  std::vector<std::size_t> order{0, 1, 2, 3};
  rng.shuffle(order);
  SelectionTask t;
  t.unit = strip_specs(unit);
  for (std::size_t i = 0; i < 4; ++i) {
    t.options.push_back(options[order[i]]);
    t.origins.push_back(origins[order[i]]);
    if (order[i] == 0) t.answer = static_cast<char>('A' + i);
  }
  return t;
}

InfillingTask build_infilling(const SourceUnit& unit, std::uint64_t seed) {
  std::vector<std::size_t> maskable;
  for (std::size_t i = 0; i < unit.specs.size(); ++i) {
    if (!mask_sites(unit.specs[i]).empty()) maskable.push_back(i);
  }
  if (maskable.empty()) throw NoMaskableNode("no ground-truth clause has a maskable node");
  Rng rng(seed);
  InfillingTask t;
  t.clause = maskable[rng.below(maskable.size())];
  t.source = unit.specs[t.clause];
  t.mask = mask_spec(t.source, rng.next());
  t.unit = unit;
  t.unit.specs[t.clause] = t.mask.masked;
  return t;
}

GenerationTask build_generation(const SourceUnit& unit) {
  if (unit.specs.empty()) throw Error("generation task needs ground truth");
  GenerationTask t;
  t.unit = strip_specs(unit);
  t.required = required_anchors(unit);
  t.ground_truth = unit.specs;
  return t;
}

JudgementTask migrate(const JudgementTask& t, const perturb::PerturbedUnit& v) {
  JudgementTask out;
  out.unit = strip_specs(v.unit);
  out.candidate = v.migration.apply(t.candidate);
  out.truth = t.truth;
  return out;
}

SelectionTask migrate(const SelectionTask& t, const perturb::PerturbedUnit& v) {
  SelectionTask out = t;
  out.unit = strip_specs(v.unit);
  for (auto& o : out.options) o = v.migration.apply(o);
  return out;
}

InfillingTask migrate(const InfillingTask& t, const perturb::PerturbedUnit& v) {
  InfillingTask out;
  out.clause = v.spec_migration.at(t.clause);
  out.source = v.unit.specs[out.clause];
  out.mask = mask_at(out.source, t.mask.site);
  out.unit = v.unit;
  out.unit.specs[out.clause] = out.mask.masked;
  return out;
}

GenerationTask migrate(const GenerationTask&, const perturb::PerturbedUnit& v) { return build_generation(v.unit); }

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::json TaskInstance::to_json() const {
  return {{"task_id", task_id}, {"type", task_type_name(type)}, {"category", category},
          {"program", program}, {"seed", seed},                 {"payload", payload}};
}

nlohmann::json TaskInstance::key_json() const { return {{"task_id", task_id}, {"answer_key", answer_key}}; }

TaskInstance TaskInstance::from_json(const nlohmann::json& j) {
  TaskInstance t;
  t.task_id = j.at("task_id").get<std::string>();
  const auto type = parse_task_type(j.at("type").get<std::string>());
  if (!type) throw Error("unknown task type " + j.at("type").dump());
  t.type = *type;
  t.category = j.at("category").get<std::string>();
  t.program = j.at("program").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.payload = j.at("payload");
  if (j.contains("answer_key")) t.answer_key = j.at("answer_key");
  return t;
}

std::string task_id(const std::string& program, const std::string& category, TaskType type) {
  return program + "/" + category + "/" + task_type_name(type);
}

nlohmann::json anchor_json(const Anchor& a) { return {{"method", a.method}, {"loop", a.loop}}; }

Anchor anchor_from_json(const nlohmann::json& j) {
  return Anchor{j.at("method").get<std::string>(), j.at("loop").get<int>()};
}

SpecKind parse_spec_kind(const std::string& keyword) {
  for (auto k : {SpecKind::kRequires, SpecKind::kEnsures, SpecKind::kLoopInvariant}) {
    if (keyword == spec_keyword(k)) return k;
  }
  throw Error("unknown clause keyword '" + keyword + "'");
}

std::string describe_anchor(const SourceUnit& unit, const Anchor& anchor) {
  if (!anchor.is_loop()) return "method `" + anchor.method + "`";
  const SourceUnit printed = parse_unit(print_unit(unit));
  const Method* m = printed.find_method(anchor.method);
  const Stmt* loop = m ? find_loop(*m, anchor.loop) : nullptr;
  if (!loop) throw AnchorMismatch("no loop " + anchor.to_string());
  return "the loop on line " + std::to_string(loop->line) + " of method `" + anchor.method + "`";
}

namespace {

TaskInstance make_instance(TaskType type, const std::string& program, const std::string& category,
                           std::uint64_t seed) {
  TaskInstance t;
  t.task_id = task_id(program, category, type);
  t.type = type;
  t.category = category;
  t.program = program;
  t.seed = seed;
  return t;
}

nlohmann::json clause_json(const SpecClause& c) {
  return {{"clause", print_clause(c)}, {"anchor", anchor_json(c.anchor)}, {"kind", spec_keyword(c.kind)}};
}

}  // namespace

TaskInstance to_instance(const JudgementTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed) {
  auto out = make_instance(TaskType::kJudgement, program, category, seed);
  SourceUnit shown = t.unit;
  shown.specs = {t.candidate};
  out.payload = {{"program", print_unit(shown)},
                 {"candidate", clause_json(t.candidate)},
                 {"location", describe_anchor(shown, t.candidate.anchor)}};
  out.answer_key = {{"truth", t.truth}};
  return out;
}

TaskInstance to_instance(const SelectionTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed) {
  auto out = make_instance(TaskType::kSelection, program, category, seed);
  nlohmann::json options = nlohmann::json::array();
  for (std::size_t i = 0; i < t.options.size(); ++i) {
    options.push_back({{"label", std::string(1, static_cast<char>('A' + i))}, {"clause", print_clause(t.options[i])}});
  }
  const auto& anchor = t.options.front().anchor;
  out.payload = {{"program", print_unit(t.unit)},
                 {"options", options},
                 {"anchor", anchor_json(anchor)},
                 {"kind", spec_keyword(t.options.front().kind)},
                 {"location", describe_anchor(t.unit, anchor)}};
  out.answer_key = {{"answer", std::string(1, t.answer)}, {"origins", t.origins}};
  return out;
}

TaskInstance to_instance(const InfillingTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed) {
  auto out = make_instance(TaskType::kInfilling, program, category, seed);
  out.payload = {{"program", print_unit(t.unit)},
                 {"masked", clause_json(t.mask.masked)},
                 {"mask_class", mask_class_name(t.mask.cls)}};
  out.answer_key = {{"hidden_answer", t.mask.hidden_answer}, {"clause", print_clause(t.source)}};
  return out;
}

TaskInstance to_instance(const GenerationTask& t, const std::string& program, const std::string& category,
                         std::uint64_t seed) {
  auto out = make_instance(TaskType::kGeneration, program, category, seed);
  nlohmann::json required = nlohmann::json::array();
  for (const auto& r : t.required) {
    required.push_back(
        {{"anchor", anchor_json(r.anchor)}, {"kind", spec_keyword(r.kind)}, {"location", describe_anchor(t.unit, r.anchor)}});
  }
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& c : t.ground_truth) truth.push_back(clause_json(c));
  out.payload = {{"program", print_unit(t.unit)}, {"required", required}};
  out.answer_key = {{"ground_truth", truth}};
  return out;
}

// ---------------------------------------------------------------------------
// Per-program generation
// ---------------------------------------------------------------------------

std::uint64_t perturbation_seed(std::uint64_t master, const std::string& program, perturb::PerturbKind kind) {
  return derive_seed(master, program, perturb::kind_name(kind));
}

std::uint64_t task_seed(std::uint64_t master, const std::string& program, TaskType type) {
  return derive_seed(master, program, std::string("task:") + task_type_name(type));
}

Subject make_subject(const std::string& program, const SourceUnit& unit, const std::vector<runtime::TestCase>& tests,
                     const std::string& category, std::uint64_t master_seed) {
  Subject s{program, category, unit, tests, std::nullopt};
  if (category == kOriginal) return s;
  const auto kind = perturb::parse_kind(category);
  if (!kind) throw Error("unknown category '" + category + "'");
  s.variant = perturb::apply_perturbation(*kind, unit, perturbation_seed(master_seed, program, *kind));
  s.unit = s.variant->unit;
  s.tests.clear();
  for (const auto& t : tests) s.tests.push_back(s.variant->migration.apply(t));
  return s;
}

GeneratedTasks generate_program_tasks(const std::string& program, const SourceUnit& unit,
                                      const std::vector<runtime::TestCase>& tests,
                                      const std::vector<std::string>& categories, const std::vector<TaskType>& types,
                                      std::uint64_t master_seed) {
  GeneratedTasks out;
  std::map<std::string, Subject> subjects;
  for (const auto& category : categories) {
    try {
      subjects.emplace(category, make_subject(program, unit, tests, category, master_seed));
    } catch (const perturb::NoEligibleVariable& e) {
      out.stats.log.push_back(program + "/" + category + ": skipped, " + e.what());
    } catch (const perturb::NoEligibleBranch& e) {
      out.stats.log.push_back(program + "/" + category + ": skipped, " + e.what());
    } catch (const perturb::NoEligiblePair& e) {
      out.stats.log.push_back(program + "/" + category + ": skipped, " + e.what());
    } catch (const perturb::NoShufflePossible& e) {
      out.stats.log.push_back(program + "/" + category + ": skipped, " + e.what());
    }
  }
  for (const auto type : types) {
    const std::uint64_t seed = task_seed(master_seed, program, type);
    const auto emit = [&](const auto& task) {
      for (const auto& category : categories) {
        auto it = subjects.find(category);
        if (it == subjects.end()) continue;
        if (it->second.variant) {
          out.tasks.push_back(to_instance(migrate(task, *it->second.variant), program, category, seed));
        } else {
          out.tasks.push_back(to_instance(task, program, category, seed));
        }
      }
    };
    try {
      switch (type) {
        case TaskType::kJudgement: emit(build_judgement(unit, tests, seed, &out.stats)); break;
        case TaskType::kSelection: emit(build_selection(unit, tests, seed, &out.stats)); break;
        case TaskType::kInfilling: emit(build_infilling(unit, seed)); break;
        case TaskType::kGeneration: emit(build_generation(unit)); break;
      }
    } catch (const UnrefutableMutant& e) {
      out.stats.log.push_back(program + "/" + task_type_name(type) + ": skipped, " + e.what());
    } catch (const NoMaskableNode& e) {
      out.stats.log.push_back(program + "/" + task_type_name(type) + ": skipped, " + e.what());
    }
  }
  return out;
}

}  // namespace jmlbench::taskgen
