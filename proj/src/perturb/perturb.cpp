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

#include "jmlbench/perturb/perturb.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/lang/printer.hpp"
#include "jmlbench/lang/scope.hpp"
#include "jmlbench/runtime/interpreter.hpp"
#include "jmlbench/util/rng.hpp"

namespace jmlbench::perturb {

using namespace lang;
using Renames = std::map<std::string, std::string>;

const char* kind_name(PerturbKind k) {
  switch (k) {
    case PerturbKind::kDefUseBreak: return "DefUseBreak";
    case PerturbKind::kIfElseFlip: return "IfElseFlip";
    case PerturbKind::kIndependentSwap: return "IndependentSwap";
    case PerturbKind::kNameRandom: return "NameRandom";
    case PerturbKind::kNameShuffle: return "NameShuffle";
  }
  return "?";
}

std::optional<PerturbKind> parse_kind(const std::string& name) {
  for (auto k : kAllKinds) {
    if (name == kind_name(k)) return k;
  }
  return std::nullopt;
}

namespace {

// Applies fn to every statement of the subtree rooted at s, pre-order.
void each_stmt(const Stmt& s, const std::function<void(const Stmt&)>& fn) {
  Block tmp;
  tmp.stmts.push_back(s);
  visit_stmts(tmp, fn);
}

void each_stmt_mut(Stmt& s, const std::function<void(Stmt&)>& fn) {
  Block tmp;
  tmp.stmts.push_back(std::move(s));
  visit_stmts_mut(tmp, fn);
  s = std::move(tmp.stmts.front());
}

// The expressions a statement evaluates itself (nested statements excluded).
void own_exprs_mut(Stmt& s, const std::function<void(Expr&)>& fn) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarDecl>) {
          if (n.init) fn(*n.init);
        } else if constexpr (std::is_same_v<T, Assign>) {
          if (n.target.index) fn(*n.target.index);
          if (n.value) fn(*n.value);
        } else if constexpr (std::is_same_v<T, If> || std::is_same_v<T, While>) {
          fn(n.cond);
        } else if constexpr (std::is_same_v<T, For>) {
          if (n.cond) fn(*n.cond);
        } else if constexpr (std::is_same_v<T, Return>) {
          if (n.value) fn(*n.value);
        }
      },
      s.node);
}

void collect_expr_uses(const Expr& e, std::set<std::string>& uses) {
  for (const auto& v : free_vars(e)) uses.insert(v);
  visit(e, [&](const Expr& x) {
    if (x.is<ArrayIndex>()) uses.insert(kHeap);
  });
}

bool writes(const Stmt& s, const std::string& name) {
  bool found = false;
  each_stmt(s, [&](const Stmt& x) {
    if (x.is<VarDecl>()) found = found || x.as<VarDecl>().name == name;
    if (x.is<Assign>()) found = found || x.as<Assign>().target.name == name;
  });
  return found;
}

bool reads(const Stmt& s, const std::string& name) {
  return def_use(s).uses.count(name) > 0;
}

bool contains_return(const Stmt& s) {
  bool found = false;
  each_stmt(s, [&](const Stmt& x) { found = found || x.is<Return>(); });
  return found;
}

std::string fresh_name(Rng& rng, std::set<std::string>& taken) {
  for (;;) {
    std::string n = fresh_identifier(rng);
    if (taken.insert(n).second) return n;
  }
}

void rename_everywhere(SourceUnit& u, const Renames& vars, const Renames& methods) {
  const auto fix = [&](Expr& e) {
    e = rename_vars(e, vars);
    rename_calls(e, methods);
  };
  for (auto& m : u.methods) {
    if (auto it = methods.find(m.name); it != methods.end()) m.name = it->second;
    for (auto& p : m.params) {
      if (auto it = vars.find(p.name); it != vars.end()) p.name = it->second;
    }
    visit_stmts_mut(m.body, [&](Stmt& s) {
      if (s.is<VarDecl>()) {
        if (auto it = vars.find(s.as<VarDecl>().name); it != vars.end()) s.as<VarDecl>().name = it->second;
      }
      if (s.is<Assign>()) {
        auto& t = s.as<Assign>().target;
        if (auto it = vars.find(t.name); it != vars.end()) t.name = it->second;
      }
      own_exprs_mut(s, fix);
    });
  }
  for (auto& c : u.specs) {
    fix(c.expr);
    if (auto it = methods.find(c.anchor.method); it != methods.end()) c.anchor.method = it->second;
  }
}

// Loop anchors of the transformed unit still carry the original loop ids;
// map them to their new pre-order ordinals.
std::map<Anchor, Anchor> anchor_map(const SourceUnit& transformed, const Renames& methods) {
  Renames back;
  for (const auto& [from, to] : methods) back[to] = from;
  std::map<Anchor, Anchor> out;
  for (const auto& m : transformed.methods) {
    const std::string old_name = back.count(m.name) ? back[m.name] : m.name;
    out[Anchor{old_name, -1}] = Anchor{m.name, -1};
    int ordinal = 0;
    visit_stmts(m.body, [&](const Stmt& s) {
      if (s.is<While>()) out[Anchor{old_name, s.as<While>().loop_id}] = Anchor{m.name, ordinal++};
      if (s.is<For>()) out[Anchor{old_name, s.as<For>().loop_id}] = Anchor{m.name, ordinal++};
    });
  }
  return out;
}

PerturbedUnit finish(PerturbKind kind, std::uint64_t seed, SourceUnit transformed, Migration migration) {
  PerturbedUnit out;
  out.kind = kind;
  out.seed = seed;
  migration.anchors = anchor_map(transformed, migration.method_renames);
  std::vector<std::size_t> order;
  out.unit = canonicalize(transformed, &order);
  for (std::size_t i = 0; i < order.size(); ++i) out.spec_migration[order[i]] = i;
  // Local renames were recorded against pre-canonical anchors.
  std::map<Anchor, Renames> local;
  for (const auto& [a, r] : migration.local_renames) local[migration.anchors.at(a)] = r;
  migration.local_renames = std::move(local);
  out.migration = std::move(migration);
  return out;
}

std::vector<bool> select_half(Rng& rng, std::size_t n) {
  std::vector<bool> chosen(n);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    chosen[i] = rng.coin();
    any = any || chosen[i];
  }
  if (!any && n > 0) chosen[rng.below(n)] = true;
  return chosen;
}

}  // namespace

DefUseSets def_use(const Stmt& s) {
  DefUseSets du;
  each_stmt(s, [&](const Stmt& x) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, VarDecl>) {
            du.defs.insert(n.name);
            if (n.init) collect_expr_uses(*n.init, du.uses);
          } else if constexpr (std::is_same_v<T, Assign>) {
            du.defs.insert(n.target.name);
            if (n.op != AssignOp::kSet || n.target.index) du.uses.insert(n.target.name);
            if (n.target.index) {
              du.defs.insert(kHeap);
              if (n.op != AssignOp::kSet) du.uses.insert(kHeap);
              collect_expr_uses(*n.target.index, du.uses);
            }
            if (n.value) collect_expr_uses(*n.value, du.uses);
          } else if constexpr (std::is_same_v<T, If> || std::is_same_v<T, While>) {
            collect_expr_uses(n.cond, du.uses);
          } else if constexpr (std::is_same_v<T, For>) {
            if (n.cond) collect_expr_uses(*n.cond, du.uses);
          } else if constexpr (std::is_same_v<T, Return>) {
            if (n.value) collect_expr_uses(*n.value, du.uses);
          }
        },
        x.node);
  });
  return du;
}

namespace {

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (b.count(x)) return false;
  }
  return true;
}

bool independent(const Stmt& a, const Stmt& b) {
  if (contains_call(a) || contains_call(b) || contains_return(a) || contains_return(b)) return false;
  const auto da = def_use(a);
  const auto db = def_use(b);
  return disjoint(da.defs, db.defs) && disjoint(da.uses, db.defs) && disjoint(da.defs, db.uses);
}

struct BlockPair {
  Block* block;
  std::size_t pos;  // statements pos and pos + 1
  StmtPair pair;
};

std::vector<BlockPair> pairs_in(Method& m) {
  std::unordered_map<const Stmt*, int> index;
  int counter = 0;
  visit_stmts(m.body, [&](const Stmt& s) { index[&s] = counter++; });
  std::vector<BlockPair> out;
  std::function<void(Block&)> walk_block;
  std::function<void(Stmt&)> walk_stmt = [&](Stmt& s) {
    if (auto* i = std::get_if<If>(&s.node)) {
      walk_block(i->then_block);
      if (i->else_branch) walk_stmt(**i->else_branch);
    } else if (auto* w = std::get_if<While>(&s.node)) {
      walk_block(w->body);
    } else if (auto* f = std::get_if<For>(&s.node)) {
      walk_block(f->body);
    } else if (auto* b = std::get_if<Block>(&s.node)) {
      walk_block(*b);
    }
  };
  walk_block = [&](Block& b) {
    for (std::size_t i = 0; i + 1 < b.stmts.size(); ++i) {
      if (independent(b.stmts[i], b.stmts[i + 1])) {
        out.push_back({&b, i,
                       StmtPair{m.name, index.at(&b.stmts[i]), index.at(&b.stmts[i + 1]), b.stmts[i].line,
                                b.stmts[i + 1].line}});
      }
    }
    for (auto& s : b.stmts) walk_stmt(s);
  };
  walk_block(m.body);
  return out;
}

bool is_simple(const Stmt& s) { return s.is<VarDecl>() || s.is<Assign>(); }

}  // namespace

std::vector<StmtPair> find_independent_pairs(const SourceUnit& unit) {
  SourceUnit copy = unit;
  std::vector<StmtPair> out;
  for (auto& m : copy.methods) {
    for (const auto& bp : pairs_in(m)) out.push_back(bp.pair);
  }
  return out;
}

lang::Anchor Migration::apply(const Anchor& a) const {
  auto it = anchors.find(a);
  if (it != anchors.end()) return it->second;
  Anchor out = a;
  if (auto m = method_renames.find(a.method); m != method_renames.end()) out.method = m->second;
  return out;
}

SpecClause Migration::apply(const SpecClause& c) const {
  SpecClause out = c;
  out.anchor = apply(c.anchor);
  std::set<std::string> taken;
  for (const auto& [k, v] : var_renames) taken.insert(v);
  int counter = 0;
  const auto binder_fresh = [&] {
    std::string n;
    do {
      n = "q" + std::to_string(counter++);
    } while (taken.count(n));
    taken.insert(n);
    return n;
  };
  out.expr = rename_vars(c.expr, var_renames, binder_fresh);
  rename_calls(out.expr, method_renames);
  if (auto it = local_renames.find(out.anchor); it != local_renames.end()) {
    out.expr = rename_vars(out.expr, it->second, binder_fresh);
  }
  return out;
}

runtime::TestCase Migration::apply(const runtime::TestCase& t) const {
  runtime::TestCase out = t;
  if (auto it = method_renames.find(t.method); it != method_renames.end()) out.method = it->second;
  return out;
}

nlohmann::json PerturbedUnit::rename_map_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : rename_map) j[k] = v;
  return j;
}

std::set<std::string> identifiers(const SourceUnit& unit) {
  std::set<std::string> out{unit.name};
  for (const auto& m : unit.methods) {
    out.insert(m.name);
    for (const auto& p : m.params) out.insert(p.name);
    visit_stmts(m.body, [&](const Stmt& s) {
      if (s.is<VarDecl>()) out.insert(s.as<VarDecl>().name);
    });
  }
  for (const auto& c : unit.specs) {
    visit(c.expr, [&](const Expr& e) {
      if (e.is<Quant>()) out.insert(e.as<Quant>().binder);
      if (e.is<VarRef>()) out.insert(e.as<VarRef>().name);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Def-use break
// ---------------------------------------------------------------------------

namespace {

struct BreakCandidate {
  std::size_t method;
  std::string name;
  TypeTag type;
};

bool written_in_loop(const Method& m, const std::string& name) {
  bool found = false;
  visit_stmts(m.body, [&](const Stmt& s) {
    if ((s.is<While>() || s.is<For>()) && writes(s, name)) found = true;
  });
  return found;
}

// Index after the last top-level statement writing `name` (0 if none).
std::size_t break_point(const Block& body, const std::string& name) {
  std::size_t p = 0;
  for (std::size_t i = 0; i < body.stmts.size(); ++i) {
    if (writes(body.stmts[i], name)) p = i + 1;
  }
  return p;
}

bool used_after(const Block& body, std::size_t p, const std::string& name) {
  for (std::size_t i = p; i < body.stmts.size(); ++i) {
    if (reads(body.stmts[i], name)) return true;
  }
  return false;
}

}  // namespace

PerturbedUnit defuse_break(const SourceUnit& unit, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BreakCandidate> eligible;
  for (std::size_t mi = 0; mi < unit.methods.size(); ++mi) {
    const Method& m = unit.methods[mi];
    std::vector<std::pair<std::string, TypeTag>> names;
    for (const auto& p : m.params) names.emplace_back(p.name, p.type);
    for (const auto& s : m.body.stmts) {
      if (s.is<VarDecl>()) names.emplace_back(s.as<VarDecl>().name, s.as<VarDecl>().type);
    }
    for (const auto& [name, type] : names) {
      if (written_in_loop(m, name)) continue;
      if (!used_after(m.body, break_point(m.body, name), name)) continue;
      eligible.push_back({mi, name, type});
    }
  }
  if (eligible.empty()) throw NoEligibleVariable("no variable has a use after its last definition");
  const auto chosen = select_half(rng, eligible.size());

  SourceUnit out = unit;
  std::set<std::string> taken = identifiers(unit);
  Migration migration;
  PerturbedUnit result;
  std::map<std::string, std::string> rename_map;
  for (std::size_t ci = 0; ci < eligible.size(); ++ci) {
    if (!chosen[ci]) continue;
    const auto& cand = eligible[ci];
    Method& m = out.methods[cand.method];
    const std::size_t p = break_point(m.body, cand.name);
    const std::string fresh = fresh_name(rng, taken);
    const Renames r{{cand.name, fresh}};
    std::set<int> loops;
    for (std::size_t i = p; i < m.body.stmts.size(); ++i) {
      each_stmt_mut(m.body.stmts[i], [&](Stmt& s) {
        own_exprs_mut(s, [&](Expr& e) { e = rename_vars(e, r); });
        if (s.is<While>()) loops.insert(s.as<While>().loop_id);
        if (s.is<For>()) loops.insert(s.as<For>().loop_id);
      });
    }
    Stmt decl{VarDecl{fresh, cand.type, make_var(cand.name)}, 0};
    m.body.stmts.insert(m.body.stmts.begin() + static_cast<std::ptrdiff_t>(p), std::move(decl));
    for (int id : loops) {
      const Anchor a{m.name, id};
      migration.local_renames[a][cand.name] = fresh;
      for (auto& c : out.specs) {
        if (c.anchor == a) c.expr = rename_vars(c.expr, r);
      }
    }
    rename_map[m.name + "." + cand.name] = fresh;
  }
  result = finish(PerturbKind::kDefUseBreak, seed, std::move(out), std::move(migration));
  result.rename_map = std::move(rename_map);
  return result;
}

// ---------------------------------------------------------------------------
// If-else flip
// ---------------------------------------------------------------------------

PerturbedUnit ifelse_flip(const SourceUnit& unit, std::uint64_t seed) {
  Rng rng(seed);
  SourceUnit out = unit;
  std::vector<If*> sites;
  for (auto& m : out.methods) {
    visit_stmts_mut(m.body, [&](Stmt& s) {
      if (s.is<If>() && s.as<If>().else_branch) sites.push_back(&s.as<If>());
    });
  }
  if (sites.empty()) throw NoEligibleBranch("no if statement has an else branch");
  const auto chosen = select_half(rng, sites.size());
  // Innermost first, so that moving an outer branch never invalidates a
  // pointer still to be processed.
  for (std::size_t k = sites.size(); k-- > 0;) {
    if (!chosen[k]) continue;
    If& i = *sites[k];
    Stmt else_stmt = std::move(**i.else_branch);
    Block new_then;
    if (else_stmt.is<Block>()) {
      new_then = std::move(else_stmt.as<Block>());
    } else {
      new_then.stmts.push_back(std::move(else_stmt));
    }
    Stmt new_else{std::move(i.then_block), 0};
    i.cond = make_unary(UnaryOp::kNot, std::move(i.cond));
    i.then_block = std::move(new_then);
    i.else_branch = Box<Stmt>(std::move(new_else));
  }
  return finish(PerturbKind::kIfElseFlip, seed, std::move(out), Migration{});
}

// ---------------------------------------------------------------------------
// Independent swap
// ---------------------------------------------------------------------------

PerturbedUnit independent_swap(const SourceUnit& unit, std::uint64_t seed) {
  Rng rng(seed);
  SourceUnit out = unit;
  std::vector<BlockPair> swappable;
  for (auto& m : out.methods) {
    for (auto& bp : pairs_in(m)) {
      if (is_simple(bp.block->stmts[bp.pos]) && is_simple(bp.block->stmts[bp.pos + 1])) swappable.push_back(bp);
    }
  }
  if (swappable.empty()) throw NoEligiblePair("no adjacent independent declaration/assignment pair");
  std::vector<bool> chosen(swappable.size());
  bool any = false;
  for (std::size_t i = 0; i < swappable.size(); ++i) {
    const bool overlaps = i > 0 && chosen[i - 1] && swappable[i - 1].block == swappable[i].block &&
                          swappable[i - 1].pos + 1 == swappable[i].pos;
    chosen[i] = rng.coin() && !overlaps;
    any = any || chosen[i];
  }
  if (!any) chosen[rng.below(swappable.size())] = true;
  for (std::size_t i = 0; i < swappable.size(); ++i) {
    if (!chosen[i]) continue;
    auto& stmts = swappable[i].block->stmts;
    std::swap(stmts[swappable[i].pos], stmts[swappable[i].pos + 1]);
  }
  return finish(PerturbKind::kIndependentSwap, seed, std::move(out), Migration{});
}

// ---------------------------------------------------------------------------
// Renaming
// ---------------------------------------------------------------------------

namespace {

// Variable name -> declared types across the unit, in first-seen order.
std::vector<std::pair<std::string, std::set<TypeTag>>> variable_types(const SourceUnit& unit) {
  std::map<std::string, std::set<TypeTag>> types;
  std::vector<std::string> order;
  const auto add = [&](const std::string& n, TypeTag t) {
    if (!types.count(n)) order.push_back(n);
    types[n].insert(t);
  };
  for (const auto& m : unit.methods) {
    for (const auto& p : m.params) add(p.name, p.type);
    visit_stmts(m.body, [&](const Stmt& s) {
      if (s.is<VarDecl>()) add(s.as<VarDecl>().name, s.as<VarDecl>().type);
    });
  }
  std::vector<std::pair<std::string, std::set<TypeTag>>> out;
  for (const auto& n : order) out.emplace_back(n, types[n]);
  return out;
}

}  // namespace

PerturbedUnit name_random(const SourceUnit& unit, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> taken = identifiers(unit);
  Renames vars, methods, all;
  for (const auto& [name, types] : variable_types(unit)) {
    vars[name] = fresh_name(rng, taken);
    all[name] = vars[name];
  }
  for (const auto& m : unit.methods) {
    // A method may share its spelling with a variable; one new name serves both.
    auto it = all.find(m.name);
    methods[m.name] = it != all.end() ? it->second : fresh_name(rng, taken);
    all[m.name] = methods[m.name];
  }
  SourceUnit out = unit;
  rename_everywhere(out, vars, methods);
  Migration mig;
  mig.var_renames = vars;
  mig.method_renames = methods;
  auto result = finish(PerturbKind::kNameRandom, seed, std::move(out), std::move(mig));
  result.rename_map = std::move(all);
  return result;
}

PerturbedUnit name_shuffle(const SourceUnit& unit, std::uint64_t seed) {
  Rng rng(seed);
  std::map<TypeTag, std::vector<std::string>> groups;
  Renames perm;
  for (const auto& [name, types] : variable_types(unit)) {
    perm[name] = name;
    if (types.size() == 1) groups[*types.begin()].push_back(name);
  }
  bool moved = false;
  for (auto& [type, names] : groups) {
    if (names.size() < 2) continue;
    std::sort(names.begin(), names.end());
    // Sattolo's algorithm: a uniformly random cyclic permutation, hence a
    // derangement of the group.
    std::vector<std::string> image = names;
    for (std::size_t i = image.size() - 1; i > 0; --i) std::swap(image[i], image[rng.below(i)]);
    for (std::size_t i = 0; i < names.size(); ++i) perm[names[i]] = image[i];
    moved = true;
  }
  if (!moved) throw NoShufflePossible("fewer than two variable names share a type");
  Renames vars;
  for (const auto& [from, to] : perm) {
    if (from != to) vars[from] = to;
  }
  // The permutation maps program names onto program names, so a binder
  // spelled like one is renamed along with it and cannot be captured.
  SourceUnit out = unit;
  rename_everywhere(out, vars, {});
  Migration mig;
  mig.var_renames = vars;
  auto result = finish(PerturbKind::kNameShuffle, seed, std::move(out), std::move(mig));
  result.rename_map = std::move(perm);
  return result;
}

PerturbedUnit apply_perturbation(PerturbKind kind, const SourceUnit& unit, std::uint64_t seed) {
  switch (kind) {
    case PerturbKind::kDefUseBreak: return defuse_break(unit, seed);
    case PerturbKind::kIfElseFlip: return ifelse_flip(unit, seed);
    case PerturbKind::kIndependentSwap: return independent_swap(unit, seed);
    case PerturbKind::kNameRandom: return name_random(unit, seed);
    case PerturbKind::kNameShuffle: return name_shuffle(unit, seed);
  }
  throw Error("unknown perturbation kind");
}

std::vector<std::string> preservation_mismatches(const SourceUnit& original, const PerturbedUnit& variant,
                                                 const std::vector<runtime::TestCase>& tests) {
  std::vector<std::string> out;
  for (const auto& t : tests) {
    const auto a = runtime::execute(original, t).outcome;
    const auto b = runtime::execute(variant.unit, variant.migration.apply(t)).outcome;
    if (!runtime::same_behavior(a, b)) {
      out.push_back(std::string(kind_name(variant.kind)) + ": test " + t.to_json().dump() + " gave " +
                    a.to_json().dump() + " originally and " + b.to_json().dump() + " after perturbation");
    }
  }
  return out;
}

}  // namespace jmlbench::perturb
