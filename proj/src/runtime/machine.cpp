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

#include "machine.hpp"

#include <algorithm>
#include <limits>

#include "jmlbench/lang/ast_util.hpp"
#include "jmlbench/util/error.hpp"

namespace jmlbench::runtime::detail {

using namespace lang;

namespace {

constexpr int kMaxDepth = 400;

std::int32_t wrap(std::int64_t x) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(x)));
}

Value default_value(TypeTag t) {
  switch (t) {
    case TypeTag::kBool: return Value::of_bool(false);
    case TypeTag::kIntArray: return Value::of_array({});
    case TypeTag::kString: return Value::of_string("");
    default: return Value::of_int(0);
  }
}

Bindings deep(const Bindings& b) {
  Bindings out;
  for (const auto& [k, v] : b) out.emplace(k, v.deep_copy());
  return out;
}

}  // namespace

Value* Frame::find(const std::string& name) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
    if (it->first == name) return &it->second;
  }
  return nullptr;
}

Bindings Frame::snapshot() const {
  Bindings out;
  for (const auto& [k, v] : vars) out.insert_or_assign(k, v.deep_copy());
  return out;
}

Monitor::Monitor(const SourceUnit& unit) {
  for (std::size_t i = 0; i < unit.specs.size(); ++i) {
    const auto& c = unit.specs[i];
    switch (c.kind) {
      case SpecKind::kRequires: requires_of[c.anchor.method].push_back(i); break;
      case SpecKind::kEnsures: ensures_of[c.anchor.method].push_back(i); break;
      case SpecKind::kLoopInvariant: invariants_of[c.anchor].push_back(i); break;
    }
    SpecVerdict v;
    v.spec = i;
    v.clause = c;
    verdicts.push_back(std::move(v));
  }
}

bool Monitor::all_refuted() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const SpecVerdict& v) { return !v.correct; });
}

Machine::Machine(const SourceUnit& unit, std::int64_t step_limit, CoverageReport* coverage,
                 Monitor* monitor)
    : unit_(unit), step_limit_(step_limit), coverage_(coverage), monitor_(monitor) {}

void Machine::fault(FaultKind kind, const std::string& message) {
  throw FaultSignal{Fault{kind, line_, message}};
}

void Machine::step() {
  if (++steps_ > step_limit_) {
    fault(FaultKind::kStepLimitExceeded, "step limit of " + std::to_string(step_limit_) + " exceeded");
  }
}

void Machine::hit(int line) {
  line_ = line;
  if (coverage_ && spec_depth_ == 0) ++coverage_->line_hits[line];
}

void Machine::branch(int line, bool taken) {
  if (!coverage_ || spec_depth_ > 0) return;
  auto& b = coverage_->branch_outcomes[line];
  (taken ? b.true_taken : b.false_taken) += 1;
}

ExecOutcome Machine::run(const TestCase& test) {
  ExecOutcome out;
  const Method* m = unit_.find_method(test.method);
  if (!m) throw TypeError("unknown method '" + test.method + "'");
  std::vector<Value> args;
  for (const auto& a : test.args) args.push_back(a.deep_copy());
  out.final_args = args;  // shares array storage with the callee's parameters
  try {
    out.value = invoke(*m, std::move(args));
  } catch (const FaultSignal& s) {
    out.fault = s.fault;
    out.value.reset();
  }
  out.steps = steps_;
  return out;
}

std::optional<Value> Machine::invoke(const Method& m, std::vector<Value> args) {
  if (++depth_ > kMaxDepth) fault(FaultKind::kStackOverflow, "call depth exceeds " + std::to_string(kMaxDepth));
  step();
  Frame f;
  f.method = &m;
  for (std::size_t i = 0; i < m.params.size(); ++i) f.vars.emplace_back(m.params[i].name, std::move(args[i]));
  const int call_line = line_;
  line_ = m.line;
  if (monitor_ && spec_depth_ == 0) on_entry(f);
  const bool returned = exec_block(m.body, f);
  if (!returned && m.return_type != TypeTag::kVoid) {
    fault(FaultKind::kMissingReturn, "method '" + m.name + "' ended without returning a value");
  }
  if (monitor_ && spec_depth_ == 0) on_return(f);
  line_ = call_line;
  --depth_;
  return f.ret;
}

bool Machine::exec_block(const Block& b, Frame& f) {
  const std::size_t mark = f.vars.size();
  bool returned = false;
  for (const auto& s : b.stmts) {
    if (exec(s, f)) {
      returned = true;
      break;
    }
  }
  f.vars.resize(mark);
  return returned;
}

bool Machine::exec(const Stmt& s, Frame& f) {
  hit(s.line);
  step();
  const Ctx ctx{&f};
  if (const auto* d = std::get_if<VarDecl>(&s.node)) {
    Value v = d->init ? eval(*d->init, ctx) : default_value(d->type);
    f.vars.emplace_back(d->name, std::move(v));
    return false;
  }
  if (const auto* a = std::get_if<Assign>(&s.node)) {
    exec_assign(*a, f);
    return false;
  }
  if (const auto* i = std::get_if<If>(&s.node)) {
    const bool c = eval(i->cond, ctx).as_bool();
    branch(s.line, c);
    if (c) return exec_block(i->then_block, f);
    if (i->else_branch) return exec(**i->else_branch, f);
    return false;
  }
  if (const auto* w = std::get_if<While>(&s.node)) return exec_while(*w, s.line, f);
  if (const auto* fr = std::get_if<For>(&s.node)) return exec_for(*fr, s.line, f);
  if (const auto* r = std::get_if<Return>(&s.node)) {
    if (r->value) f.ret = eval(*r->value, ctx);
    return true;
  }
  return exec_block(s.as<Block>(), f);
}

bool Machine::exec_while(const While& w, int line, Frame& f) {
  check_invariants(*f.method, w.loop_id, f, "before the first iteration");
  for (std::int64_t iter = 1;; ++iter) {
    line_ = line;
    step();
    const bool c = eval(w.cond, Ctx{&f}).as_bool();
    branch(line, c);
    if (!c) return false;
    if (exec_block(w.body, f)) return true;
    if (monitor_) check_invariants(*f.method, w.loop_id, f, "after iteration " + std::to_string(iter));
  }
}

bool Machine::exec_for(const For& w, int line, Frame& f) {
  const std::size_t mark = f.vars.size();
  if (w.init) exec(**w.init, f);
  check_invariants(*f.method, w.loop_id, f, "before the first iteration");
  bool returned = false;
  for (std::int64_t iter = 1;; ++iter) {
    line_ = line;
    step();
    if (w.cond) {
      const bool c = eval(*w.cond, Ctx{&f}).as_bool();
      branch(line, c);
      if (!c) break;
    }
    if (exec_block(w.body, f)) {
      returned = true;
      break;
    }
    if (w.update) exec(**w.update, f);
    if (monitor_) check_invariants(*f.method, w.loop_id, f, "after iteration " + std::to_string(iter));
  }
  f.vars.resize(mark);
  return returned;
}

namespace {

std::int32_t apply_arith(AssignOp op, std::int32_t a, std::int32_t b, bool& div_zero) {
  switch (op) {
    case AssignOp::kAdd: return wrap(std::int64_t{a} + b);
    case AssignOp::kSub: return wrap(std::int64_t{a} - b);
    case AssignOp::kMul: return wrap(std::int64_t{a} * b);
    case AssignOp::kDiv:
      if (b == 0) { div_zero = true; return 0; }
      return wrap(std::int64_t{a} / b);
    case AssignOp::kMod:
      if (b == 0) { div_zero = true; return 0; }
      return static_cast<std::int32_t>(std::int64_t{a} % b);
    case AssignOp::kInc: return wrap(std::int64_t{a} + 1);
    case AssignOp::kDec: return wrap(std::int64_t{a} - 1);
    case AssignOp::kSet: return b;
  }
  return b;
}

}  // namespace

void Machine::exec_assign(const Assign& a, Frame& f) {
  const Ctx ctx{&f};
  Value* slot = f.find(a.target.name);
  if (!slot) throw Error("internal: unbound variable '" + a.target.name + "'");
  if (!a.target.index) {
    if (a.op == AssignOp::kSet) {
      *slot = eval(*a.value, ctx);
      return;
    }
    const std::int32_t cur = slot->as_int();
    const std::int32_t rhs = a.value ? eval(*a.value, ctx).as_int() : 1;
    // The slot pointer may be stale after evaluating calls; look it up again.
    slot = f.find(a.target.name);
    bool dz = false;
    const std::int32_t r = apply_arith(a.op, cur, rhs, dz);
    if (dz) fault(FaultKind::kDivisionByZero, "division by zero");
    *slot = Value::of_int(r);
    return;
  }
  // Array element: array reference, index, then (for compound forms) the
  // current element, then the right-hand side.
  ArrayRef arr = slot->as_array();
  const std::int32_t idx = eval(*a.target.index, ctx).as_int();
  const auto check = [&] {
    if (idx < 0 || static_cast<std::size_t>(idx) >= arr->size()) {
      fault(FaultKind::kIndexOutOfBounds,
            "index " + std::to_string(idx) + " out of bounds for length " + std::to_string(arr->size()));
    }
  };
  if (a.op == AssignOp::kSet) {
    const std::int32_t v = eval(*a.value, ctx).as_int();
    check();
    (*arr)[idx] = v;
    return;
  }
  check();
  const std::int32_t cur = (*arr)[idx];
  const std::int32_t rhs = a.value ? eval(*a.value, ctx).as_int() : 1;
  bool dz = false;
  const std::int32_t r = apply_arith(a.op, cur, rhs, dz);
  if (dz) fault(FaultKind::kDivisionByZero, "division by zero");
  (*arr)[idx] = r;
}

Value Machine::lookup(const std::string& name, const Ctx& ctx) {
  if (ctx.binders) {
    for (auto it = ctx.binders->rbegin(); it != ctx.binders->rend(); ++it) {
      if (it->first == name) return Value::of_int(it->second);
    }
  }
  if (ctx.frame) {
    if (Value* v = ctx.frame->find(name)) return *v;
  } else if (ctx.fixed) {
    auto it = ctx.fixed->find(name);
    if (it != ctx.fixed->end()) return it->second;
  }
  throw Error("internal: unbound variable '" + name + "'");
}

Value Machine::eval(const Expr& e, const Ctx& ctx) {
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          return Value::of_int(n.value);
        } else if constexpr (std::is_same_v<T, BoolLit>) {
          return Value::of_bool(n.value);
        } else if constexpr (std::is_same_v<T, StringLit>) {
          return Value::of_string(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return lookup(n.name, ctx);
        } else if constexpr (std::is_same_v<T, ArrayIndex>) {
          const Value base = eval(*n.base, ctx);
          const std::int32_t idx = eval(*n.index, ctx).as_int();
          const auto& arr = *base.as_array();
          if (idx < 0 || static_cast<std::size_t>(idx) >= arr.size()) {
            fault(FaultKind::kIndexOutOfBounds,
                  "index " + std::to_string(idx) + " out of bounds for length " + std::to_string(arr.size()));
          }
          return Value::of_int(arr[idx]);
        } else if constexpr (std::is_same_v<T, Length>) {
          const Value base = eval(*n.base, ctx);
          const std::size_t len = base.is_array() ? base.as_array()->size() : base.as_string().size();
          return Value::of_int(static_cast<std::int32_t>(len));
        } else if constexpr (std::is_same_v<T, CharAt>) {
          const Value base = eval(*n.base, ctx);
          const std::int32_t idx = eval(*n.index, ctx).as_int();
          const auto& s = base.as_string();
          if (idx < 0 || static_cast<std::size_t>(idx) >= s.size()) {
            fault(FaultKind::kIndexOutOfBounds,
                  "string index " + std::to_string(idx) + " out of bounds for length " + std::to_string(s.size()));
          }
          return Value::of_int(static_cast<unsigned char>(s[idx]));
        } else if constexpr (std::is_same_v<T, Unary>) {
          const Value v = eval(*n.operand, ctx);
          if (n.op == UnaryOp::kNot) return Value::of_bool(!v.as_bool());
          return Value::of_int(wrap(-std::int64_t{v.as_int()}));
        } else if constexpr (std::is_same_v<T, Binary>) {
          return eval_binary(n, ctx);
        } else if constexpr (std::is_same_v<T, Call>) {
          const Method* m = unit_.find_method(n.method);
          if (!m) throw Error("internal: unknown method '" + n.method + "'");
          std::vector<Value> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) {
            Value v = eval(a, ctx);
            // Calls made from a clause must not disturb the checked state.
            args.push_back(spec_depth_ > 0 ? v.deep_copy() : std::move(v));
          }
          auto r = invoke(*m, std::move(args));
          if (!r) throw Error("internal: void method '" + n.method + "' used as a value");
          return *r;
        } else if constexpr (std::is_same_v<T, Result>) {
          if (!ctx.result) throw Error("internal: \\result has no value here");
          return *ctx.result;
        } else if constexpr (std::is_same_v<T, Old>) {
          if (!ctx.old) throw Error("internal: \\old has no pre-state here");
          Ctx inner{nullptr, ctx.old, ctx.result, nullptr, ctx.binders};
          return eval(*n.inner, inner);
        } else if constexpr (std::is_same_v<T, Quant>) {
          return Value::of_bool(eval_quant(n, ctx));
        } else {
          throw Error("cannot evaluate an expression containing <MASK>");
        }
      },
      e.node);
}

Value Machine::eval_binary(const Binary& b, const Ctx& ctx) {
  switch (b.op) {
    case BinaryOp::kAnd:
      return Value::of_bool(eval(*b.lhs, ctx).as_bool() && eval(*b.rhs, ctx).as_bool());
    case BinaryOp::kOr:
      return Value::of_bool(eval(*b.lhs, ctx).as_bool() || eval(*b.rhs, ctx).as_bool());
    case BinaryOp::kImplies:
      return Value::of_bool(!eval(*b.lhs, ctx).as_bool() || eval(*b.rhs, ctx).as_bool());
    case BinaryOp::kIff: {
      const bool l = eval(*b.lhs, ctx).as_bool();
      return Value::of_bool(l == eval(*b.rhs, ctx).as_bool());
    }
    default: break;
  }
  const Value l = eval(*b.lhs, ctx);
  const Value r = eval(*b.rhs, ctx);
  if (b.op == BinaryOp::kEq) return Value::of_bool(l == r);
  if (b.op == BinaryOp::kNe) return Value::of_bool(!(l == r));
  const std::int64_t x = l.as_int();
  const std::int64_t y = r.as_int();
  switch (b.op) {
    case BinaryOp::kAdd: return Value::of_int(wrap(x + y));
    case BinaryOp::kSub: return Value::of_int(wrap(x - y));
    case BinaryOp::kMul: return Value::of_int(wrap(x * y));
    case BinaryOp::kDiv:
      if (y == 0) fault(FaultKind::kDivisionByZero, "division by zero");
      return Value::of_int(wrap(x / y));
    case BinaryOp::kMod:
      if (y == 0) fault(FaultKind::kDivisionByZero, "modulo by zero");
      return Value::of_int(wrap(x % y));
    case BinaryOp::kLt: return Value::of_bool(x < y);
    case BinaryOp::kLe: return Value::of_bool(x <= y);
    case BinaryOp::kGt: return Value::of_bool(x > y);
    case BinaryOp::kGe: return Value::of_bool(x >= y);
    default: break;
  }
  throw Error("internal: unhandled operator");
}

bool Machine::eval_quant(const Quant& q, const Ctx& ctx) {
  const auto bounds = extract_bounds(*q.range, q.binder);
  if (!bounds) throw UnboundedQuantifier("quantifier over '" + q.binder + "' has no finite range");
  std::int64_t lo = std::numeric_limits<std::int64_t>::min();
  std::int64_t hi = std::numeric_limits<std::int64_t>::max();
  for (const auto& t : bounds->lowers) lo = std::max(lo, std::int64_t{eval(*t.expr, ctx).as_int()} + t.offset);
  for (const auto& t : bounds->uppers) hi = std::min(hi, std::int64_t{eval(*t.expr, ctx).as_int()} + t.offset);
  Binders local;
  Binders& binders = ctx.binders ? *ctx.binders : local;
  Ctx inner = ctx;
  inner.binders = &binders;
  binders.emplace_back(q.binder, 0);
  const std::size_t slot = binders.size() - 1;
  bool result = q.kind == QuantKind::kForall;
  for (std::int64_t i = lo; i < hi; ++i) {
    if (++quant_iters_ > kQuantifierBudget) {
      binders.resize(slot);
      fault(FaultKind::kQuantifierBudget,
            "quantifier evaluation exceeds " + std::to_string(kQuantifierBudget) + " iterations");
    }
    binders[slot].second = static_cast<std::int32_t>(i);
    if (!eval(*q.range, inner).as_bool()) continue;
    const bool body = eval(*q.body, inner).as_bool();
    if (q.kind == QuantKind::kForall && !body) {
      result = false;
      break;
    }
    if (q.kind == QuantKind::kExists && body) {
      result = true;
      break;
    }
  }
  binders.resize(slot);
  return result;
}

std::optional<Fault> Machine::eval_clause(const Expr& e, const Ctx& ctx, bool& value) {
  const std::int64_t saved_steps = steps_;
  const int saved_depth = depth_;
  const int saved_line = line_;
  ++spec_depth_;
  quant_iters_ = 0;
  Binders binders;
  Ctx c = ctx;
  c.binders = &binders;
  const auto restore = [&] {
    --spec_depth_;
    steps_ = saved_steps;
    depth_ = saved_depth;
    line_ = saved_line;
  };
  std::optional<Fault> out;
  try {
    steps_ = 0;
    value = eval(e, c).as_bool();
  } catch (const FaultSignal& s) {
    out = s.fault;
    value = false;
  } catch (...) {
    restore();
    throw;
  }
  restore();
  return out;
}

void Machine::refute(std::size_t idx, const std::optional<Fault>& fault, StateSnapshot snap,
                     const std::string& site) {
  auto& v = monitor_->verdicts[idx];
  if (!v.correct) return;
  v.correct = false;
  v.counterexample = Counterexample{*monitor_->test, std::move(snap), site, fault};
}

void Machine::on_entry(Frame& f) {
  const Method& m = *f.method;
  const auto req = monitor_->requires_of.find(m.name);
  const auto ens = monitor_->ensures_of.find(m.name);
  SiteRecorder* rec = monitor_->recorder;
  const bool record_here = rec && !rec->anchor.is_loop() && rec->anchor.method == m.name;
  if (record_here && rec->kind == SpecKind::kRequires) {
    rec->states.push_back(StateSnapshot{f.snapshot(), std::nullopt, std::nullopt});
  }
  if (ens != monitor_->ensures_of.end() || (record_here && rec->kind == SpecKind::kEnsures)) {
    Bindings entry;
    for (const auto& [k, v] : f.vars) entry.insert_or_assign(k, v);
    f.old = deep(entry);
    f.entry = std::move(entry);
  }
  if (req == monitor_->requires_of.end()) return;
  for (std::size_t idx : req->second) {
    auto& v = monitor_->verdicts[idx];
    ++v.encounters;
    ++v.evaluations;
    bool ok = false;
    const auto flt = eval_clause(monitor_->verdicts[idx].clause.expr, Ctx{&f}, ok);
    if (!ok) {
      f.requires_ok = false;
      refute(idx, flt, StateSnapshot{f.snapshot(), std::nullopt, std::nullopt}, "entry of " + m.name);
    }
  }
}

void Machine::on_return(Frame& f) {
  const Method& m = *f.method;
  SiteRecorder* rec = monitor_->recorder;
  if (rec && !rec->anchor.is_loop() && rec->anchor.method == m.name && rec->kind == SpecKind::kEnsures) {
    rec->states.push_back(
        StateSnapshot{deep(*f.entry), f.ret ? std::optional(f.ret->deep_copy()) : std::nullopt, *f.old});
  }
  const auto ens = monitor_->ensures_of.find(m.name);
  if (ens == monitor_->ensures_of.end()) return;
  if (!f.requires_ok) {
    for (std::size_t idx : ens->second) {
      ++monitor_->verdicts[idx].encounters;
      ++monitor_->verdicts[idx].skips;
    }
    monitor_->log.push_back("test " + monitor_->test->to_json().dump() + ": precondition of " + m.name +
                            " violated, postconditions skipped");
    return;
  }
  const Value* result = f.ret ? &*f.ret : nullptr;
  for (std::size_t idx : ens->second) {
    auto& v = monitor_->verdicts[idx];
    ++v.encounters;
    ++v.evaluations;
    bool ok = false;
    const auto flt = eval_clause(v.clause.expr, Ctx{nullptr, &*f.entry, result, &*f.old}, ok);
    if (!ok) {
      refute(idx, flt, StateSnapshot{deep(*f.entry), f.ret ? std::optional(f.ret->deep_copy()) : std::nullopt, *f.old},
             "return of " + m.name);
    }
  }
}

void Machine::check_invariants(const Method& m, int loop_id, Frame& f, const std::string& when) {
  if (!monitor_ || spec_depth_ > 0) return;
  const Anchor here{m.name, loop_id};
  if (SiteRecorder* rec = monitor_->recorder; rec && rec->anchor == here) {
    rec->states.push_back(StateSnapshot{f.snapshot(), std::nullopt, std::nullopt});
  }
  const auto it = monitor_->invariants_of.find(here);
  if (it == monitor_->invariants_of.end()) return;
  for (std::size_t idx : it->second) {
    auto& v = monitor_->verdicts[idx];
    ++v.encounters;
    ++v.evaluations;
    bool ok = false;
    const auto flt = eval_clause(v.clause.expr, Ctx{&f}, ok);
    if (!ok) {
      refute(idx, flt, StateSnapshot{f.snapshot(), std::nullopt, std::nullopt},
             v.clause.anchor.to_string() + " " + when);
    }
  }
}

}  // namespace jmlbench::runtime::detail
