// SPDX-License-Identifier: Apache-2.0
#pragma once

// Symbolic execution of one concurrent program. Thread bodies are
// flattened into jump-based code; a SymbolicState is a plain value, so
// executing an event never touches its input.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symsc/cache.hpp"
#include "symsc/domain.hpp"
#include "symsc/ir.hpp"
#include "symsc/ir_eval.hpp"
#include "symsc/solver.hpp"

namespace symsc {

struct Instr {
  enum class Kind { Assign, Load, Store, Branch, Jump };
  Kind kind = Kind::Assign;
  std::string reg;
  size_t decl = 0;
  IrExprPtr value; // Assign value, Store value, Branch condition
  IrExprPtr index;
  size_t target = 0; // Branch: where the false arm starts; Jump: destination
  SourceLoc loc;
};

struct CompiledThread {
  int tid = 0;
  bool critical = false;
  bool adversary = false;
  std::vector<Instr> code;
};

namespace detail {

inline void compile_block(const Program &p, const Block &body, std::vector<Instr> &code) {
  auto decl_index = [&](const std::string &n) {
    for (size_t i = 0; i < p.decls.size(); ++i)
      if (p.decls[i].name == n)
        return i;
    throw Error("undeclared memory '" + n + "'");
  };
  for (const auto &s : body) {
    std::visit(
        [&](const auto &x) {
          using T = std::decay_t<decltype(x)>;
          Instr in;
          in.loc = s.loc;
          if constexpr (std::is_same_v<T, AssignStmt>) {
            in.kind = Instr::Kind::Assign;
            in.reg = x.reg;
            in.value = x.value;
            code.push_back(in);
          } else if constexpr (std::is_same_v<T, LoadStmt>) {
            in.kind = Instr::Kind::Load;
            in.reg = x.reg;
            in.decl = decl_index(x.target);
            in.index = x.index;
            code.push_back(in);
          } else if constexpr (std::is_same_v<T, StoreStmt>) {
            in.kind = Instr::Kind::Store;
            in.decl = decl_index(x.target);
            in.index = x.index;
            in.value = x.value;
            code.push_back(in);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            in.kind = Instr::Kind::Branch;
            in.value = x.cond;
            size_t branch_at = code.size();
            code.push_back(in);
            compile_block(p, x.then_body, code);
            if (x.else_body.empty()) {
              code[branch_at].target = code.size();
            } else {
              Instr jump;
              jump.kind = Instr::Kind::Jump;
              jump.loc = s.loc;
              size_t jump_at = code.size();
              code.push_back(jump);
              code[branch_at].target = code.size();
              compile_block(p, x.else_body, code);
              code[jump_at].target = code.size();
            }
          } else {
            throw Error(s.loc.str() + ": loops must be unrolled before analysis");
          }
        },
        s.node);
  }
}

} // namespace detail

/// Threads in ascending tid order.
inline std::vector<CompiledThread> compile_program(const Program &p) {
  std::vector<CompiledThread> out;
  for (const auto &t : p.threads) {
    CompiledThread c;
    c.tid = t.tid;
    c.critical = t.critical;
    c.adversary = t.adversary;
    detail::compile_block(p, t.body, c.code);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.tid < b.tid; });
  return out;
}

/// alpha: local assignment; beta: one arm of a branch; gamma: load or store.
enum class EventKind { Alpha, Beta, Gamma };

struct Event {
  int tid = 0;
  size_t l = 0;  // pre-location
  size_t l2 = 0; // post-location
  EventKind kind = EventKind::Gamma;
  bool arm = true; // beta only
  SourceLoc site;

  friend bool operator==(const Event &, const Event &) = default;
};

struct ScheduleStep {
  int tid = 0;
  SourceLoc site;
  friend bool operator==(const ScheduleStep &, const ScheduleStep &) = default;
  friend auto operator<=>(const ScheduleStep &, const ScheduleStep &) = default;
};
using Schedule = std::vector<ScheduleStep>;

struct ThreadState {
  size_t pc = 0;
  std::map<std::string, Expr> regs;
  uint32_t loads = 0;
};

struct StoreEntry {
  Expr addr;
  Expr value;
};

struct SymbolicState {
  std::vector<ThreadState> threads;
  Expr pcon;
  std::vector<std::vector<StoreEntry>> stores; // per declaration, oldest first
  Trace trace;
  Schedule schedule;
  std::vector<std::pair<int, bool>> branches; // (tid, arm) in resolution order
};

inline std::string schedule_string(const Schedule &s) {
  std::string out;
  for (const auto &st : s) {
    if (!out.empty())
      out += ' ';
    out += "T" + std::to_string(st.tid) + "@" + std::to_string(st.site.line);
  }
  return out;
}

/// Variable domains for a program: secrets range freely, symbolic bases
/// stay element-aligned inside their window.
inline Domains program_domains(const Program &p, const CacheConfig &cfg) {
  Domains d;
  for (const auto &[n, w] : p.secret_inputs())
    d[n] = VarDomain::full(w);
  for (const auto &decl : p.decls) {
    if (!decl.symbolic())
      continue;
    uint64_t window = decl.window.value_or(4 * cfg.cache_size);
    window = std::min<uint64_t>(window, uint64_t{1} << kAddrWidth);
    if (window < decl.byte_size())
      throw Error("window of '" + decl.name + "' is smaller than the declaration");
    uint64_t hi = (window - decl.byte_size()) / decl.elem_size * decl.elem_size;
    d["@" + decl.name] = VarDomain{kAddrWidth, 0, hi, decl.elem_size};
  }
  return d;
}

inline std::vector<std::string> adversary_vars(const Program &p) {
  std::vector<std::string> out;
  for (const auto &d : p.decls)
    if (d.symbolic())
      out.push_back("@" + d.name);
  return out;
}

class Executor {
public:
  Executor(ExprContext &ctx, const Program &p, SolverBackend &solver, Domains doms)
      : ctx_(ctx), p_(p), code_(compile_program(p)), solver_(solver), doms_(std::move(doms)) {}

  const std::vector<CompiledThread> &threads() const { return code_; }
  const Program &program() const { return p_; }
  const Domains &domains() const { return doms_; }
  ExprContext &context() { return ctx_; }

  SymbolicState initial() const {
    SymbolicState s;
    s.threads.resize(code_.size());
    s.pcon = ctx_.true_();
    s.stores.resize(p_.decls.size());
    return s;
  }

  size_t thread_index(int tid) const {
    for (size_t i = 0; i < code_.size(); ++i)
      if (code_[i].tid == tid)
        return i;
    throw Error("no thread " + std::to_string(tid));
  }

  bool finished(const SymbolicState &s, size_t ti) const { return s.threads[ti].pc >= code_[ti].code.size(); }

  const Instr *next_instr(const SymbolicState &s, size_t ti) const {
    return finished(s, ti) ? nullptr : &code_[ti].code[s.threads[ti].pc];
  }

  /// Satisfiability of a path formula; an indeterminate answer counts as
  /// feasible.
  bool feasible(Expr e) {
    if (e.is_const())
      return e.is_true();
    return solver_.check(ctx_, e, doms_).status != SatStatus::Unsat;
  }

  Expr condition(const SymbolicState &s, size_t ti) {
    const Instr &in = *next_instr(s, ti);
    SymbolicDomain d{ctx_};
    return as_condition(d, eval(s, ti, in.value));
  }

  /// Runs assignments, jumps, and branches with a single feasible arm in
  /// every thread, until each thread waits at a gamma event, at a branch
  /// with two feasible arms, or at its end.
  SymbolicState advance(SymbolicState s) {
    for (size_t ti = 0; ti < code_.size(); ++ti) {
      for (;;) {
        const Instr *in = next_instr(s, ti);
        if (!in)
          break;
        if (in->kind == Instr::Kind::Assign) {
          s = next_symbolic_state(s, local_event(s, ti, EventKind::Alpha, true));
        } else if (in->kind == Instr::Kind::Jump) {
          s.threads[ti].pc = in->target;
        } else if (in->kind == Instr::Kind::Branch) {
          Expr c = condition(s, ti);
          bool can_true = feasible(ctx_.land(s.pcon, c));
          bool can_false = feasible(ctx_.land(s.pcon, ctx_.lnot(c)));
          if (can_true && can_false)
            break;
          if (!can_true && !can_false)
            throw Error("path condition became infeasible");
          s = next_symbolic_state(s, local_event(s, ti, EventKind::Beta, can_true));
        } else {
          break;
        }
      }
    }
    return s;
  }

  /// Branches with two feasible arms, one pair per waiting thread,
  /// true arm first.
  std::vector<Event> branch_events(const SymbolicState &s) const {
    std::vector<Event> out;
    for (size_t ti = 0; ti < code_.size(); ++ti) {
      const Instr *in = next_instr(s, ti);
      if (in && in->kind == Instr::Kind::Branch) {
        out.push_back(local_event(s, ti, EventKind::Beta, true));
        out.push_back(local_event(s, ti, EventKind::Beta, false));
      }
    }
    return out;
  }

  /// One gamma event per thread whose next instruction is a load or store.
  std::vector<Event> enabled_events(const SymbolicState &s) const {
    std::vector<Event> out;
    for (size_t ti = 0; ti < code_.size(); ++ti) {
      const Instr *in = next_instr(s, ti);
      if (in && (in->kind == Instr::Kind::Load || in->kind == Instr::Kind::Store)) {
        Event e;
        e.tid = code_[ti].tid;
        e.l = s.threads[ti].pc;
        e.l2 = e.l + 1;
        e.kind = EventKind::Gamma;
        e.site = in->loc;
        out.push_back(e);
      }
    }
    return out;
  }

  /// The access record a gamma event would append, without executing it.
  AccessRecord prepare_access(const SymbolicState &s, const Event &t) {
    size_t ti = thread_index(t.tid);
    const Instr &in = code_[ti].code[t.l];
    AccessRecord r;
    r.i = s.trace.size();
    r.tid = t.tid;
    r.kind = in.kind == Instr::Kind::Load ? AccessKind::Load : AccessKind::Store;
    r.addr = address(s, ti, in);
    r.pcon = s.pcon;
    r.site = in.loc;
    r.decl = p_.decls[in.decl].name;
    return r;
  }

  SymbolicState next_symbolic_state(const SymbolicState &s, const Event &t) {
    SymbolicState n = s;
    size_t ti = thread_index(t.tid);
    ThreadState &th = n.threads[ti];
    if (th.pc != t.l)
      throw Error("event does not match the thread's location");
    const Instr &in = code_[ti].code[t.l];
    switch (t.kind) {
    case EventKind::Alpha: {
      th.regs[in.reg] = eval(s, ti, in.value);
      th.pc = t.l2;
      break;
    }
    case EventKind::Beta: {
      Expr c = condition(s, ti);
      n.pcon = ctx_.land(n.pcon, t.arm ? c : ctx_.lnot(c));
      n.branches.emplace_back(t.tid, t.arm);
      th.pc = t.l2;
      break;
    }
    case EventKind::Gamma: {
      AccessRecord r = prepare_access(s, t);
      const Declaration &d = p_.decls[in.decl];
      if (in.kind == Instr::Kind::Load) {
        th.regs[in.reg] = read(s, in.decl, r.addr, index_of(s, ti, in), t.tid, th.loads);
        ++th.loads;
      } else {
        Expr v = ctx_.resize(eval(s, ti, in.value), d.value_width());
        n.stores[in.decl].push_back({r.addr, v});
      }
      n.schedule.push_back({t.tid, in.loc});
      n.trace.push_back(std::move(r));
      th.pc = t.l2;
      break;
    }
    }
    return n;
  }

private:
  Event local_event(const SymbolicState &s, size_t ti, EventKind kind, bool arm) const {
    const Instr &in = code_[ti].code[s.threads[ti].pc];
    Event e;
    e.tid = code_[ti].tid;
    e.l = s.threads[ti].pc;
    e.kind = kind;
    e.arm = arm;
    e.site = in.loc;
    e.l2 = kind == EventKind::Beta && !arm ? in.target : e.l + 1;
    return e;
  }

  Expr eval(const SymbolicState &s, size_t ti, const IrExprPtr &e) {
    SymbolicDomain d{ctx_};
    const ThreadState &th = s.threads[ti];
    return eval_ir<SymbolicDomain>(d, e, [&](const std::string &n) -> Expr {
      if (auto it = th.regs.find(n); it != th.regs.end())
        return it->second;
      if (const InputDecl *in = p_.find_input(n))
        return in->secret ? ctx_.var(n, in->width) : ctx_.constant(in->width, in->value);
      if (const Declaration *decl = p_.find_decl(n)) {
        if (decl->sensitivity == Sensitivity::Secret)
          return ctx_.var(decl->name, decl->value_width());
        if (decl->sensitivity == Sensitivity::Public)
          return ctx_.constant(decl->value_width(), decl->public_value);
      }
      // Registers read before any write hold zero.
      return ctx_.constant(32, 0);
    });
  }

  Expr index_of(const SymbolicState &s, size_t ti, const Instr &in) {
    if (!in.index)
      return ctx_.constant(kAddrWidth, 0);
    return ctx_.resize(eval(s, ti, in.index), kAddrWidth);
  }

  Expr address(const SymbolicState &s, size_t ti, const Instr &in) {
    const Declaration &d = p_.decls[in.decl];
    Expr base = d.base ? ctx_.constant(kAddrWidth, *d.base) : ctx_.var("@" + d.name, kAddrWidth);
    Expr off = ctx_.mul(index_of(s, ti, in), ctx_.constant(kAddrWidth, d.elem_size));
    return ctx_.add(base, off);
  }

  /// Value held by an element before any store on this path.
  Expr initial_value(const Declaration &d, Expr index, int tid, uint32_t load_no) {
    const unsigned w = d.value_width();
    auto element = [&](uint64_t i) -> Expr {
      if (d.sensitivity == Sensitivity::Secret)
        return ctx_.var(Program::element_var(d, i), w);
      return ctx_.constant(w, i < d.contents.size() ? d.contents[i] : 0);
    };
    if (d.sensitivity == Sensitivity::Public)
      return ctx_.constant(w, d.public_value);
    if (d.sensitivity == Sensitivity::Secret || !d.contents.empty()) {
      uint64_t n = d.sensitivity == Sensitivity::Secret ? d.length : d.contents.size();
      if (index.is_const())
        return index.value() < n ? element(index.value()) : ctx_.constant(w, 0);
      Expr v = ctx_.constant(w, 0);
      for (uint64_t i = n; i-- > 0;)
        v = ctx_.ite(ctx_.eq(index, ctx_.constant(kAddrWidth, i)), element(i), v);
      return v;
    }
    // Memory nobody initialised: an environment value, pinned to zero.
    return ctx_.var("%t" + std::to_string(tid) + ".ld" + std::to_string(load_no), w);
  }

  Expr read(const SymbolicState &s, size_t decl, Expr addr, Expr index, int tid, uint32_t load_no) {
    const Declaration &d = p_.decls[decl];
    Expr v = initial_value(d, index, tid, load_no);
    for (const auto &st : s.stores[decl])
      v = ctx_.ite(ctx_.eq(st.addr, addr), st.value, v);
    return v;
  }

  ExprContext &ctx_;
  const Program &p_;
  std::vector<CompiledThread> code_;
  SolverBackend &solver_;
  Domains doms_;
};

} // namespace symsc
