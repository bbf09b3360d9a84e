// SPDX-License-Identifier: Apache-2.0
#pragma once

// Depth-first adversarial exploration: forks at branches with two
// feasible arms and at every choice of the next access, checks critical
// accesses for secret-dependent hit/miss behavior, and confirms every
// witness by concrete replay.

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "symsc/cache.hpp"
#include "symsc/detector.hpp"
#include "symsc/engine.hpp"
#include "symsc/oracle.hpp"
#include "symsc/solver.hpp"

namespace symsc {

struct ExploreOptions {
  uint64_t max_interleavings = 100000;
  uint64_t wall_budget_ms = 0; // 0: unlimited
  Mode mode = Mode::Precise;
  bool two_step_fallback = true;
  bool reduce_concretize = true;
  bool reduce_tables = true;
  bool reduce_layout = true;
  /// Also check critical accesses while only the critical thread has run.
  bool check_sequential = true;
  /// After a leak, follow a single continuation instead of every schedule.
  bool early_termination = true;
  /// Explore one schedule per class of reorderings of independent accesses.
  bool schedule_reduction = true;
  size_t assoc_window = 64;
  bool verify_replay = true;
};

struct ExploreStats {
  uint64_t interleavings = 0;
  uint64_t leak_checks = 0;
  uint64_t solver_calls = 0;
  uint64_t states_forked = 0;
  uint64_t indeterminate = 0;
};

struct ExploreResult {
  std::vector<LeakReport> leaks;
  ExploreStats stats;
  std::vector<Schedule> schedules; // completed interleavings, DFS order
  bool complete = true;
  std::string incomplete_reason;

  std::set<SourceLoc> leak_sites() const {
    std::set<SourceLoc> out;
    for (const auto &l : leaks)
      out.insert(l.site);
    return out;
  }
};

class Explorer {
public:
  /// `p` must be loop-free.
  Explorer(ExprContext &ctx, const Program &p, const CacheConfig &cfg, SolverBackend &solver, ExploreOptions opts = {})
      : ctx_(ctx), p_(p), cfg_(cfg), solver_(solver), opts_(opts), doms_(program_domains(p, cfg)),
        exec_(ctx, p, solver, doms_), critical_(p.critical_tid()) {
    cfg_.validate();
    for (const auto &[n, w] : p.secret_inputs())
      secrets_.push_back(n);
  }

  ExploreResult run() {
    result_ = {};
    stop_ = false;
    const uint64_t calls0 = solver_.calls();
    start_ = std::chrono::steady_clock::now();
    dfs(exec_.initial(), false);
    result_.stats.solver_calls = solver_.calls() - calls0;
    if (result_.stats.indeterminate > 0 && result_.complete) {
      result_.complete = false;
      result_.incomplete_reason = "indeterminate solver results";
    }
    return result_;
  }

  Executor &executor() { return exec_; }
  const Domains &domains() const { return doms_; }

  /// A critical-thread access preceded by another thread's access that may
  /// share its cache set.
  bool adversarial_access(const SymbolicState &s, const AccessRecord &rec) {
    if (rec.tid != critical_)
      return false;
    for (const auto &prev : s.trace)
      if (prev.tid != rec.tid && may_same_line(ctx_, prev, rec, cfg_, solver_, doms_))
        return true;
    return false;
  }

  /// Checks event t at state s; a report when two secrets split the verdict.
  std::optional<LeakReport> divergent_cache_behavior(const SymbolicState &s, const Event &t) {
    return check(s, t, record_for(s, t));
  }

private:
  AccessRecord record_for(const SymbolicState &s, const Event &t) {
    AccessRecord r = exec_.prepare_access(s, t);
    return opts_.reduce_concretize ? concretize_record(ctx_, r) : r;
  }

  bool over_budget() {
    if (result_.stats.interleavings >= opts_.max_interleavings) {
      result_.incomplete_reason = "interleaving bound reached";
      return true;
    }
    if (opts_.wall_budget_ms > 0 &&
        std::chrono::steady_clock::now() - start_ > std::chrono::milliseconds(opts_.wall_budget_ms)) {
      result_.incomplete_reason = "wall-clock budget exhausted";
      return true;
    }
    return false;
  }

  /// Adjacent accesses from different threads commute when they touch
  /// different declarations and can never share a cache set.
  bool independent(const AccessRecord &a, const AccessRecord &b) {
    return a.decl != b.decl && !may_same_line(ctx_, a, b, cfg_, solver_, doms_);
  }

  void dfs(SymbolicState s, bool linear) {
    if (stop_)
      return;
    if (over_budget()) {
      stop_ = true;
      result_.complete = false;
      return;
    }
    s = exec_.advance(std::move(s));
    auto branches = exec_.branch_events(s);
    if (!branches.empty()) {
      for (size_t a = 0; a < 2 && !stop_; ++a) {
        ++result_.stats.states_forked;
        dfs(exec_.next_symbolic_state(s, branches[a]), linear);
      }
      return;
    }
    auto enabled = exec_.enabled_events(s);
    if (enabled.empty()) {
      ++result_.stats.interleavings;
      result_.schedules.push_back(s.schedule);
      return;
    }
    for (const Event &t : enabled) {
      AccessRecord rec = record_for(s, t);
      if (!linear && opts_.schedule_reduction && !s.trace.empty()) {
        const AccessRecord &prev = s.trace.back();
        if (prev.tid > rec.tid && independent(prev, rec))
          continue;
      }
      bool leaked = false;
      if (auto leak = check(s, t, rec)) {
        leaked = true;
        add_report(std::move(*leak));
      }
      SymbolicState next = exec_.next_symbolic_state(s, t);
      next.trace.back() = rec;
      ++result_.stats.states_forked;
      dfs(std::move(next), linear || (leaked && opts_.early_termination));
      if (linear || stop_)
        break;
    }
  }

  void add_report(LeakReport r) {
    auto key = std::make_pair(r.site, r.schedule);
    if (!reported_.insert(key).second)
      return;
    result_.leaks.push_back(std::move(r));
  }

  /// `pairs` memoizes keep_pair across rebuilds of one constraint.
  Expr build_tau(const Trace &tr, size_t i, bool use_layout, bool &reduced, std::vector<int8_t> &pairs) {
    const AccessRecord &rec = tr[i];
    const Expr tag_i = tag(ctx_, rec.addr, cfg_);
    const Interval ti = interval_of(tag_i, doms_);
    pairs.resize(i, -1);
    TauHooks hooks;
    hooks.keep_pair = [&](size_t j) {
      if (pairs[j] >= 0)
        return pairs[j] == 1;
      Expr eq = ctx_.eq(tag(ctx_, tr[j].addr, cfg_), tag_i);
      bool keep;
      if (eq.is_const())
        keep = eq.is_true();
      else if (opts_.reduce_tables && prune_distinct_table_pairs(tr, i, j, p_, cfg_, doms_))
        keep = false;
      else
        keep = solver_.check(ctx_, ctx_.land(rec.pcon, eq), doms_).status != SatStatus::Unsat;
      pairs[j] = keep ? 1 : 0;
      return keep;
    };
    if (use_layout) {
      hooks.keep_intermediate = [&](size_t l) {
        Interval tl = interval_of(tag(ctx_, tr[l].addr, cfg_), doms_);
        bool keep = ranges_may_alias_mod(tl, ti, cfg_.num_sets(), true);
        reduced |= !keep;
        return keep;
      };
    }
    return cache_hit(ctx_, tr, i, cfg_, hooks, opts_.assoc_window);
  }

  std::optional<LeakReport> check(const SymbolicState &s, const Event &t, const AccessRecord &rec) {
    if (rec.tid != critical_)
      return std::nullopt;
    bool sequential = opts_.check_sequential &&
                      std::all_of(s.trace.begin(), s.trace.end(), [&](const auto &r) { return r.tid == critical_; });
    if (!sequential && !adversarial_access(s, rec))
      return std::nullopt;
    ++result_.stats.leak_checks;

    Trace tr = s.trace;
    tr.push_back(rec);
    const size_t i = tr.size() - 1;
    Expr tau;
    bool reduced = false;
    std::vector<int8_t> pairs;
    try {
      tau = build_tau(tr, i, opts_.reduce_layout, reduced, pairs);
    } catch (const Error &) {
      ++result_.stats.indeterminate;
      return std::nullopt;
    }
    if (tau.is_const())
      return std::nullopt;

    LeakQuery q{rec.pcon, tau, secrets_, doms_};
    DivergenceResult w = solve_leak(ctx_, solver_, q, opts_.mode, opts_.two_step_fallback);
    if (w.status == SatStatus::Sat && reduced) {
      // The reduced form skipped intermediates; confirm on the full one.
      bool ignored = false;
      Expr full = build_tau(tr, i, false, ignored, pairs);
      if (!check_witness(rec.pcon, full, w)) {
        tau = full;
        q.tau = full;
        w = solve_leak(ctx_, solver_, q, opts_.mode, opts_.two_step_fallback);
      }
    }
    if (w.status == SatStatus::Unknown) {
      ++result_.stats.indeterminate;
      return std::nullopt;
    }
    if (w.status == SatStatus::Unsat)
      return std::nullopt;
    auto verdicts = check_witness(rec.pcon, tau, w);
    if (!verdicts)
      throw Error("internal: solver witness does not separate the verdicts at " + rec.site.str());

    LeakReport r;
    r.site = rec.site;
    r.access_index = i;
    r.tid = rec.tid;
    r.kind = rec.kind;
    r.decl = rec.decl;
    r.schedule = s.schedule;
    r.schedule.push_back({t.tid, rec.site});
    r.k1 = w.k1;
    r.k2 = w.k2;
    for (const auto &[n, v] : w.shared)
      if (is_adversary_var(n))
        r.adversary[n] = v;
    for (const auto &a : adversary_vars(p_))
      if (!r.adversary.count(a))
        r.adversary[a] = doms_.at(a).lo;
    r.verdict1 = verdicts->first;
    r.verdict2 = verdicts->second;
    r.mode = opts_.mode;
    if (opts_.verify_replay) {
      if (!replay_confirms(p_, cfg_, r))
        throw Error("internal: leak witness at " + r.site.str() + " failed concrete replay");
      r.replay_confirmed = true;
    }
    return r;
  }

public:
  /// Replays both witnesses along the report's schedule and compares the
  /// verdicts at the reported access.
  static bool replay_confirms(const Program &p, const CacheConfig &cfg, const LeakReport &r) {
    std::vector<int> tids;
    for (const auto &st : r.schedule)
      tids.push_back(st.tid);
    auto run = [&](const Valuation &k) -> std::optional<bool> {
      Valuation in = r.adversary;
      in.insert(k.begin(), k.end());
      BehaviorSeq b;
      try {
        b = replay(p, in, tids, cfg, true);
      } catch (const Error &) {
        return std::nullopt;
      }
      if (b.size() != r.schedule.size())
        return std::nullopt;
      for (size_t n = 0; n < b.size(); ++n)
        if (b[n].tid != r.schedule[n].tid || b[n].site != r.schedule[n].site)
          return std::nullopt;
      return b.back().hit;
    };
    auto h1 = run(r.k1);
    auto h2 = run(r.k2);
    return h1 && h2 && *h1 == (r.verdict1 == Verdict::Hit) && *h2 == (r.verdict2 == Verdict::Hit) && *h1 != *h2;
  }

private:
  ExprContext &ctx_;
  const Program &p_;
  CacheConfig cfg_;
  SolverBackend &solver_;
  ExploreOptions opts_;
  Domains doms_;
  Executor exec_;
  int critical_;
  std::vector<std::string> secrets_;
  ExploreResult result_;
  std::set<std::pair<SourceLoc, Schedule>> reported_;
  bool stop_ = false;
  std::chrono::steady_clock::time_point start_;
};

/// Convenience wrapper.
inline ExploreResult explore(const Program &p, const CacheConfig &cfg, SolverBackend &solver,
                             const ExploreOptions &opts = {}) {
  ExprContext ctx;
  Explorer ex(ctx, p, cfg, solver, opts);
  return ex.run();
}

} // namespace symsc
