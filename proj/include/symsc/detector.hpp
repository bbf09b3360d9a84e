// SPDX-License-Identifier: Apache-2.0
#pragma once

// Leak queries over a hit constraint: the joint two-copy query, and the
// cheaper two-step approximation that fixes the first secret before
// looking for a second.

#include <optional>
#include <string>
#include <vector>

#include "symsc/cache.hpp"
#include "symsc/engine.hpp"
#include "symsc/solver.hpp"

namespace symsc {

enum class Mode { Precise, TwoStep };

inline const char *to_string(Mode m) { return m == Mode::Precise ? "precise" : "two-step"; }

enum class Verdict { Hit, Miss };

inline const char *to_string(Verdict v) { return v == Verdict::Hit ? "hit" : "miss"; }

struct LeakReport {
  SourceLoc site;
  size_t access_index = 0;
  int tid = 0;
  AccessKind kind = AccessKind::Load;
  std::string decl;
  Schedule schedule; // accesses up to and including this one
  Valuation k1, k2;
  Valuation adversary; // symbolic bases, empty for fixed layouts
  Verdict verdict1 = Verdict::Miss;
  Verdict verdict2 = Verdict::Miss;
  Mode mode = Mode::Precise;
  bool replay_confirmed = false;
};

struct LeakQuery {
  Expr pcon;
  Expr tau;
  std::vector<std::string> secrets;
  Domains domains;
};

/// pcon(K1) & pcon(K2) & K1 != K2 & tau(K1) != tau(K2), one shared layout.
inline DivergenceResult solve_precise(ExprContext &ctx, SolverBackend &solver, const LeakQuery &q) {
  if (q.tau.is_const()) {
    DivergenceResult r;
    r.status = SatStatus::Unsat;
    return r;
  }
  return solver.divergence(ctx, DivergenceQuery{q.pcon, q.tau, q.secrets, q.domains});
}

namespace detail {

inline Valuation secrets_of(const Valuation &model, const std::vector<std::string> &secrets, const Domains &doms) {
  Valuation out;
  for (const auto &k : secrets) {
    auto it = model.find(k);
    if (it != model.end())
      out[k] = it->second;
    else
      out[k] = doms.count(k) ? doms.at(k).lo : 0;
  }
  return out;
}

} // namespace detail

/// First a secret k1 (preferring the hit side, then the miss side when
/// `fallback` is set), then a k2 that flips the verdict under k1 held fixed.
inline DivergenceResult solve_two_step(ExprContext &ctx, SolverBackend &solver, const LeakQuery &q,
                                       bool fallback = true) {
  DivergenceResult r;
  if (q.tau.is_const()) {
    r.status = SatStatus::Unsat;
    return r;
  }
  CheckResult first = solver.check(ctx, ctx.land(q.pcon, q.tau), q.domains);
  if (first.status == SatStatus::Unsat && fallback)
    first = solver.check(ctx, ctx.land(q.pcon, ctx.lnot(q.tau)), q.domains);
  if (first.status != SatStatus::Sat) {
    r.status = first.status;
    return r;
  }
  Valuation k1 = detail::secrets_of(first.model, q.secrets, q.domains);

  std::map<std::string, Expr> fixed;
  std::vector<Expr> differ;
  for (const auto &[k, v] : k1) {
    unsigned w = q.domains.at(k).width;
    fixed[k] = ctx.constant(w, v);
    differ.push_back(ctx.ne(ctx.var(k, w), fixed[k]));
  }
  Expr pcon1 = ctx.substitute(q.pcon, fixed);
  Expr tau1 = ctx.substitute(q.tau, fixed);
  // The layout stays free: k1's verdict is re-evaluated under whatever
  // layout the second step picks.
  Expr f = ctx.land(ctx.land(pcon1, q.pcon), ctx.lor(differ));
  f = ctx.land(f, ctx.lxor(tau1, q.tau));
  CheckResult second = solver.check(ctx, f, q.domains);
  r.status = second.status;
  if (second.status != SatStatus::Sat)
    return r;
  r.k1 = k1;
  r.k2 = detail::secrets_of(second.model, q.secrets, q.domains);
  for (const auto &[n, v] : second.model)
    if (std::find(q.secrets.begin(), q.secrets.end(), n) == q.secrets.end())
      r.shared[n] = v;
  for (const auto &[n, w] : free_vars(std::array<Expr, 2>{q.pcon, q.tau}))
    if (!r.shared.count(n) && std::find(q.secrets.begin(), q.secrets.end(), n) == q.secrets.end())
      r.shared[n] = q.domains.count(n) ? q.domains.at(n).lo : 0;
  return r;
}

inline DivergenceResult solve_leak(ExprContext &ctx, SolverBackend &solver, const LeakQuery &q, Mode mode,
                                   bool fallback = true) {
  return mode == Mode::Precise ? solve_precise(ctx, solver, q) : solve_two_step(ctx, solver, q, fallback);
}

/// Evaluates pcon and tau under both witnesses. Returns the two verdicts
/// when both runs satisfy pcon and disagree on tau.
inline std::optional<std::pair<Verdict, Verdict>> check_witness(Expr pcon, Expr tau, const DivergenceResult &w) {
  auto full = [&](const Valuation &k) {
    Valuation v = w.shared;
    v.insert(k.begin(), k.end());
    for (const auto &[n, width] : free_vars(std::array<Expr, 2>{pcon, tau}))
      if (!v.count(n))
        v[n] = 0;
    return v;
  };
  Valuation a = full(w.k1), b = full(w.k2);
  if (evaluate(pcon, a) != 1 || evaluate(pcon, b) != 1)
    return std::nullopt;
  uint64_t ta = evaluate(tau, a), tb = evaluate(tau, b);
  if (ta == tb)
    return std::nullopt;
  return std::make_pair(ta ? Verdict::Hit : Verdict::Miss, tb ? Verdict::Hit : Verdict::Miss);
}

} // namespace symsc
