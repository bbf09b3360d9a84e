// SPDX-License-Identifier: Apache-2.0
#pragma once

// Symbolic cache model: block/set functions, the per-access hit
// constraint over an interleaved access trace, and the pruning passes
// that shrink it.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "symsc/cache_config.hpp"
#include "symsc/domain.hpp"
#include "symsc/expr.hpp"
#include "symsc/ir.hpp"
#include "symsc/solver.hpp"

namespace symsc {

inline constexpr unsigned kAddrWidth = 32;

enum class AccessKind { Load, Store };

inline const char *to_string(AccessKind k) { return k == AccessKind::Load ? "load" : "store"; }

struct AccessRecord {
  size_t i = 0;
  int tid = 0;
  AccessKind kind = AccessKind::Load;
  Expr addr;
  Expr pcon;
  SourceLoc site;
  std::string decl;
};

using Trace = std::vector<AccessRecord>;

/// Block address: equal tags mean the same memory block.
inline Expr tag(ExprContext &ctx, Expr addr, const CacheConfig &cfg) {
  return ctx.lshr(addr, ctx.constant(addr.width(), cfg.line_bits()));
}

/// Set index.
inline Expr line(ExprContext &ctx, Expr addr, const CacheConfig &cfg) {
  return ctx.bit_and(tag(ctx, addr, cfg), ctx.constant(addr.width(), cfg.num_sets() - 1));
}

inline uint64_t concrete_tag(uint64_t addr, const CacheConfig &cfg) { return addr >> cfg.line_bits(); }
inline uint64_t concrete_line(uint64_t addr, const CacheConfig &cfg) {
  return concrete_tag(addr, cfg) & (cfg.num_sets() - 1);
}

/// True when some x in a and y in b satisfy x - y = m * modulus, with m
/// nonzero when `distinct` is set.
inline bool ranges_may_alias_mod(Interval a, Interval b, uint64_t modulus, bool distinct) {
  const __int128 lo = static_cast<__int128>(a.lo) - static_cast<__int128>(b.hi);
  const __int128 hi = static_cast<__int128>(a.hi) - static_cast<__int128>(b.lo);
  const __int128 m = static_cast<__int128>(modulus);
  auto floor_div = [](__int128 x, __int128 d) { return x >= 0 ? x / d : -((-x + d - 1) / d); };
  __int128 first = floor_div(lo + m - 1, m); // smallest multiple index >= lo
  __int128 last = floor_div(hi, m);
  if (first > last)
    return false;
  if (!distinct)
    return true;
  return !(first == 0 && last == 0);
}

/// Hooks let callers drop terms the layout proves irrelevant.
struct TauHooks {
  /// false: tag(addr_j) = tag(addr_i) is known unsatisfiable; the disjunct goes.
  std::function<bool(size_t j)> keep_pair;
  /// false: A_l can never sit in A_i's set under a different block.
  std::function<bool(size_t l)> keep_intermediate;
};

/// Direct-mapped hit condition: some earlier access touched the same block
/// and nothing in between mapped to the same line.
inline Expr hit_constraint(ExprContext &ctx, const Trace &tr, size_t i, const CacheConfig &cfg,
                           const TauHooks &hooks = {}) {
  if (i >= tr.size())
    throw Error("hit_constraint: access index out of range");
  const Expr tag_i = tag(ctx, tr[i].addr, cfg);
  const Expr line_i = line(ctx, tr[i].addr, cfg);
  Expr tau = ctx.false_();
  Expr guard = ctx.true_();
  for (size_t j = i; j-- > 0;) {
    Expr same_block = ctx.eq(tag(ctx, tr[j].addr, cfg), tag_i);
    if (!hooks.keep_pair || hooks.keep_pair(j))
      tau = ctx.lor(tau, ctx.land(same_block, guard));
    // An earlier match would need this access to leave the line alone,
    // which a certain match rules out.
    if (same_block.is_true())
      break;
    if (!hooks.keep_intermediate || hooks.keep_intermediate(j))
      guard = ctx.land(guard, ctx.ne(line(ctx, tr[j].addr, cfg), line_i));
    if (guard.is_false())
      break;
  }
  return tau;
}

/// LRU hit condition for any associativity W: some earlier access touched
/// the same block and fewer than W other blocks of that set were touched
/// since. Refuses symbolic traces longer than `window`.
inline Expr hit_constraint_assoc(ExprContext &ctx, const Trace &tr, size_t i, const CacheConfig &cfg,
                                 const TauHooks &hooks = {}, size_t window = 64) {
  if (i >= tr.size())
    throw Error("hit_constraint_assoc: access index out of range");
  if (i > window) {
    for (size_t l = 0; l <= i; ++l)
      if (!tr[l].addr.is_const())
        throw Error("hit_constraint_assoc: access " + std::to_string(i) + " exceeds the symbolic window of " +
                    std::to_string(window) + " accesses");
  }
  constexpr unsigned cw = 16;
  const Expr tag_i = tag(ctx, tr[i].addr, cfg);
  const Expr set_i = line(ctx, tr[i].addr, cfg);
  std::vector<Expr> tags(i);
  for (size_t l = 0; l < i; ++l)
    tags[l] = tag(ctx, tr[l].addr, cfg);

  // d_l: A_l is the last touch of a block that competes with A_i's block.
  auto distinct_conflict = [&](size_t l) -> Expr {
    if (hooks.keep_intermediate && !hooks.keep_intermediate(l))
      return ctx.false_();
    Expr d = ctx.land(ctx.eq(line(ctx, tr[l].addr, cfg), set_i), ctx.ne(tags[l], tag_i));
    for (size_t m = l + 1; m < i && !d.is_false(); ++m)
      d = ctx.land(d, ctx.ne(tags[m], tags[l]));
    return d;
  };

  Expr tau = ctx.false_();
  Expr count = ctx.constant(cw, 0);
  const Expr limit = ctx.constant(cw, cfg.assoc);
  for (size_t j = i; j-- > 0;) {
    Expr same_block = ctx.eq(tags[j], tag_i);
    if (!hooks.keep_pair || hooks.keep_pair(j))
      tau = ctx.lor(tau, ctx.land(same_block, ctx.ult(count, limit)));
    if (same_block.is_true())
      break;
    count = ctx.add(count, ctx.zext(distinct_conflict(j), cw));
    if (count.is_const() && count.value() >= cfg.assoc)
      break;
  }
  return tau;
}

/// Dispatches on associativity.
inline Expr cache_hit(ExprContext &ctx, const Trace &tr, size_t i, const CacheConfig &cfg, const TauHooks &hooks = {},
                      size_t window = 64) {
  return cfg.assoc == 1 ? hit_constraint(ctx, tr, i, cfg, hooks) : hit_constraint_assoc(ctx, tr, i, cfg, hooks, window);
}

/// Whether the two accesses can map to one cache set on a common path.
/// Interval reasoning first; the solver only when that is inconclusive.
/// A solver timeout answers true.
inline bool may_same_line(ExprContext &ctx, const AccessRecord &a, const AccessRecord &b, const CacheConfig &cfg,
                          SolverBackend &solver, const Domains &doms) {
  Expr same = ctx.eq(line(ctx, a.addr, cfg), line(ctx, b.addr, cfg));
  if (same.is_const())
    return same.is_true();
  Interval ta = interval_of(tag(ctx, a.addr, cfg), doms);
  Interval tb = interval_of(tag(ctx, b.addr, cfg), doms);
  if (!ranges_may_alias_mod(ta, tb, cfg.num_sets(), false))
    return false;
  Expr q = ctx.land(ctx.land(a.pcon, b.pcon), same);
  return solver.check(ctx, q, doms).status != SatStatus::Unsat;
}

/// Folds the address into a constant when it depends on neither a secret
/// nor a symbolic base. Environment values are pinned to zero.
inline AccessRecord concretize_record(ExprContext &ctx, AccessRecord r) {
  if (r.addr.is_const())
    return r;
  Valuation zeros;
  for (const auto &[n, w] : free_vars(r.addr)) {
    if (!is_environment_var(n))
      return r;
    zeros[n] = 0;
  }
  r.addr = ctx.constant(r.addr.width(), evaluate(r.addr, zeros));
  return r;
}

inline Trace concretize_addresses(ExprContext &ctx, const Trace &tr) {
  Trace out;
  out.reserve(tr.size());
  for (const auto &r : tr)
    out.push_back(concretize_record(ctx, r));
  return out;
}

inline std::optional<Interval> decl_block_range(const Declaration &d, const CacheConfig &cfg) {
  if (!d.base)
    return std::nullopt;
  return Interval{*d.base >> cfg.line_bits(), (*d.base + d.byte_size() - 1) >> cfg.line_bits()};
}

/// True when A_i and A_j provably touch different blocks because they stay
/// inside two declarations whose block ranges are disjoint.
inline bool prune_distinct_table_pairs(const Trace &tr, size_t i, size_t j, const Program &layout,
                                       const CacheConfig &cfg, const Domains &doms) {
  const AccessRecord &a = tr[i];
  const AccessRecord &b = tr[j];
  if (a.decl == b.decl)
    return false;
  const Declaration *da = layout.find_decl(a.decl);
  const Declaration *db = layout.find_decl(b.decl);
  if (!da || !db || !da->base || !db->base)
    return false;
  auto inside = [&](const AccessRecord &r, const Declaration &d) {
    Interval iv = interval_of(r.addr, doms);
    return iv.lo >= *d.base && iv.hi < *d.base + d.byte_size();
  };
  if (!inside(a, *da) || !inside(b, *db))
    return false;
  Interval ra = *decl_block_range(*da, cfg);
  Interval rb = *decl_block_range(*db, cfg);
  return ra.hi < rb.lo || rb.hi < ra.lo;
}

struct LayoutReduction {
  std::vector<size_t> kept;    // intermediates that may still evict A_i
  std::vector<size_t> dropped; // intermediates proven harmless
  /// Set when anything was dropped: a hit verdict built from the reduced
  /// form must be confirmed against the full constraint.
  bool needs_recheck = false;
};

/// Among A_{j+1} .. A_{i-1}, keeps those whose block range can reach A_i's
/// set under a different block.
inline LayoutReduction layout_reduce(ExprContext &ctx, const Trace &tr, size_t i, size_t j, const CacheConfig &cfg,
                                     const Domains &doms) {
  if (j >= i)
    throw Error("layout_reduce: requires j < i");
  LayoutReduction r;
  Interval ti = interval_of(tag(ctx, tr[i].addr, cfg), doms);
  for (size_t l = j + 1; l < i; ++l) {
    Interval tl = interval_of(tag(ctx, tr[l].addr, cfg), doms);
    if (ranges_may_alias_mod(tl, ti, cfg.num_sets(), true))
      r.kept.push_back(l);
    else
      r.dropped.push_back(l);
  }
  r.needs_recheck = !r.dropped.empty();
  return r;
}

} // namespace symsc
