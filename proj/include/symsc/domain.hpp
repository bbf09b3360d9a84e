// SPDX-License-Identifier: Apache-2.0
#pragma once

// Variable domains shared by every solver backend, and a conservative
// unsigned interval analysis over expressions.

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "symsc/expr.hpp"

namespace symsc {

/// Values lo, lo+step, ..., up to hi.
struct VarDomain {
  unsigned width = 8;
  uint64_t lo = 0;
  uint64_t hi = 0xff;
  uint64_t step = 1;

  static VarDomain full(unsigned w) { return {w, 0, mask_of(w), 1}; }
  static VarDomain fixed(unsigned w, uint64_t v) { return {w, v, v, 1}; }

  uint64_t count() const { return (hi - lo) / step + 1; }
  double bits() const { return std::log2(static_cast<double>(count())); }
  bool contains(uint64_t v) const { return v >= lo && v <= hi && (v - lo) % step == 0; }
  bool is_fixed() const { return lo == hi; }
};

using Domains = std::map<std::string, VarDomain>;

/// Environment variables (values of never-written memory) carry this prefix
/// and are always pinned to zero.
inline bool is_environment_var(const std::string &name) { return !name.empty() && name[0] == '%'; }
/// Symbolic base addresses carry this prefix.
inline bool is_adversary_var(const std::string &name) { return !name.empty() && name[0] == '@'; }

struct Interval {
  uint64_t lo = 0;
  uint64_t hi = 0;

  bool is_point() const { return lo == hi; }
  friend bool operator==(const Interval &, const Interval &) = default;
};

namespace detail {

inline bool add_overflows(uint64_t a, uint64_t b, unsigned width) {
  if (width >= 64)
    return a > ~uint64_t{0} - b;
  return a + b > mask_of(width);
}

inline Interval interval_rec(Expr e, const Domains &doms, std::map<size_t, Interval> &memo) {
  if (auto it = memo.find(e.id()); it != memo.end())
    return it->second;
  const unsigned w = e.width();
  const Interval top{0, mask_of(w)};
  Interval r = top;
  auto kid = [&](unsigned i) { return interval_rec(e.kid(i), doms, memo); };
  switch (e.op()) {
  case Op::Const: r = {e.value(), e.value()}; break;
  case Op::Var: {
    auto it = doms.find(e.name());
    if (it != doms.end())
      r = {it->second.lo & mask_of(w), std::min(it->second.hi, mask_of(w))};
    else if (is_environment_var(e.name()))
      r = {0, 0};
    break;
  }
  case Op::Add: {
    Interval a = kid(0), b = kid(1);
    if (!add_overflows(a.hi, b.hi, w))
      r = {a.lo + b.lo, a.hi + b.hi};
    break;
  }
  case Op::Sub: {
    Interval a = kid(0), b = kid(1);
    if (a.lo >= b.hi)
      r = {a.lo - b.hi, a.hi - b.lo};
    break;
  }
  case Op::Mul: {
    Interval a = kid(0), b = kid(1);
    unsigned need = std::bit_width(a.hi) + std::bit_width(b.hi);
    if (need <= std::min(w, 63u))
      r = {a.lo * b.lo, a.hi * b.hi};
    break;
  }
  case Op::And: {
    Interval a = kid(0), b = kid(1);
    r = {0, std::min(a.hi, b.hi)};
    break;
  }
  case Op::Or:
  case Op::Xor: {
    Interval a = kid(0), b = kid(1);
    unsigned bw = std::max(std::bit_width(a.hi), std::bit_width(b.hi));
    r = {0, mask_of(bw) & mask_of(w)};
    break;
  }
  case Op::Shl: {
    Interval a = kid(0), s = kid(1);
    if (s.is_point() && s.lo < w && std::bit_width(a.hi) + s.lo <= w)
      r = {a.lo << s.lo, a.hi << s.lo};
    break;
  }
  case Op::LShr: {
    Interval a = kid(0), s = kid(1);
    if (s.is_point())
      r = s.lo >= w ? Interval{0, 0} : Interval{a.lo >> s.lo, a.hi >> s.lo};
    else
      r = {0, a.hi};
    break;
  }
  case Op::Not:
    if (w == 1) {
      Interval a = kid(0);
      r = a.is_point() ? Interval{1 - a.lo, 1 - a.lo} : top;
    }
    break;
  case Op::Eq:
  case Op::Ult:
  case Op::Ule: r = {0, 1}; break;
  case Op::Ite: {
    Interval c = kid(0);
    Interval a = kid(1), b = kid(2);
    if (c.is_point())
      r = c.lo ? a : b;
    else
      r = {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    break;
  }
  case Op::ZExt: r = kid(0); break;
  case Op::Extract: {
    Interval a = kid(0);
    uint64_t lo_bit = e.value();
    if (lo_bit + w >= 64 || (a.hi >> lo_bit) <= mask_of(w))
      r = {(a.lo >> lo_bit) & mask_of(w), (a.hi >> lo_bit) & mask_of(w)};
    if (r.lo > r.hi)
      r = top;
    break;
  }
  }
  memo.emplace(e.id(), r);
  return r;
}

} // namespace detail

/// Sound unsigned range of e when every variable ranges over its domain.
/// Variables without a domain are unconstrained.
inline Interval interval_of(Expr e, const Domains &doms) {
  std::map<size_t, Interval> memo;
  return detail::interval_rec(e, doms, memo);
}

} // namespace symsc
