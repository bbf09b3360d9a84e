// SPDX-License-Identifier: Apache-2.0
#pragma once

// Width rules for IR expressions, written once over an abstract value
// domain so the symbolic engine and the concrete oracle cannot drift.
//
//   literal next to a non-literal: max(partner width, bits of the literal)
//   literal alone: 32 bits (wider if the value needs it)
//   binary operands are zero-extended to the wider side
//   comparisons and '!' give width 1; '-x' is 0 - x

#include <bit>
#include <functional>
#include <string>

#include "symsc/ir.hpp"

namespace symsc {

inline unsigned literal_width(uint64_t v) { return std::max(1u, static_cast<unsigned>(std::bit_width(v))); }

/// D supplies: using V; constant(w, v); width(V); resize(V, w);
/// binary(op, V, V) for arithmetic and comparisons; unary(op, V).
template <class D>
typename D::V eval_ir(D &d, const IrExprPtr &e, const std::function<typename D::V(const std::string &)> &name) {
  using V = typename D::V;
  switch (e->kind) {
  case IrExpr::Kind::Literal: return d.constant(std::max(32u, literal_width(e->value)), e->value);
  case IrExpr::Kind::Name: return name(e->name);
  case IrExpr::Kind::Unary: return d.unary(e->name, eval_ir(d, e->lhs, name));
  case IrExpr::Kind::Binary: {
    const bool lit_l = e->lhs->kind == IrExpr::Kind::Literal;
    const bool lit_r = e->rhs->kind == IrExpr::Kind::Literal;
    V l, r;
    if (lit_l && !lit_r) {
      r = eval_ir(d, e->rhs, name);
      unsigned w = std::max(d.width(r), literal_width(e->lhs->value));
      l = d.constant(w, e->lhs->value);
      r = d.resize(r, w);
    } else if (lit_r && !lit_l) {
      l = eval_ir(d, e->lhs, name);
      unsigned w = std::max(d.width(l), literal_width(e->rhs->value));
      r = d.constant(w, e->rhs->value);
      l = d.resize(l, w);
    } else {
      l = eval_ir(d, e->lhs, name);
      r = eval_ir(d, e->rhs, name);
      unsigned w = std::max(d.width(l), d.width(r));
      l = d.resize(l, w);
      r = d.resize(r, w);
    }
    return d.binary(e->name, l, r);
  }
  }
  throw Error("eval_ir: bad expression");
}

/// A branch condition holds when its value is nonzero.
template <class D> typename D::V as_condition(D &d, typename D::V v) {
  if (d.width(v) == 1)
    return v;
  return d.binary("!=", v, d.constant(d.width(v), 0));
}

/// Symbolic domain.
struct SymbolicDomain {
  using V = Expr;
  ExprContext &ctx;

  V constant(unsigned w, uint64_t v) { return ctx.constant(w, v); }
  unsigned width(V v) const { return v.width(); }
  V resize(V v, unsigned w) { return ctx.resize(v, w); }
  V unary(const std::string &op, V x) {
    if (op == "-")
      return ctx.neg(x);
    if (op == "~")
      return ctx.bit_not(x);
    if (op == "!")
      return ctx.eq(x, ctx.constant(x.width(), 0));
    throw Error("unknown unary operator '" + op + "'");
  }
  V binary(const std::string &op, V a, V b) {
    if (op == "+") return ctx.add(a, b);
    if (op == "-") return ctx.sub(a, b);
    if (op == "*") return ctx.mul(a, b);
    if (op == "&") return ctx.bit_and(a, b);
    if (op == "|") return ctx.bit_or(a, b);
    if (op == "^") return ctx.bit_xor(a, b);
    if (op == "<<") return ctx.shl(a, b);
    if (op == ">>") return ctx.lshr(a, b);
    if (op == "==") return ctx.eq(a, b);
    if (op == "!=") return ctx.ne(a, b);
    if (op == "<") return ctx.ult(a, b);
    if (op == "<=") return ctx.ule(a, b);
    if (op == ">") return ctx.ugt(a, b);
    if (op == ">=") return ctx.uge(a, b);
    throw Error("unknown binary operator '" + op + "'");
  }
};

struct ConcreteValue {
  uint64_t v = 0;
  unsigned w = 32;
};

/// Concrete domain. Kept independent of the expression DAG on purpose.
struct ConcreteDomain {
  using V = ConcreteValue;

  V constant(unsigned w, uint64_t v) const { return {v & mask_of(w), w}; }
  unsigned width(V v) const { return v.w; }
  V resize(V v, unsigned w) const { return {v.v & mask_of(w), w}; }
  V unary(const std::string &op, V x) const {
    if (op == "-")
      return {(uint64_t{0} - x.v) & mask_of(x.w), x.w};
    if (op == "~")
      return {~x.v & mask_of(x.w), x.w};
    if (op == "!")
      return {x.v == 0 ? 1u : 0u, 1};
    throw Error("unknown unary operator '" + op + "'");
  }
  V binary(const std::string &op, V a, V b) const {
    const unsigned w = a.w;
    const uint64_t m = mask_of(w);
    auto val = [&](uint64_t x) { return V{x & m, w}; };
    auto flag = [](bool x) { return V{x ? 1u : 0u, 1}; };
    if (op == "+") return val(a.v + b.v);
    if (op == "-") return val(a.v - b.v);
    if (op == "*") return val(a.v * b.v);
    if (op == "&") return val(a.v & b.v);
    if (op == "|") return val(a.v | b.v);
    if (op == "^") return val(a.v ^ b.v);
    if (op == "<<") return val(b.v >= w ? 0 : a.v << b.v);
    if (op == ">>") return val(b.v >= w ? 0 : a.v >> b.v);
    if (op == "==") return flag(a.v == b.v);
    if (op == "!=") return flag(a.v != b.v);
    if (op == "<") return flag(a.v < b.v);
    if (op == "<=") return flag(a.v <= b.v);
    if (op == ">") return flag(a.v > b.v);
    if (op == ">=") return flag(a.v >= b.v);
    throw Error("unknown binary operator '" + op + "'");
  }
};

} // namespace symsc
