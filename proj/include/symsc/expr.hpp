// SPDX-License-Identifier: Apache-2.0
#pragma once

// Fixed-width bitvector expressions, hash-consed into a DAG owned by an
// ExprContext. Builders fold constants and apply a handful of local
// rewrites, so structurally equal terms always share one node.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace symsc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr uint64_t mask_of(unsigned width) {
  return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1);
}

enum class Op : uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  And,
  Or,
  Xor,
  Shl,
  LShr,
  Not,
  Eq,
  Ult,
  Ule,
  Ite,
  ZExt,
  Extract,
};

struct ExprNode {
  Op op;
  unsigned width;
  uint64_t value; // Const: the value. Extract: the low bit.
  std::string name;
  std::array<const ExprNode *, 3> kids{};
  unsigned arity = 0;
  size_t id = 0;
  size_t hash = 0;
};

/// Lightweight handle to a node in an ExprContext.
class Expr {
public:
  Expr() = default;
  explicit Expr(const ExprNode *n) : n_(n) {}

  bool valid() const { return n_ != nullptr; }
  Op op() const { return n_->op; }
  unsigned width() const { return n_->width; }
  bool is_const() const { return n_->op == Op::Const; }
  bool is_var() const { return n_->op == Op::Var; }
  bool is_true() const { return is_const() && width() == 1 && value() == 1; }
  bool is_false() const { return is_const() && width() == 1 && value() == 0; }
  uint64_t value() const { return n_->value; }
  const std::string &name() const { return n_->name; }
  unsigned arity() const { return n_->arity; }
  Expr kid(unsigned i) const { return Expr(n_->kids[i]); }
  size_t id() const { return n_->id; }
  const ExprNode *node() const { return n_; }

  friend bool operator==(Expr a, Expr b) { return a.n_ == b.n_; }
  friend bool operator!=(Expr a, Expr b) { return a.n_ != b.n_; }
  friend bool operator<(Expr a, Expr b) { return a.id() < b.id(); }

private:
  const ExprNode *n_ = nullptr;
};

struct ExprHash {
  size_t operator()(Expr e) const { return std::hash<const void *>{}(e.node()); }
};

using Valuation = std::map<std::string, uint64_t>;

class ExprContext {
public:
  ExprContext() = default;
  ExprContext(const ExprContext &) = delete;
  ExprContext &operator=(const ExprContext &) = delete;

  size_t size() const { return nodes_.size(); }

  Expr constant(unsigned width, uint64_t v) {
    check_width(width);
    return intern(Op::Const, width, v & mask_of(width), {}, {});
  }
  Expr true_() { return constant(1, 1); }
  Expr false_() { return constant(1, 0); }
  Expr boolean(bool b) { return constant(1, b ? 1 : 0); }

  Expr var(const std::string &name, unsigned width) {
    check_width(width);
    if (name.empty())
      throw Error("variable name must not be empty");
    auto it = var_widths_.find(name);
    if (it != var_widths_.end() && it->second != width)
      throw Error("variable '" + name + "' redeclared with width " + std::to_string(width) +
                  " (was " + std::to_string(it->second) + ")");
    var_widths_.emplace(name, width);
    return intern(Op::Var, width, 0, name, {});
  }

  Expr add(Expr a, Expr b) {
    same_width(a, b, "add");
    if (a.is_const() && b.is_const())
      return constant(a.width(), a.value() + b.value());
    if (a.is_const())
      std::swap(a, b);
    if (b.is_const() && b.value() == 0)
      return a;
    // (x + c1) + c2 -> x + (c1 + c2)
    if (b.is_const() && a.op() == Op::Add && a.kid(1).is_const())
      return add(a.kid(0), constant(a.width(), a.kid(1).value() + b.value()));
    if (!b.is_const() && b < a)
      std::swap(a, b);
    return make(Op::Add, a.width(), {a, b});
  }

  Expr sub(Expr a, Expr b) {
    same_width(a, b, "sub");
    if (a.is_const() && b.is_const())
      return constant(a.width(), a.value() - b.value());
    if (b.is_const())
      return add(a, constant(a.width(), uint64_t{0} - b.value()));
    if (a == b)
      return constant(a.width(), 0);
    return make(Op::Sub, a.width(), {a, b});
  }

  Expr mul(Expr a, Expr b) {
    same_width(a, b, "mul");
    if (a.is_const() && b.is_const())
      return constant(a.width(), a.value() * b.value());
    if (a.is_const())
      std::swap(a, b);
    if (b.is_const() && b.value() == 0)
      return b;
    if (b.is_const() && b.value() == 1)
      return a;
    if (!b.is_const() && b < a)
      std::swap(a, b);
    return make(Op::Mul, a.width(), {a, b});
  }

  Expr bit_and(Expr a, Expr b) {
    same_width(a, b, "and");
    if (a.is_const() && b.is_const())
      return constant(a.width(), a.value() & b.value());
    if (a.is_const())
      std::swap(a, b);
    if (b.is_const() && b.value() == 0)
      return b;
    if (b.is_const() && b.value() == mask_of(a.width()))
      return a;
    if (a == b)
      return a;
    if (!b.is_const() && b < a)
      std::swap(a, b);
    return make(Op::And, a.width(), {a, b});
  }

  Expr bit_or(Expr a, Expr b) {
    same_width(a, b, "or");
    if (a.is_const() && b.is_const())
      return constant(a.width(), a.value() | b.value());
    if (a.is_const())
      std::swap(a, b);
    if (b.is_const() && b.value() == 0)
      return a;
    if (b.is_const() && b.value() == mask_of(a.width()))
      return b;
    if (a == b)
      return a;
    if (!b.is_const() && b < a)
      std::swap(a, b);
    return make(Op::Or, a.width(), {a, b});
  }

  Expr bit_xor(Expr a, Expr b) {
    same_width(a, b, "xor");
    if (a.is_const() && b.is_const())
      return constant(a.width(), a.value() ^ b.value());
    if (a.is_const())
      std::swap(a, b);
    if (b.is_const() && b.value() == 0)
      return a;
    if (a == b)
      return constant(a.width(), 0);
    if (!b.is_const() && b < a)
      std::swap(a, b);
    return make(Op::Xor, a.width(), {a, b});
  }

  Expr shl(Expr a, Expr amount) {
    same_width(a, amount, "shl");
    if (amount.is_const()) {
      if (amount.value() >= a.width())
        return constant(a.width(), 0);
      if (amount.value() == 0)
        return a;
      if (a.is_const())
        return constant(a.width(), a.value() << amount.value());
    }
    return make(Op::Shl, a.width(), {a, amount});
  }

  Expr lshr(Expr a, Expr amount) {
    same_width(a, amount, "lshr");
    if (amount.is_const()) {
      if (amount.value() >= a.width())
        return constant(a.width(), 0);
      if (amount.value() == 0)
        return a;
      if (a.is_const())
        return constant(a.width(), a.value() >> amount.value());
    }
    return make(Op::LShr, a.width(), {a, amount});
  }

  Expr bit_not(Expr a) {
    if (a.is_const())
      return constant(a.width(), ~a.value());
    if (a.op() == Op::Not)
      return a.kid(0);
    return make(Op::Not, a.width(), {a});
  }

  Expr neg(Expr a) { return sub(constant(a.width(), 0), a); }

  Expr eq(Expr a, Expr b) {
    same_width(a, b, "eq");
    if (a == b)
      return true_();
    if (a.is_const() && b.is_const())
      return boolean(a.value() == b.value());
    if (a.is_const())
      std::swap(a, b);
    if (b.is_const()) {
      if (a.width() == 1)
        return b.value() ? a : bit_not(a);
      // x + c1 == c2  ->  x == c2 - c1
      if (a.op() == Op::Add && a.kid(1).is_const())
        return eq(a.kid(0), constant(a.width(), b.value() - a.kid(1).value()));
      if (a.op() == Op::ZExt) {
        Expr inner = a.kid(0);
        if (b.value() > mask_of(inner.width()))
          return false_();
        return eq(inner, constant(inner.width(), b.value()));
      }
    }
    // x + c1 == x + c2
    if (a.op() == Op::Add && b.op() == Op::Add && a.kid(1).is_const() && b.kid(1).is_const() &&
        a.kid(0) == b.kid(0))
      return boolean(a.kid(1).value() == b.kid(1).value());
    if (a.op() == Op::ZExt && b.op() == Op::ZExt && a.kid(0).width() == b.kid(0).width())
      return eq(a.kid(0), b.kid(0));
    if (b < a)
      std::swap(a, b);
    return make(Op::Eq, 1, {a, b});
  }

  Expr ne(Expr a, Expr b) { return bit_not(eq(a, b)); }

  Expr ult(Expr a, Expr b) {
    same_width(a, b, "ult");
    if (a == b)
      return false_();
    if (a.is_const() && b.is_const())
      return boolean(a.value() < b.value());
    if (b.is_const() && b.value() == 0)
      return false_();
    if (a.is_const() && a.value() == mask_of(a.width()))
      return false_();
    return make(Op::Ult, 1, {a, b});
  }

  Expr ule(Expr a, Expr b) {
    same_width(a, b, "ule");
    if (a == b)
      return true_();
    if (a.is_const() && b.is_const())
      return boolean(a.value() <= b.value());
    if (a.is_const() && a.value() == 0)
      return true_();
    if (b.is_const() && b.value() == mask_of(b.width()))
      return true_();
    return make(Op::Ule, 1, {a, b});
  }

  Expr ugt(Expr a, Expr b) { return ult(b, a); }
  Expr uge(Expr a, Expr b) { return ule(b, a); }

  Expr ite(Expr c, Expr t, Expr f) {
    if (c.width() != 1)
      throw Error("ite condition must have width 1");
    same_width(t, f, "ite");
    if (c.is_const())
      return c.value() ? t : f;
    if (t == f)
      return t;
    if (t.width() == 1 && t.is_const() && f.is_const())
      return t.value() ? c : bit_not(c);
    if (c.op() == Op::Not)
      return ite(c.kid(0), f, t);
    return make(Op::Ite, t.width(), {c, t, f});
  }

  Expr land(Expr a, Expr b) {
    bool_only(a);
    bool_only(b);
    return bit_and(a, b);
  }
  Expr lor(Expr a, Expr b) {
    bool_only(a);
    bool_only(b);
    return bit_or(a, b);
  }
  Expr lnot(Expr a) {
    bool_only(a);
    return bit_not(a);
  }
  Expr lxor(Expr a, Expr b) {
    bool_only(a);
    bool_only(b);
    return bit_xor(a, b);
  }

  Expr land(std::span<const Expr> xs) {
    Expr acc = true_();
    for (Expr x : xs)
      acc = land(acc, x);
    return acc;
  }
  Expr lor(std::span<const Expr> xs) {
    Expr acc = false_();
    for (Expr x : xs)
      acc = lor(acc, x);
    return acc;
  }

  Expr zext(Expr a, unsigned width) {
    check_width(width);
    if (width < a.width())
      throw Error("zext to a narrower width");
    if (width == a.width())
      return a;
    if (a.is_const())
      return constant(width, a.value());
    if (a.op() == Op::ZExt)
      return zext(a.kid(0), width);
    return make(Op::ZExt, width, {a});
  }

  Expr extract(Expr a, unsigned hi, unsigned lo) {
    if (hi < lo || hi >= a.width())
      throw Error("extract bounds out of range");
    unsigned w = hi - lo + 1;
    if (w == a.width())
      return a;
    if (a.is_const())
      return constant(w, a.value() >> lo);
    if (a.op() == Op::ZExt) {
      unsigned inner = a.kid(0).width();
      if (lo >= inner)
        return constant(w, 0);
      if (hi < inner)
        return extract(a.kid(0), hi, lo);
    }
    if (a.op() == Op::Extract)
      return extract(a.kid(0), hi + static_cast<unsigned>(a.value()),
                     lo + static_cast<unsigned>(a.value()));
    const ExprNode *k = a.node();
    return intern(Op::Extract, w, lo, {}, {k}, 1);
  }

  /// Zero-extends or truncates to the requested width.
  Expr resize(Expr a, unsigned width) {
    if (width == a.width())
      return a;
    if (width > a.width())
      return zext(a, width);
    return extract(a, width - 1, 0);
  }

  /// Rebuilds `e` bottom-up, replacing variables according to `f`.
  /// `f` returns an invalid Expr to keep a variable unchanged.
  Expr rewrite_vars(Expr e, const std::function<Expr(Expr)> &f) {
    std::unordered_map<const ExprNode *, Expr> memo;
    return rewrite_rec(e, f, memo);
  }

  Expr substitute(Expr e, const std::map<std::string, Expr> &bindings) {
    return rewrite_vars(e, [&](Expr v) {
      auto it = bindings.find(v.name());
      return it == bindings.end() ? Expr{} : it->second;
    });
  }

  Expr substitute(Expr e, const Valuation &values) {
    return rewrite_vars(e, [&](Expr v) {
      auto it = values.find(v.name());
      return it == values.end() ? Expr{} : constant(v.width(), it->second);
    });
  }

  /// Rebuilds a node with new children through the simplifying builders.
  Expr rebuild(Expr e, std::span<const Expr> k) {
    switch (e.op()) {
    case Op::Const:
    case Op::Var:
      return e;
    case Op::Add: return add(k[0], k[1]);
    case Op::Sub: return sub(k[0], k[1]);
    case Op::Mul: return mul(k[0], k[1]);
    case Op::And: return bit_and(k[0], k[1]);
    case Op::Or: return bit_or(k[0], k[1]);
    case Op::Xor: return bit_xor(k[0], k[1]);
    case Op::Shl: return shl(k[0], k[1]);
    case Op::LShr: return lshr(k[0], k[1]);
    case Op::Not: return bit_not(k[0]);
    case Op::Eq: return eq(k[0], k[1]);
    case Op::Ult: return ult(k[0], k[1]);
    case Op::Ule: return ule(k[0], k[1]);
    case Op::Ite: return ite(k[0], k[1], k[2]);
    case Op::ZExt: return zext(k[0], e.width());
    case Op::Extract:
      return extract(k[0], static_cast<unsigned>(e.value()) + e.width() - 1,
                     static_cast<unsigned>(e.value()));
    }
    throw Error("unknown expression kind");
  }

private:
  struct NodePtrHash {
    size_t operator()(const ExprNode *n) const { return n->hash; }
  };
  struct NodePtrEq {
    bool operator()(const ExprNode *a, const ExprNode *b) const {
      return a->op == b->op && a->width == b->width && a->value == b->value &&
             a->arity == b->arity && a->kids == b->kids && a->name == b->name;
    }
  };

  static void check_width(unsigned w) {
    if (w == 0 || w > 64)
      throw Error("bitvector width must be in [1, 64], got " + std::to_string(w));
  }
  static void same_width(Expr a, Expr b, const char *what) {
    if (a.width() != b.width())
      throw Error(std::string("width mismatch in ") + what + ": " + std::to_string(a.width()) +
                  " vs " + std::to_string(b.width()));
  }
  static void bool_only(Expr a) {
    if (a.width() != 1)
      throw Error("boolean connective applied to a non-boolean expression");
  }

  Expr make(Op op, unsigned width, std::initializer_list<Expr> kids) {
    std::array<const ExprNode *, 3> ks{};
    unsigned n = 0;
    for (Expr k : kids)
      ks[n++] = k.node();
    return intern(op, width, 0, {}, ks, n);
  }

  Expr intern(Op op, unsigned width, uint64_t value, const std::string &name,
              std::array<const ExprNode *, 3> kids, unsigned arity = 0) {
    ExprNode probe{op, width, value, name, kids, arity, 0, 0};
    size_t h = std::hash<int>{}(static_cast<int>(op));
    auto mix = [&h](size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(width);
    mix(std::hash<uint64_t>{}(value));
    mix(std::hash<std::string>{}(name));
    for (unsigned i = 0; i < arity; ++i)
      mix(kids[i]->id);
    probe.hash = h;
    if (auto it = table_.find(&probe); it != table_.end())
      return Expr(*it);
    probe.id = nodes_.size();
    nodes_.push_back(std::move(probe));
    const ExprNode *stored = &nodes_.back();
    table_.insert(stored);
    return Expr(stored);
  }

  Expr rewrite_rec(Expr e, const std::function<Expr(Expr)> &f,
                   std::unordered_map<const ExprNode *, Expr> &memo) {
    if (auto it = memo.find(e.node()); it != memo.end())
      return it->second;
    Expr out;
    if (e.is_var()) {
      Expr r = f(e);
      if (r.valid() && r.width() != e.width())
        throw Error("substitution for '" + e.name() + "' changes its width");
      out = r.valid() ? r : e;
    } else if (e.is_const()) {
      out = e;
    } else {
      std::array<Expr, 3> ks;
      bool changed = false;
      for (unsigned i = 0; i < e.arity(); ++i) {
        ks[i] = rewrite_rec(e.kid(i), f, memo);
        changed |= ks[i] != e.kid(i);
      }
      out = changed ? rebuild(e, std::span<const Expr>(ks.data(), e.arity())) : e;
    }
    memo.emplace(e.node(), out);
    return out;
  }

  std::deque<ExprNode> nodes_;
  std::unordered_set<const ExprNode *, NodePtrHash, NodePtrEq> table_;
  std::unordered_map<std::string, unsigned> var_widths_;
};

/// Applies one operator to concrete operands, with the same semantics the
/// SMT-LIB2 QF_BV encoding uses (shifts past the width yield zero).
inline uint64_t apply_op(Op op, unsigned width, uint64_t extra, std::span<const uint64_t> k,
                         std::span<const unsigned> kid_widths) {
  const uint64_t m = mask_of(width);
  switch (op) {
  case Op::Add: return (k[0] + k[1]) & m;
  case Op::Sub: return (k[0] - k[1]) & m;
  case Op::Mul: return (k[0] * k[1]) & m;
  case Op::And: return k[0] & k[1];
  case Op::Or: return k[0] | k[1];
  case Op::Xor: return k[0] ^ k[1];
  case Op::Shl: return k[1] >= width ? 0 : (k[0] << k[1]) & m;
  case Op::LShr: return k[1] >= width ? 0 : k[0] >> k[1];
  case Op::Not: return ~k[0] & m;
  case Op::Eq: return k[0] == k[1] ? 1 : 0;
  case Op::Ult: return k[0] < k[1] ? 1 : 0;
  case Op::Ule: return k[0] <= k[1] ? 1 : 0;
  case Op::Ite: return k[0] ? k[1] : k[2];
  case Op::ZExt: return k[0];
  case Op::Extract: return (k[0] >> extra) & m;
  case Op::Const:
  case Op::Var: break;
  }
  (void)kid_widths;
  throw Error("apply_op on a leaf");
}

/// Nodes reachable from `roots`, children before parents.
inline std::vector<Expr> topo_order(std::span<const Expr> roots) {
  std::vector<Expr> order;
  std::unordered_set<const ExprNode *> seen;
  std::vector<std::pair<Expr, unsigned>> stack;
  for (Expr r : roots) {
    if (!seen.insert(r.node()).second)
      continue;
    stack.emplace_back(r, 0);
    while (!stack.empty()) {
      auto &[e, next] = stack.back();
      if (next < e.arity()) {
        Expr k = e.kid(next++);
        if (seen.insert(k.node()).second)
          stack.emplace_back(k, 0);
      } else {
        order.push_back(e);
        stack.pop_back();
      }
    }
  }
  return order;
}

inline std::vector<Expr> topo_order(Expr root) { return topo_order(std::span<const Expr>(&root, 1)); }

/// Free variables with their widths, sorted by name.
inline std::map<std::string, unsigned> free_vars(std::span<const Expr> roots) {
  std::map<std::string, unsigned> out;
  for (Expr e : topo_order(roots))
    if (e.is_var())
      out.emplace(e.name(), e.width());
  return out;
}
inline std::map<std::string, unsigned> free_vars(Expr e) {
  return free_vars(std::span<const Expr>(&e, 1));
}

/// A flattened expression for fast repeated evaluation: one slot per node,
/// evaluated in topological order. Variables are bound by position.
class CompiledExpr {
public:
  CompiledExpr() = default;
  CompiledExpr(std::span<const Expr> roots, const std::vector<std::string> &var_order) {
    std::unordered_map<std::string, size_t> var_pos;
    for (size_t i = 0; i < var_order.size(); ++i)
      var_pos.emplace(var_order[i], i);
    std::unordered_map<const ExprNode *, uint32_t> slot;
    for (Expr e : topo_order(roots)) {
      Step s;
      s.op = e.op();
      s.width = e.width();
      s.extra = e.value();
      if (e.is_var()) {
        auto it = var_pos.find(e.name());
        if (it == var_pos.end())
          throw Error("unbound variable '" + e.name() + "' in compiled expression");
        s.extra = it->second;
      }
      for (unsigned i = 0; i < e.arity(); ++i)
        s.kids[i] = slot.at(e.kid(i).node());
      s.arity = e.arity();
      slot.emplace(e.node(), static_cast<uint32_t>(steps_.size()));
      steps_.push_back(s);
    }
    for (Expr r : roots)
      roots_.push_back(slot.at(r.node()));
    scratch_.resize(steps_.size());
  }

  /// Evaluates every root; returns a view valid until the next call.
  std::span<const uint64_t> eval(std::span<const uint64_t> vars) {
    for (size_t i = 0; i < steps_.size(); ++i) {
      const Step &s = steps_[i];
      switch (s.op) {
      case Op::Const: scratch_[i] = s.extra; break;
      case Op::Var: scratch_[i] = vars[s.extra] & mask_of(s.width); break;
      default: {
        std::array<uint64_t, 3> k{};
        for (unsigned j = 0; j < s.arity; ++j)
          k[j] = scratch_[s.kids[j]];
        scratch_[i] = apply_op(s.op, s.width, s.extra, std::span<const uint64_t>(k.data(), s.arity), {});
      }
      }
    }
    out_.resize(roots_.size());
    for (size_t i = 0; i < roots_.size(); ++i)
      out_[i] = scratch_[roots_[i]];
    return out_;
  }

  size_t num_steps() const { return steps_.size(); }

private:
  struct Step {
    Op op;
    unsigned width;
    uint64_t extra;
    std::array<uint32_t, 3> kids{};
    unsigned arity = 0;
  };
  std::vector<Step> steps_;
  std::vector<uint32_t> roots_;
  std::vector<uint64_t> scratch_;
  std::vector<uint64_t> out_;
};

/// Evaluates `e` under `values`; every free variable must be bound.
inline uint64_t evaluate(Expr e, const Valuation &values) {
  std::unordered_map<const ExprNode *, uint64_t> memo;
  for (Expr n : topo_order(e)) {
    uint64_t v = 0;
    if (n.is_const()) {
      v = n.value();
    } else if (n.is_var()) {
      auto it = values.find(n.name());
      if (it == values.end())
        throw Error("no value for variable '" + n.name() + "'");
      v = it->second & mask_of(n.width());
    } else {
      std::array<uint64_t, 3> k{};
      for (unsigned i = 0; i < n.arity(); ++i)
        k[i] = memo.at(n.kid(i).node());
      v = apply_op(n.op(), n.width(), n.value(), std::span<const uint64_t>(k.data(), n.arity()), {});
    }
    memo.emplace(n.node(), v);
  }
  return memo.at(e.node());
}

inline std::string to_string(Expr e) {
  auto bin = [&](const char *sym) {
    return "(" + to_string(e.kid(0)) + " " + sym + " " + to_string(e.kid(1)) + ")";
  };
  switch (e.op()) {
  case Op::Const:
    if (e.width() == 1)
      return e.value() ? "true" : "false";
    return std::to_string(e.value());
  case Op::Var: return e.name();
  case Op::Add: return bin("+");
  case Op::Sub: return bin("-");
  case Op::Mul: return bin("*");
  case Op::And: return bin(e.width() == 1 ? "&&" : "&");
  case Op::Or: return bin(e.width() == 1 ? "||" : "|");
  case Op::Xor: return bin("^");
  case Op::Shl: return bin("<<");
  case Op::LShr: return bin(">>");
  case Op::Not: return (e.width() == 1 ? "!" : "~") + to_string(e.kid(0));
  case Op::Eq: return bin("==");
  case Op::Ult: return bin("<");
  case Op::Ule: return bin("<=");
  case Op::Ite:
    return "(" + to_string(e.kid(0)) + " ? " + to_string(e.kid(1)) + " : " + to_string(e.kid(2)) + ")";
  case Op::ZExt: return "zext" + std::to_string(e.width()) + "(" + to_string(e.kid(0)) + ")";
  case Op::Extract:
    return to_string(e.kid(0)) + "[" + std::to_string(e.value() + e.width() - 1) + ":" +
           std::to_string(e.value()) + "]";
  }
  return "?";
}

} // namespace symsc
