// SPDX-License-Identifier: Apache-2.0
#pragma once

// The concurrent mini-IR: declarations, inputs, and threads whose bodies are
// structured statement lists. Loops exist only until unroll_loops runs.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "symsc/expr.hpp"

namespace symsc {

struct SourceLoc {
  int line = 0;
  int column = 0;

  std::string str() const { return std::to_string(line) + ":" + std::to_string(column); }
  friend auto operator<=>(const SourceLoc &, const SourceLoc &) = default;
};

class ParseError : public Error {
public:
  ParseError(SourceLoc loc, const std::string &msg)
      : Error(loc.str() + ": " + msg), loc_(loc) {}
  SourceLoc loc() const { return loc_; }

private:
  SourceLoc loc_;
};

enum class Sensitivity { Derived, Secret, Public };

struct Declaration {
  std::string name;
  bool is_array = false;
  uint32_t elem_size = 1;
  uint64_t length = 1;
  std::optional<uint64_t> base; // nullopt: symbolic base
  std::optional<uint64_t> window; // symbolic bases only
  Sensitivity sensitivity = Sensitivity::Derived;
  uint64_t public_value = 0;
  std::vector<uint64_t> contents; // concrete table contents, may be empty
  SourceLoc loc;

  bool symbolic() const { return !base.has_value(); }
  uint64_t byte_size() const { return uint64_t{elem_size} * length; }
  unsigned value_width() const { return elem_size * 8; }
};

struct InputDecl {
  std::string name;
  unsigned width = 8;
  bool secret = true;
  uint64_t value = 0; // public inputs only
  SourceLoc loc;
};

struct IrExpr;
using IrExprPtr = std::shared_ptr<const IrExpr>;

struct IrExpr {
  enum class Kind { Literal, Name, Unary, Binary };
  Kind kind = Kind::Literal;
  uint64_t value = 0;
  std::string name; // Name: identifier; Unary/Binary: operator spelling
  IrExprPtr lhs, rhs;
  SourceLoc loc;

  static IrExprPtr literal(uint64_t v, SourceLoc loc = {}) {
    auto e = std::make_shared<IrExpr>();
    e->kind = Kind::Literal;
    e->value = v;
    e->loc = loc;
    return e;
  }
  static IrExprPtr ident(std::string n, SourceLoc loc = {}) {
    auto e = std::make_shared<IrExpr>();
    e->kind = Kind::Name;
    e->name = std::move(n);
    e->loc = loc;
    return e;
  }
  static IrExprPtr unary(std::string op, IrExprPtr a, SourceLoc loc = {}) {
    auto e = std::make_shared<IrExpr>();
    e->kind = Kind::Unary;
    e->name = std::move(op);
    e->lhs = std::move(a);
    e->loc = loc;
    return e;
  }
  static IrExprPtr binary(std::string op, IrExprPtr a, IrExprPtr b, SourceLoc loc = {}) {
    auto e = std::make_shared<IrExpr>();
    e->kind = Kind::Binary;
    e->name = std::move(op);
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    e->loc = loc;
    return e;
  }
};

/// Structural equality; source locations are ignored.
inline bool same_expr(const IrExprPtr &a, const IrExprPtr &b) {
  if (!a || !b)
    return !a && !b;
  return a->kind == b->kind && a->value == b->value && a->name == b->name &&
         same_expr(a->lhs, b->lhs) && same_expr(a->rhs, b->rhs);
}

struct Stmt;
using Block = std::vector<Stmt>;

struct AssignStmt {
  std::string reg;
  IrExprPtr value;
};
struct LoadStmt {
  std::string reg;
  std::string target;
  IrExprPtr index; // null for a scalar access written without brackets
};
struct StoreStmt {
  std::string target;
  IrExprPtr index;
  IrExprPtr value;
};
struct IfStmt {
  IrExprPtr cond;
  Block then_body;
  Block else_body;
};
struct ForStmt {
  std::string var;
  int64_t lo = 0;
  int64_t hi = 0;
  Block body;
};
struct WhileStmt {
  IrExprPtr cond;
  std::optional<uint32_t> bound;
  Block body;
};

struct Stmt {
  SourceLoc loc;
  std::variant<AssignStmt, LoadStmt, StoreStmt, IfStmt, ForStmt, WhileStmt> node;
};

struct Thread {
  int tid = 0;
  bool critical = false;
  bool adversary = false;
  Block body;
  SourceLoc loc;
};

struct Program {
  std::vector<Declaration> decls;
  std::vector<InputDecl> inputs;
  std::vector<Thread> threads;

  const Declaration *find_decl(const std::string &name) const {
    auto it = std::find_if(decls.begin(), decls.end(), [&](const auto &d) { return d.name == name; });
    return it == decls.end() ? nullptr : &*it;
  }
  const InputDecl *find_input(const std::string &name) const {
    auto it = std::find_if(inputs.begin(), inputs.end(), [&](const auto &d) { return d.name == name; });
    return it == inputs.end() ? nullptr : &*it;
  }
  const Thread *find_thread(int tid) const {
    auto it = std::find_if(threads.begin(), threads.end(), [&](const auto &t) { return t.tid == tid; });
    return it == threads.end() ? nullptr : &*it;
  }

  int critical_tid() const {
    for (const auto &t : threads)
      if (t.critical)
        return t.tid;
    throw Error("program has no critical thread");
  }

  bool has_symbolic_base() const {
    return std::any_of(decls.begin(), decls.end(), [](const auto &d) { return d.symbolic(); });
  }

  /// Name of the secret variable for one element of a secret declaration.
  static std::string element_var(const Declaration &d, uint64_t index) {
    if (!d.is_array)
      return d.name;
    return d.name + "[" + std::to_string(index) + "]";
  }

  /// Every secret variable with its width: secret inputs first, then
  /// elements of secret declarations, in declaration order.
  std::vector<std::pair<std::string, unsigned>> secret_inputs() const {
    std::vector<std::pair<std::string, unsigned>> out;
    for (const auto &in : inputs)
      if (in.secret)
        out.emplace_back(in.name, in.width);
    for (const auto &d : decls)
      if (d.sensitivity == Sensitivity::Secret)
        for (uint64_t i = 0; i < d.length; ++i)
          out.emplace_back(element_var(d, i), d.value_width());
    return out;
  }

  std::vector<std::pair<std::string, unsigned>> public_inputs() const {
    std::vector<std::pair<std::string, unsigned>> out;
    for (const auto &in : inputs)
      if (!in.secret)
        out.emplace_back(in.name, in.width);
    return out;
  }

  unsigned secret_bits() const {
    unsigned n = 0;
    for (const auto &[name, w] : secret_inputs())
      n += w;
    return n;
  }
};

inline bool same_block(const Block &a, const Block &b);

inline bool same_stmt(const Stmt &a, const Stmt &b) {
  if (a.node.index() != b.node.index())
    return false;
  return std::visit(
      [&](const auto &x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto &y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, AssignStmt>)
          return x.reg == y.reg && same_expr(x.value, y.value);
        else if constexpr (std::is_same_v<T, LoadStmt>)
          return x.reg == y.reg && x.target == y.target && same_expr(x.index, y.index);
        else if constexpr (std::is_same_v<T, StoreStmt>)
          return x.target == y.target && same_expr(x.index, y.index) && same_expr(x.value, y.value);
        else if constexpr (std::is_same_v<T, IfStmt>)
          return same_expr(x.cond, y.cond) && same_block(x.then_body, y.then_body) &&
                 same_block(x.else_body, y.else_body);
        else if constexpr (std::is_same_v<T, ForStmt>)
          return x.var == y.var && x.lo == y.lo && x.hi == y.hi && same_block(x.body, y.body);
        else
          return same_expr(x.cond, y.cond) && x.bound == y.bound && same_block(x.body, y.body);
      },
      a.node);
}

inline bool same_block(const Block &a, const Block &b) {
  if (a.size() != b.size())
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_stmt(a[i], b[i]))
      return false;
  return true;
}

/// Structural program equality, ignoring source locations.
inline bool same_program(const Program &a, const Program &b) {
  if (a.decls.size() != b.decls.size() || a.inputs.size() != b.inputs.size() ||
      a.threads.size() != b.threads.size())
    return false;
  for (size_t i = 0; i < a.decls.size(); ++i) {
    const auto &x = a.decls[i];
    const auto &y = b.decls[i];
    if (x.name != y.name || x.is_array != y.is_array || x.elem_size != y.elem_size ||
        x.length != y.length || x.base != y.base || x.window != y.window ||
        x.sensitivity != y.sensitivity || x.public_value != y.public_value || x.contents != y.contents)
      return false;
  }
  for (size_t i = 0; i < a.inputs.size(); ++i) {
    const auto &x = a.inputs[i];
    const auto &y = b.inputs[i];
    if (x.name != y.name || x.width != y.width || x.secret != y.secret || x.value != y.value)
      return false;
  }
  for (size_t i = 0; i < a.threads.size(); ++i) {
    const auto &x = a.threads[i];
    const auto &y = b.threads[i];
    if (x.tid != y.tid || x.critical != y.critical || x.adversary != y.adversary ||
        !same_block(x.body, y.body))
      return false;
  }
  return true;
}

inline std::string print_expr(const IrExprPtr &e) {
  switch (e->kind) {
  case IrExpr::Kind::Literal: return std::to_string(e->value);
  case IrExpr::Kind::Name: return e->name;
  case IrExpr::Kind::Unary: return e->name + "(" + print_expr(e->lhs) + ")";
  case IrExpr::Kind::Binary:
    return "(" + print_expr(e->lhs) + " " + e->name + " " + print_expr(e->rhs) + ")";
  }
  return {};
}

namespace detail {

inline void print_block(std::ostream &os, const Block &body, int depth) {
  const std::string pad(static_cast<size_t>(depth) * 2, ' ');
  for (const auto &s : body) {
    std::visit(
        [&](const auto &x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, AssignStmt>) {
            os << pad << x.reg << " := " << print_expr(x.value) << "\n";
          } else if constexpr (std::is_same_v<T, LoadStmt>) {
            os << pad << "load " << x.reg << ", " << x.target;
            if (x.index)
              os << "[" << print_expr(x.index) << "]";
            os << "\n";
          } else if constexpr (std::is_same_v<T, StoreStmt>) {
            os << pad << "store " << x.target;
            if (x.index)
              os << "[" << print_expr(x.index) << "]";
            os << ", " << print_expr(x.value) << "\n";
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            os << pad << "if (" << print_expr(x.cond) << ") {\n";
            print_block(os, x.then_body, depth + 1);
            if (x.else_body.empty()) {
              os << pad << "}\n";
            } else {
              os << pad << "} else {\n";
              print_block(os, x.else_body, depth + 1);
              os << pad << "}\n";
            }
          } else if constexpr (std::is_same_v<T, ForStmt>) {
            os << pad << "for " << x.var << " in " << x.lo << ".." << x.hi << " {\n";
            print_block(os, x.body, depth + 1);
            os << pad << "}\n";
          } else {
            os << pad << "while (" << print_expr(x.cond) << ")";
            if (x.bound)
              os << " bound " << *x.bound;
            os << " {\n";
            print_block(os, x.body, depth + 1);
            os << pad << "}\n";
          }
        },
        s.node);
  }
}

} // namespace detail

/// Renders a program in the textual grammar accepted by parse_program.
inline std::string print_program(const Program &p) {
  std::ostringstream os;
  for (const auto &d : p.decls) {
    if (d.is_array)
      os << "array " << d.name << " [" << d.length << "]";
    else
      os << "scalar " << d.name;
    os << " elem " << d.elem_size << " at ";
    if (d.base) {
      os << *d.base;
    } else {
      os << "symbolic";
      if (d.window)
        os << " window " << *d.window;
    }
    if (d.sensitivity == Sensitivity::Secret)
      os << " secret";
    else if (d.sensitivity == Sensitivity::Public)
      os << " public=" << d.public_value;
    if (!d.contents.empty()) {
      os << " init {";
      for (size_t i = 0; i < d.contents.size(); ++i)
        os << (i ? ", " : "") << d.contents[i];
      os << "}";
    }
    os << "\n";
  }
  for (const auto &in : p.inputs) {
    os << "input " << in.name << " width " << in.width;
    if (in.secret)
      os << " secret\n";
    else
      os << " public = " << in.value << "\n";
  }
  for (const auto &t : p.threads) {
    os << "thread " << t.tid;
    if (t.critical)
      os << " critical";
    if (t.adversary)
      os << " adversary";
    os << " {\n";
    detail::print_block(os, t.body, 1);
    os << "}\n";
  }
  return os.str();
}

} // namespace symsc
