// SPDX-License-Identifier: Apache-2.0
#pragma once

// Text -> Program, plus the two whole-program transforms that run before
// analysis: bounded loop unrolling and adversary-thread synthesis.

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "symsc/cache_config.hpp"
#include "symsc/ir.hpp"

namespace symsc {

namespace detail {

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  uint64_t number = 0;
  SourceLoc loc;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Token::Kind::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
        t.kind = Token::Kind::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Token::Kind::Number;
        t.number = read_number(t.loc, t.text);
      } else {
        static constexpr std::string_view two[] = {":=", "==", "!=", "<=", ">=", "<<", ">>", ".."};
        t.kind = Token::Kind::Punct;
        for (auto p : two) {
          if (src_.substr(pos_, 2) == p) {
            t.text = std::string(p);
            advance();
            advance();
            break;
          }
        }
        if (t.text.empty()) {
          if (std::string_view("{}[](),;=+-&|^<>*~!").find(c) == std::string_view::npos)
            throw ParseError(t.loc, std::string("unexpected character '") + c + "'");
          t.text = std::string(1, c);
          advance();
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  uint64_t read_number(SourceLoc loc, std::string &text) {
    size_t start = pos_;
    int base = 10;
    if (src_.substr(pos_, 2) == "0x" || src_.substr(pos_, 2) == "0X") {
      base = 16;
      advance();
      advance();
    }
    size_t digits = pos_;
    while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_])))
      advance();
    text = std::string(src_.substr(start, pos_ - start));
    std::string_view body = src_.substr(digits, pos_ - digits);
    if (body.empty())
      throw ParseError(loc, "malformed number '" + text + "'");
    uint64_t v = 0;
    for (char d : body) {
      int dv = std::isdigit(static_cast<unsigned char>(d)) ? d - '0'
                                                          : std::tolower(static_cast<unsigned char>(d)) - 'a' + 10;
      if (dv >= base)
        throw ParseError(loc, "malformed number '" + text + "'");
      if (v > (~uint64_t{0} - static_cast<uint64_t>(dv)) / static_cast<uint64_t>(base))
        throw ParseError(loc, "number '" + text + "' does not fit in 64 bits");
      v = v * static_cast<uint64_t>(base) + static_cast<uint64_t>(dv);
    }
    return v;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    Program p;
    while (!at_end()) {
      const Token &t = peek();
      if (is_word("array") || is_word("scalar"))
        p.decls.push_back(parse_decl());
      else if (is_word("input"))
        p.inputs.push_back(parse_input());
      else if (is_word("thread"))
        p.threads.push_back(parse_thread());
      else
        throw ParseError(t.loc, "expected 'array', 'scalar', 'input' or 'thread', found '" + t.text + "'");
    }
    return p;
  }

private:
  const Token &peek(size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is_word(std::string_view w, size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Ident && peek(ahead).text == w;
  }
  bool is_punct(std::string_view p, size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Punct && peek(ahead).text == p;
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1)
      ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string &what) const {
    const Token &t = peek();
    std::string found = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.loc, "expected " + what + ", found " + found);
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p))
      fail("'" + std::string(p) + "'");
    next();
  }
  void expect_word(std::string_view w) {
    if (!is_word(w))
      fail("'" + std::string(w) + "'");
    next();
  }
  std::string ident(const char *what) {
    if (peek().kind != Token::Kind::Ident)
      fail(what);
    return next().text;
  }
  uint64_t number(const char *what) {
    if (peek().kind != Token::Kind::Number)
      fail(what);
    return next().number;
  }
  bool accept_punct(std::string_view p) {
    if (!is_punct(p))
      return false;
    next();
    return true;
  }

  Declaration parse_decl() {
    Declaration d;
    d.loc = peek().loc;
    d.is_array = next().text == "array";
    d.name = ident("declaration name");
    if (d.is_array) {
      expect_punct("[");
      d.length = number("array length");
      expect_punct("]");
    }
    expect_word("elem");
    d.elem_size = static_cast<uint32_t>(number("element size"));
    expect_word("at");
    if (is_word("symbolic")) {
      next();
      if (is_word("window")) {
        next();
        d.window = number("window size");
      }
    } else {
      d.base = number("base address or 'symbolic'");
    }
    for (;;) {
      if (is_word("secret")) {
        next();
        d.sensitivity = Sensitivity::Secret;
      } else if (is_word("public")) {
        next();
        expect_punct("=");
        d.sensitivity = Sensitivity::Public;
        d.public_value = number("public value");
      } else if (is_word("init")) {
        next();
        expect_punct("{");
        if (!is_punct("}")) {
          do {
            d.contents.push_back(number("table value"));
          } while (accept_punct(","));
        }
        expect_punct("}");
      } else {
        break;
      }
    }
    return d;
  }

  InputDecl parse_input() {
    InputDecl in;
    in.loc = next().loc;
    in.name = ident("input name");
    expect_word("width");
    in.width = static_cast<unsigned>(number("bit width"));
    if (is_word("secret")) {
      next();
      in.secret = true;
    } else if (is_word("public")) {
      next();
      expect_punct("=");
      in.secret = false;
      in.value = number("public value");
    } else {
      fail("'secret' or 'public'");
    }
    return in;
  }

  Thread parse_thread() {
    Thread t;
    t.loc = next().loc;
    t.tid = static_cast<int>(number("thread id"));
    for (;;) {
      if (is_word("critical")) {
        next();
        t.critical = true;
      } else if (is_word("adversary")) {
        next();
        t.adversary = true;
      } else {
        break;
      }
    }
    t.body = parse_block();
    return t;
  }

  Block parse_block() {
    expect_punct("{");
    Block body;
    while (!is_punct("}")) {
      if (at_end())
        fail("'}'");
      if (accept_punct(";"))
        continue;
      body.push_back(parse_stmt());
    }
    next();
    return body;
  }

  Stmt parse_stmt() {
    Stmt s;
    s.loc = peek().loc;
    if (is_word("load")) {
      next();
      LoadStmt l;
      l.reg = ident("destination register");
      expect_punct(",");
      l.target = ident("memory name");
      if (accept_punct("[")) {
        l.index = parse_expr();
        expect_punct("]");
      }
      s.node = std::move(l);
    } else if (is_word("store")) {
      next();
      StoreStmt st;
      st.target = ident("memory name");
      if (accept_punct("[")) {
        st.index = parse_expr();
        expect_punct("]");
      }
      expect_punct(",");
      st.value = parse_expr();
      s.node = std::move(st);
    } else if (is_word("if")) {
      next();
      IfStmt i;
      i.cond = parse_expr();
      i.then_body = parse_block();
      if (is_word("else")) {
        next();
        if (is_word("if")) {
          i.else_body.push_back(parse_stmt());
        } else {
          i.else_body = parse_block();
        }
      }
      s.node = std::move(i);
    } else if (is_word("for")) {
      next();
      ForStmt f;
      f.var = ident("loop variable");
      expect_word("in");
      bool neg_lo = accept_punct("-");
      f.lo = static_cast<int64_t>(number("loop lower bound")) * (neg_lo ? -1 : 1);
      expect_punct("..");
      bool neg_hi = accept_punct("-");
      f.hi = static_cast<int64_t>(number("loop upper bound")) * (neg_hi ? -1 : 1);
      f.body = parse_block();
      s.node = std::move(f);
    } else if (is_word("while")) {
      next();
      WhileStmt w;
      w.cond = parse_expr();
      if (is_word("bound")) {
        next();
        w.bound = static_cast<uint32_t>(number("loop bound"));
      }
      w.body = parse_block();
      s.node = std::move(w);
    } else if (peek().kind == Token::Kind::Ident && is_punct(":=", 1)) {
      AssignStmt a;
      a.reg = next().text;
      next();
      a.value = parse_expr();
      s.node = std::move(a);
    } else {
      fail("a statement");
    }
    return s;
  }

  // Precedence climbing, C-like: | ^ & (== !=) (< <= > >=) (<< >>) (+ -) *
  static int precedence(const std::string &op) {
    static const std::map<std::string, int> table = {
        {"|", 1},  {"^", 2},  {"&", 3},  {"==", 4}, {"!=", 4}, {"<", 5},  {"<=", 5},
        {">", 5},  {">=", 5}, {"<<", 6}, {">>", 6}, {"+", 7},  {"-", 7},  {"*", 8},
    };
    auto it = table.find(op);
    return it == table.end() ? -1 : it->second;
  }

  IrExprPtr parse_expr(int min_prec = 1) {
    IrExprPtr lhs = parse_unary();
    for (;;) {
      const Token &t = peek();
      if (t.kind != Token::Kind::Punct)
        return lhs;
      int prec = precedence(t.text);
      if (prec < min_prec)
        return lhs;
      Token op = next();
      IrExprPtr rhs = parse_expr(prec + 1);
      lhs = IrExpr::binary(op.text, lhs, rhs, op.loc);
    }
  }

  IrExprPtr parse_unary() {
    const Token &t = peek();
    if (t.kind == Token::Kind::Punct && (t.text == "-" || t.text == "~" || t.text == "!")) {
      Token op = next();
      return IrExpr::unary(op.text, parse_unary(), op.loc);
    }
    if (accept_punct("(")) {
      IrExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Token::Kind::Number) {
      Token n = next();
      return IrExpr::literal(n.number, n.loc);
    }
    if (t.kind == Token::Kind::Ident) {
      Token n = next();
      if (is_punct("["))
        throw ParseError(n.loc, "array element '" + n.text + "[...]' cannot appear inside an expression; load it first");
      return IrExpr::ident(n.text, n.loc);
    }
    fail("an expression");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

inline bool is_keyword(const std::string &s) {
  static const std::set<std::string> kw = {"array", "scalar", "input",  "thread", "critical", "adversary",
                                           "load",  "store",  "if",     "else",   "for",      "in",
                                           "while", "bound",  "elem",   "at",     "symbolic", "window",
                                           "secret", "public", "init",  "width"};
  return kw.count(s) > 0;
}

/// Checks names and layout. Registers are declared by their first
/// assignment in program order; loop variables are scoped to their body.
class Validator {
public:
  explicit Validator(const Program &p) : p_(p) {}

  void run() {
    std::map<std::string, SourceLoc> names;
    auto claim = [&](const std::string &n, SourceLoc loc) {
      if (is_keyword(n))
        throw ParseError(loc, "'" + n + "' is a reserved word");
      auto [it, fresh] = names.emplace(n, loc);
      if (!fresh)
        throw ParseError(loc, "duplicate declaration of '" + n + "' (first declared at " + it->second.str() + ")");
    };
    for (const auto &d : p_.decls) {
      claim(d.name, d.loc);
      check_decl(d);
    }
    for (const auto &in : p_.inputs) {
      claim(in.name, in.loc);
      if (in.width == 0 || in.width > 64)
        throw ParseError(in.loc, "input '" + in.name + "' width must be in [1, 64]");
      if (!in.secret && in.value > mask_of(in.width))
        throw ParseError(in.loc, "public value of '" + in.name + "' does not fit in " + std::to_string(in.width) + " bits");
    }
    check_overlaps();

    std::set<int> tids;
    int critical = 0;
    for (const auto &t : p_.threads) {
      if (!tids.insert(t.tid).second)
        throw ParseError(t.loc, "duplicate thread id " + std::to_string(t.tid));
      if (t.critical && t.adversary)
        throw ParseError(t.loc, "a thread cannot be both critical and adversary");
      critical += t.critical ? 1 : 0;
      std::set<std::string> regs;
      std::vector<std::string> loops;
      check_block(t.body, regs, loops);
    }
    if (p_.threads.empty())
      throw ParseError({1, 1}, "program has no threads");
    if (critical != 1)
      throw ParseError(p_.threads.front().loc,
                       "exactly one thread must be marked critical (found " + std::to_string(critical) + ")");
  }

private:
  void check_decl(const Declaration &d) const {
    if (d.elem_size == 0 || d.elem_size > 8 || (d.elem_size & (d.elem_size - 1)) != 0)
      throw ParseError(d.loc, "element size of '" + d.name + "' must be 1, 2, 4 or 8 bytes");
    if (d.length == 0)
      throw ParseError(d.loc, "'" + d.name + "' must have at least one element");
    if (d.base && *d.base % d.elem_size != 0)
      throw ParseError(d.loc, "base of '" + d.name + "' is not a multiple of its element size");
    if (d.base && *d.base + d.byte_size() > (uint64_t{1} << 32))
      throw ParseError(d.loc, "'" + d.name + "' does not fit in the 32-bit address space");
    if (!d.base && d.sensitivity == Sensitivity::Secret)
      throw ParseError(d.loc, "a symbolic-base declaration cannot hold secret data");
    if (d.window && (*d.window == 0 || *d.window > (uint64_t{1} << 32)))
      throw ParseError(d.loc, "window of '" + d.name + "' must be in (0, 2^32]");
    if (d.contents.size() > d.length)
      throw ParseError(d.loc, "'" + d.name + "' has more initial values than elements");
    if (!d.contents.empty() && d.sensitivity != Sensitivity::Derived)
      throw ParseError(d.loc, "'" + d.name + "' cannot have both contents and a secret/public annotation");
    for (uint64_t v : d.contents)
      if (v > mask_of(d.value_width()))
        throw ParseError(d.loc, "initial value " + std::to_string(v) + " does not fit an element of '" + d.name + "'");
  }

  void check_overlaps() const {
    for (size_t i = 0; i < p_.decls.size(); ++i) {
      const auto &a = p_.decls[i];
      if (!a.base)
        continue;
      for (size_t j = i + 1; j < p_.decls.size(); ++j) {
        const auto &b = p_.decls[j];
        if (!b.base)
          continue;
        uint64_t a_end = *a.base + a.byte_size();
        uint64_t b_end = *b.base + b.byte_size();
        if (*a.base < b_end && *b.base < a_end)
          throw ParseError(b.loc, "declarations '" + a.name + "' and '" + b.name + "' overlap in memory");
      }
    }
  }

  void check_value_name(const std::string &n, SourceLoc loc, const std::set<std::string> &regs,
                        const std::vector<std::string> &loops) const {
    if (std::find(loops.begin(), loops.end(), n) != loops.end() || regs.count(n) || p_.find_input(n))
      return;
    if (const Declaration *d = p_.find_decl(n)) {
      if (!d->is_array && d->sensitivity != Sensitivity::Derived)
        return;
      throw ParseError(loc, "'" + n + "' names memory; load it into a register first");
    }
    throw ParseError(loc, "reference to undeclared identifier '" + n + "'");
  }

  void check_expr(const IrExprPtr &e, const std::set<std::string> &regs, const std::vector<std::string> &loops) const {
    if (!e)
      return;
    if (e->kind == IrExpr::Kind::Name)
      check_value_name(e->name, e->loc, regs, loops);
    check_expr(e->lhs, regs, loops);
    check_expr(e->rhs, regs, loops);
  }

  void define_reg(const std::string &r, SourceLoc loc, std::set<std::string> &regs,
                  const std::vector<std::string> &loops) const {
    if (is_keyword(r))
      throw ParseError(loc, "'" + r + "' is a reserved word");
    if (p_.find_decl(r) || p_.find_input(r))
      throw ParseError(loc, "register '" + r + "' shadows a declaration");
    if (std::find(loops.begin(), loops.end(), r) != loops.end())
      throw ParseError(loc, "cannot assign loop variable '" + r + "'");
    regs.insert(r);
  }

  void check_target(const std::string &n, const IrExprPtr &index, SourceLoc loc) const {
    const Declaration *d = p_.find_decl(n);
    if (!d)
      throw ParseError(loc, "reference to undeclared memory '" + n + "'");
    if (d->is_array && !index)
      throw ParseError(loc, "array '" + n + "' needs an index");
  }

  void check_block(const Block &body, std::set<std::string> &regs, std::vector<std::string> &loops) const {
    for (const auto &s : body) {
      std::visit(
          [&](const auto &x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, AssignStmt>) {
              check_expr(x.value, regs, loops);
              define_reg(x.reg, s.loc, regs, loops);
            } else if constexpr (std::is_same_v<T, LoadStmt>) {
              check_target(x.target, x.index, s.loc);
              check_expr(x.index, regs, loops);
              define_reg(x.reg, s.loc, regs, loops);
            } else if constexpr (std::is_same_v<T, StoreStmt>) {
              check_target(x.target, x.index, s.loc);
              check_expr(x.index, regs, loops);
              check_expr(x.value, regs, loops);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
              check_expr(x.cond, regs, loops);
              check_block(x.then_body, regs, loops);
              check_block(x.else_body, regs, loops);
            } else if constexpr (std::is_same_v<T, ForStmt>) {
              if (p_.find_decl(x.var) || p_.find_input(x.var) || regs.count(x.var))
                throw ParseError(s.loc, "loop variable '" + x.var + "' shadows another name");
              loops.push_back(x.var);
              check_block(x.body, regs, loops);
              loops.pop_back();
            } else {
              check_expr(x.cond, regs, loops);
              check_block(x.body, regs, loops);
            }
          },
          s.node);
    }
  }

  const Program &p_;
};

inline IrExprPtr bind_loop_var(const IrExprPtr &e, const std::string &var, int64_t value) {
  if (!e)
    return e;
  switch (e->kind) {
  case IrExpr::Kind::Literal: return e;
  case IrExpr::Kind::Name:
    return e->name == var ? IrExpr::literal(static_cast<uint64_t>(value), e->loc) : e;
  case IrExpr::Kind::Unary: return IrExpr::unary(e->name, bind_loop_var(e->lhs, var, value), e->loc);
  case IrExpr::Kind::Binary:
    return IrExpr::binary(e->name, bind_loop_var(e->lhs, var, value), bind_loop_var(e->rhs, var, value), e->loc);
  }
  return e;
}

inline Block bind_loop_var(const Block &body, const std::string &var, int64_t value) {
  Block out;
  out.reserve(body.size());
  for (const auto &s : body) {
    Stmt c{s.loc, {}};
    std::visit(
        [&](const auto &x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, AssignStmt>)
            c.node = AssignStmt{x.reg, bind_loop_var(x.value, var, value)};
          else if constexpr (std::is_same_v<T, LoadStmt>)
            c.node = LoadStmt{x.reg, x.target, bind_loop_var(x.index, var, value)};
          else if constexpr (std::is_same_v<T, StoreStmt>)
            c.node = StoreStmt{x.target, bind_loop_var(x.index, var, value), bind_loop_var(x.value, var, value)};
          else if constexpr (std::is_same_v<T, IfStmt>)
            c.node = IfStmt{bind_loop_var(x.cond, var, value), bind_loop_var(x.then_body, var, value),
                            bind_loop_var(x.else_body, var, value)};
          else if constexpr (std::is_same_v<T, ForStmt>)
            c.node = x.var == var ? x : ForStmt{x.var, x.lo, x.hi, bind_loop_var(x.body, var, value)};
          else
            c.node = WhileStmt{bind_loop_var(x.cond, var, value), x.bound, bind_loop_var(x.body, var, value)};
        },
        s.node);
    out.push_back(std::move(c));
  }
  return out;
}

inline Block unroll_block(const Block &body, uint32_t bound) {
  Block out;
  for (const auto &s : body) {
    if (const auto *f = std::get_if<ForStmt>(&s.node)) {
      int64_t trips = f->hi > f->lo ? f->hi - f->lo : 0;
      if (trips > static_cast<int64_t>(bound))
        throw ParseError(s.loc, "loop over '" + f->var + "' runs " + std::to_string(trips) +
                                    " times, more than the unroll bound " + std::to_string(bound));
      for (int64_t i = f->lo; i < f->hi; ++i) {
        Block iter = unroll_block(bind_loop_var(f->body, f->var, i), bound);
        out.insert(out.end(), std::make_move_iterator(iter.begin()), std::make_move_iterator(iter.end()));
      }
    } else if (const auto *w = std::get_if<WhileStmt>(&s.node)) {
      if (!w->bound)
        throw ParseError(s.loc, "while loop has no 'bound' annotation and cannot be unrolled");
      if (*w->bound > bound)
        throw ParseError(s.loc, "while loop bound " + std::to_string(*w->bound) + " exceeds the unroll bound " +
                                    std::to_string(bound));
      // Iterations past the annotated bound are cut off.
      Block body_once = unroll_block(w->body, bound);
      Block nest;
      for (uint32_t i = 0; i < *w->bound; ++i) {
        Block then_body = body_once;
        then_body.insert(then_body.end(), std::make_move_iterator(nest.begin()), std::make_move_iterator(nest.end()));
        nest.clear();
        nest.push_back(Stmt{s.loc, IfStmt{w->cond, std::move(then_body), {}}});
      }
      out.insert(out.end(), std::make_move_iterator(nest.begin()), std::make_move_iterator(nest.end()));
    } else if (const auto *i = std::get_if<IfStmt>(&s.node)) {
      out.push_back(Stmt{s.loc, IfStmt{i->cond, unroll_block(i->then_body, bound), unroll_block(i->else_body, bound)}});
    } else {
      out.push_back(s);
    }
  }
  return out;
}

inline bool block_has_loops(const Block &body) {
  for (const auto &s : body) {
    if (std::holds_alternative<ForStmt>(s.node) || std::holds_alternative<WhileStmt>(s.node))
      return true;
    if (const auto *i = std::get_if<IfStmt>(&s.node))
      if (block_has_loops(i->then_body) || block_has_loops(i->else_body))
        return true;
  }
  return false;
}

} // namespace detail

/// Parses and validates a program. Errors carry line:column.
inline Program parse_program(std::string_view text) {
  Program p = detail::Parser(detail::Lexer(text).run()).run();
  // A lone thread is critical by default.
  if (p.threads.size() == 1 && !p.threads.front().adversary)
    p.threads.front().critical = true;
  detail::Validator(p).run();
  return p;
}

inline bool has_loops(const Program &p) {
  for (const auto &t : p.threads)
    if (detail::block_has_loops(t.body))
      return true;
  return false;
}

/// Replaces every loop by copies of its body. Fails when a counted loop
/// runs more than `bound` times or a while loop lacks a bound.
inline Program unroll_loops(const Program &p, uint32_t bound) {
  if (bound == 0)
    throw Error("unroll bound must be positive");
  Program out = p;
  for (auto &t : out.threads)
    t.body = detail::unroll_block(t.body, bound);
  return out;
}

/// Adds a non-critical thread that performs one load through a fresh
/// symbolic-base scalar, letting the solver pick the adversary's layout.
inline Program synthesize_adversary(const Program &p, const CacheConfig &cfg) {
  for (const auto &t : p.threads)
    if (t.adversary)
      throw Error("program already has an adversary thread (tid " + std::to_string(t.tid) + ")");
  auto taken = [&](const std::string &n) { return p.find_decl(n) || p.find_input(n); };
  std::string name = "adv";
  for (int i = 1; taken(name); ++i)
    name = "adv" + std::to_string(i);

  Program out = p;
  Declaration d;
  d.name = name;
  d.elem_size = 1;
  d.length = 1;
  d.window = 4 * cfg.cache_size;
  out.decls.push_back(d);

  int tid = 0;
  for (const auto &t : p.threads)
    tid = std::max(tid, t.tid);
  Thread t;
  t.tid = tid + 1;
  t.adversary = true;
  t.body.push_back(Stmt{{}, LoadStmt{"r_" + name, name, nullptr}});
  out.threads.push_back(std::move(t));
  return out;
}

} // namespace symsc
