// SPDX-License-Identifier: Apache-2.0
#pragma once

// Constraint backends. Both kinds answer two questions: is a width-1
// formula satisfiable over the declared domains, and do two secret
// valuations exist that agree on the path condition but disagree on a
// hit constraint.

#include <chrono>
#include <csignal>
#include <cstring>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "symsc/domain.hpp"
#include "symsc/expr.hpp"

extern char **environ;

namespace symsc {

enum class SatStatus { Sat, Unsat, Unknown };

inline const char *to_string(SatStatus s) {
  switch (s) {
  case SatStatus::Sat: return "sat";
  case SatStatus::Unsat: return "unsat";
  case SatStatus::Unknown: return "unknown";
  }
  return "?";
}

struct CheckResult {
  SatStatus status = SatStatus::Unknown;
  Valuation model;
};

/// pcon and tau range over secret variables K plus shared variables
/// (symbolic bases, environment). The shared part is quantified once.
struct DivergenceQuery {
  Expr pcon;
  Expr tau;
  std::vector<std::string> secrets;
  Domains domains;
};

struct DivergenceResult {
  SatStatus status = SatStatus::Unknown;
  Valuation k1, k2;  // secret parts
  Valuation shared;  // non-secret variables of the witness
};

inline const std::string kFirstCopy = "#1";
inline const std::string kSecondCopy = "#2";

class SolverBackend {
public:
  virtual ~SolverBackend() = default;

  CheckResult check(ExprContext &ctx, Expr f, const Domains &doms) {
    ++calls_;
    if (f.width() != 1)
      throw Error("solver query must have width 1");
    if (f.is_true() || f.is_false()) {
      CheckResult r;
      r.status = f.is_true() ? SatStatus::Sat : SatStatus::Unsat;
      for (const auto &[n, w] : free_vars(f))
        r.model[n] = lower_bound(doms, n);
      return r;
    }
    return do_check(ctx, f, doms);
  }

  /// The two-copy query: pcon(K1) & pcon(K2) & K1 != K2 & (tau(K1) xor tau(K2)).
  DivergenceResult divergence(ExprContext &ctx, const DivergenceQuery &q) {
    ++calls_;
    return do_divergence(ctx, q);
  }

  uint64_t calls() const { return calls_; }
  uint64_t timeouts() const { return timeouts_; }
  void set_timeout_ms(uint64_t ms) { timeout_ms_ = ms; }
  uint64_t timeout_ms() const { return timeout_ms_; }
  virtual std::string name() const = 0;

protected:
  virtual CheckResult do_check(ExprContext &ctx, Expr f, const Domains &doms) = 0;

  /// Generic reduction to one satisfiability query over renamed copies.
  virtual DivergenceResult do_divergence(ExprContext &ctx, const DivergenceQuery &q) {
    std::map<std::string, Expr> first, second;
    Domains doms = q.domains;
    std::vector<Expr> differ;
    for (const auto &k : q.secrets) {
      auto it = q.domains.find(k);
      if (it == q.domains.end())
        throw Error("secret '" + k + "' has no domain");
      Expr a = ctx.var(k + kFirstCopy, it->second.width);
      Expr b = ctx.var(k + kSecondCopy, it->second.width);
      first[k] = a;
      second[k] = b;
      doms[k + kFirstCopy] = it->second;
      doms[k + kSecondCopy] = it->second;
      differ.push_back(ctx.ne(a, b));
    }
    Expr f = ctx.land(ctx.substitute(q.pcon, first), ctx.substitute(q.pcon, second));
    f = ctx.land(f, ctx.lor(differ));
    f = ctx.land(f, ctx.lxor(ctx.substitute(q.tau, first), ctx.substitute(q.tau, second)));
    CheckResult c = do_check(ctx, f, doms);
    DivergenceResult r;
    r.status = c.status;
    if (c.status != SatStatus::Sat)
      return r;
    for (const auto &k : q.secrets) {
      r.k1[k] = value_or(c.model, k + kFirstCopy, doms);
      r.k2[k] = value_or(c.model, k + kSecondCopy, doms);
    }
    for (const auto &[n, w] : free_vars(std::array<Expr, 2>{q.pcon, q.tau}))
      if (!first.count(n))
        r.shared[n] = value_or(c.model, n, doms);
    return r;
  }

  static uint64_t lower_bound(const Domains &doms, const std::string &n) {
    auto it = doms.find(n);
    return it == doms.end() ? 0 : it->second.lo;
  }
  static uint64_t value_or(const Valuation &m, const std::string &n, const Domains &doms) {
    auto it = m.find(n);
    return it == m.end() ? lower_bound(doms, n) : it->second;
  }

  void note_timeout() { ++timeouts_; }

  uint64_t timeout_ms_ = 30000;

private:
  uint64_t calls_ = 0;
  uint64_t timeouts_ = 0;
};

/// Exhaustive search over variable domains. Refuses search spaces larger
/// than 2^max_bits.
class EnumerativeBackend : public SolverBackend {
public:
  explicit EnumerativeBackend(double max_bits = 24) : max_bits_(max_bits) {}
  std::string name() const override { return "enumerative"; }

protected:
  struct Space {
    std::vector<std::string> names;
    std::vector<VarDomain> doms;
  };

  Space space_of(const std::map<std::string, unsigned> &vars, const Domains &doms) const {
    Space s;
    double bits = 0;
    for (const auto &[n, w] : vars) {
      auto it = doms.find(n);
      VarDomain d = it != doms.end()         ? it->second
                    : is_environment_var(n) ? VarDomain::fixed(w, 0)
                                            : VarDomain::full(w);
      if (it != doms.end() && it->second.width != w)
        throw Error("domain width mismatch for '" + n + "'");
      bits += d.bits();
      s.names.push_back(n);
      s.doms.push_back(d);
    }
    if (bits > max_bits_ + 1e-9)
      throw Error("enumerative backend: search space of 2^" + std::to_string(static_cast<int>(std::ceil(bits))) +
                  " valuations exceeds the 2^" + std::to_string(static_cast<int>(max_bits_)) +
                  " limit; use an external solver");
    return s;
  }

  /// Odometer over a space; the first variable varies fastest.
  static bool step(const Space &s, std::vector<uint64_t> &cur) {
    for (size_t i = 0; i < cur.size(); ++i) {
      if (cur[i] < s.doms[i].hi && s.doms[i].hi - cur[i] >= s.doms[i].step) {
        cur[i] += s.doms[i].step;
        return true;
      }
      cur[i] = s.doms[i].lo;
    }
    return false;
  }
  static std::vector<uint64_t> start(const Space &s) {
    std::vector<uint64_t> cur;
    for (const auto &d : s.doms)
      cur.push_back(d.lo);
    return cur;
  }

  class Deadline {
  public:
    explicit Deadline(uint64_t ms) : end_(std::chrono::steady_clock::now() + std::chrono::milliseconds(ms)) {}
    bool expired() {
      if (++tick_ % 4096 != 0)
        return false;
      return std::chrono::steady_clock::now() > end_;
    }

  private:
    std::chrono::steady_clock::time_point end_;
    uint64_t tick_ = 0;
  };

  CheckResult do_check(ExprContext &, Expr f, const Domains &doms) override {
    Space s = space_of(free_vars(f), doms);
    CompiledExpr c(std::span<const Expr>(&f, 1), s.names);
    std::vector<uint64_t> cur = start(s);
    Deadline dl(timeout_ms_);
    CheckResult r;
    do {
      if (dl.expired()) {
        note_timeout();
        return r;
      }
      if (c.eval(cur)[0]) {
        r.status = SatStatus::Sat;
        for (size_t i = 0; i < s.names.size(); ++i)
          r.model[s.names[i]] = cur[i];
        return r;
      }
    } while (step(s, cur));
    r.status = SatStatus::Unsat;
    return r;
  }

  DivergenceResult do_divergence(ExprContext &, const DivergenceQuery &q) override {
    std::array<Expr, 2> roots{q.pcon, q.tau};
    auto vars = free_vars(roots);
    std::map<std::string, unsigned> kvars, svars;
    for (const auto &[n, w] : vars) {
      if (std::find(q.secrets.begin(), q.secrets.end(), n) != q.secrets.end())
        kvars.emplace(n, w);
      else
        svars.emplace(n, w);
    }
    auto all = kvars;
    all.insert(svars.begin(), svars.end());
    space_of(all, q.domains); // size guard over the single-copy space
    Space ks = space_of(kvars, q.domains);
    Space ss = space_of(svars, q.domains);
    std::vector<std::string> order = ks.names;
    order.insert(order.end(), ss.names.begin(), ss.names.end());
    CompiledExpr c(roots, order);

    DivergenceResult r;
    Deadline dl(timeout_ms_);
    std::vector<uint64_t> sv = start(ss);
    std::vector<uint64_t> buf(order.size());
    do {
      std::copy(sv.begin(), sv.end(), buf.begin() + static_cast<std::ptrdiff_t>(ks.names.size()));
      std::vector<uint64_t> kv = start(ks);
      std::optional<std::vector<uint64_t>> first;
      uint64_t first_tau = 0;
      do {
        if (dl.expired()) {
          note_timeout();
          r.status = SatStatus::Unknown;
          return r;
        }
        std::copy(kv.begin(), kv.end(), buf.begin());
        auto out = c.eval(buf);
        if (!out[0])
          continue;
        if (!first) {
          first = kv;
          first_tau = out[1];
        } else if (out[1] != first_tau) {
          r.status = SatStatus::Sat;
          for (size_t i = 0; i < ks.names.size(); ++i) {
            r.k1[ks.names[i]] = (*first)[i];
            r.k2[ks.names[i]] = kv[i];
          }
          for (size_t i = 0; i < ss.names.size(); ++i)
            r.shared[ss.names[i]] = sv[i];
          // Secrets absent from both formulas take their lowest value.
          for (const auto &k : q.secrets)
            if (!kvars.count(k)) {
              r.k1[k] = lower_bound(q.domains, k);
              r.k2[k] = lower_bound(q.domains, k);
            }
          return r;
        }
      } while (step(ks, kv));
    } while (step(ss, sv));
    r.status = SatStatus::Unsat;
    return r;
  }

private:
  double max_bits_;
};

namespace detail {

inline std::string smt_sort(unsigned w) { return "(_ BitVec " + std::to_string(w) + ")"; }
inline std::string smt_symbol(const std::string &n) { return "|" + n + "|"; }
inline std::string smt_const(uint64_t v, unsigned w) {
  return "(_ bv" + std::to_string(v & mask_of(w)) + " " + std::to_string(w) + ")";
}

} // namespace detail

/// SMT-LIB2 (QF_BV) text for one satisfiability query. Width-1 terms are
/// one-bit vectors; every interior node gets its own define-fun in
/// topological order, so equal expressions give byte-identical text.
inline std::string emit_query(Expr f, const Domains &doms = {}) {
  using detail::smt_const;
  using detail::smt_sort;
  using detail::smt_symbol;
  std::ostringstream os;
  os << "(set-logic QF_BV)\n";
  for (const auto &[n, w] : free_vars(f)) {
    os << "(declare-fun " << smt_symbol(n) << " () " << smt_sort(w) << ")\n";
    auto it = doms.find(n);
    if (it == doms.end() && !is_environment_var(n))
      continue;
    const VarDomain d = it != doms.end() ? it->second : VarDomain::fixed(w, 0);
    const std::string v = smt_symbol(n);
    if (d.is_fixed()) {
      os << "(assert (= " << v << " " << smt_const(d.lo, w) << "))\n";
      continue;
    }
    if (d.lo != 0)
      os << "(assert (bvule " << smt_const(d.lo, w) << " " << v << "))\n";
    if (d.hi != mask_of(w))
      os << "(assert (bvule " << v << " " << smt_const(d.hi, w) << "))\n";
    if (d.step > 1)
      os << "(assert (= (bvurem (bvsub " << v << " " << smt_const(d.lo, w) << ") " << smt_const(d.step, w) << ") "
         << smt_const(0, w) << "))\n";
  }
  std::unordered_map<const ExprNode *, std::string> names;
  size_t next = 0;
  auto ref = [&](Expr e) -> std::string {
    if (e.is_const())
      return smt_const(e.value(), e.width());
    if (e.is_var())
      return smt_symbol(e.name());
    return names.at(e.node());
  };
  for (Expr e : topo_order(f)) {
    if (e.is_const() || e.is_var())
      continue;
    auto bin = [&](const char *op) { return std::string("(") + op + " " + ref(e.kid(0)) + " " + ref(e.kid(1)) + ")"; };
    auto as_bit = [&](const std::string &pred) { return "(ite " + pred + " #b1 #b0)"; };
    std::string body;
    switch (e.op()) {
    case Op::Add: body = bin("bvadd"); break;
    case Op::Sub: body = bin("bvsub"); break;
    case Op::Mul: body = bin("bvmul"); break;
    case Op::And: body = bin("bvand"); break;
    case Op::Or: body = bin("bvor"); break;
    case Op::Xor: body = bin("bvxor"); break;
    case Op::Shl: body = bin("bvshl"); break;
    case Op::LShr: body = bin("bvlshr"); break;
    case Op::Not: body = "(bvnot " + ref(e.kid(0)) + ")"; break;
    case Op::Eq: body = as_bit(bin("=")); break;
    case Op::Ult: body = as_bit(bin("bvult")); break;
    case Op::Ule: body = as_bit(bin("bvule")); break;
    case Op::Ite: body = "(ite (= " + ref(e.kid(0)) + " #b1) " + ref(e.kid(1)) + " " + ref(e.kid(2)) + ")"; break;
    case Op::ZExt:
      body = "((_ zero_extend " + std::to_string(e.width() - e.kid(0).width()) + ") " + ref(e.kid(0)) + ")";
      break;
    case Op::Extract:
      body = "((_ extract " + std::to_string(e.value() + e.width() - 1) + " " + std::to_string(e.value()) + ") " +
             ref(e.kid(0)) + ")";
      break;
    default: throw Error("emit_query: unexpected node");
    }
    std::string name = "$" + std::to_string(next++);
    os << "(define-fun " << name << " () " << smt_sort(e.width()) << " " << body << ")\n";
    names.emplace(e.node(), name);
  }
  os << "(assert (= " << ref(f) << " #b1))\n(check-sat)\n(get-model)\n";
  return os.str();
}

namespace detail {

struct SExpr {
  bool is_atom = true;
  std::string atom;
  std::vector<SExpr> list;
};

class SExprReader {
public:
  explicit SExprReader(std::string_view s) : s_(s) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    for (;;) {
      skip();
      if (pos_ >= s_.size())
        return out;
      out.push_back(read());
    }
  }

private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n')
          ++pos_;
      } else {
        break;
      }
    }
  }

  SExpr read() {
    skip();
    if (pos_ >= s_.size())
      throw Error("solver output: unexpected end of input");
    SExpr e;
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      e.is_atom = false;
      for (;;) {
        skip();
        if (pos_ >= s_.size())
          throw Error("solver output: unbalanced parentheses");
        if (s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(read());
      }
    }
    if (c == ')')
      throw Error("solver output: unexpected ')'");
    if (c == '|') {
      size_t end = s_.find('|', pos_ + 1);
      if (end == std::string_view::npos)
        throw Error("solver output: unterminated symbol");
      e.atom = std::string(s_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return e;
    }
    if (c == '"') {
      size_t end = pos_ + 1;
      while (end < s_.size() && !(s_[end] == '"' && (end + 1 >= s_.size() || s_[end + 1] != '"')))
        end += s_[end] == '"' ? 2 : 1;
      e.atom = std::string(s_.substr(pos_, end + 1 - pos_));
      pos_ = std::min(end + 1, s_.size());
      return e;
    }
    size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')')
      ++pos_;
    e.atom = std::string(s_.substr(start, pos_ - start));
    return e;
  }

  std::string_view s_;
  size_t pos_ = 0;
};

inline std::optional<uint64_t> parse_bv_literal(const SExpr &e) {
  auto digits = [](std::string_view s, int base) -> std::optional<uint64_t> {
    if (s.empty())
      return std::nullopt;
    uint64_t v = 0;
    for (char c : s) {
      int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      if (d < 0 || d >= base)
        return std::nullopt;
      v = v * static_cast<uint64_t>(base) + static_cast<uint64_t>(d);
    }
    return v;
  };
  if (e.is_atom) {
    std::string_view a = e.atom;
    if (a.starts_with("#x"))
      return digits(a.substr(2), 16);
    if (a.starts_with("#b"))
      return digits(a.substr(2), 2);
    return std::nullopt;
  }
  if (e.list.size() == 3 && e.list[0].is_atom && e.list[0].atom == "_" && e.list[1].is_atom &&
      e.list[1].atom.starts_with("bv"))
    return digits(std::string_view(e.list[1].atom).substr(2), 10);
  return std::nullopt;
}

inline void collect_definitions(const SExpr &e, Valuation &out) {
  if (e.is_atom)
    return;
  if (e.list.size() == 5 && e.list[0].is_atom && e.list[0].atom == "define-fun" && e.list[1].is_atom &&
      !e.list[2].is_atom && e.list[2].list.empty()) {
    if (auto v = parse_bv_literal(e.list[4]))
      out[e.list[1].atom] = *v;
    return;
  }
  for (const auto &k : e.list)
    collect_definitions(k, out);
}

} // namespace detail

/// Parses a solver response: a status line followed by an optional model.
inline CheckResult parse_solver_output(std::string_view text) {
  auto items = detail::SExprReader(text).read_all();
  CheckResult r;
  if (items.empty() || !items[0].is_atom)
    throw Error("solver output: missing status line");
  const std::string &st = items[0].atom;
  if (st == "sat")
    r.status = SatStatus::Sat;
  else if (st == "unsat")
    r.status = SatStatus::Unsat;
  else if (st == "unknown" || st == "timeout")
    r.status = SatStatus::Unknown;
  else
    throw Error("solver output: unexpected response '" + std::string(text.substr(0, 200)) + "'");
  if (r.status == SatStatus::Sat)
    for (size_t i = 1; i < items.size(); ++i)
      detail::collect_definitions(items[i], r.model);
  return r;
}

/// Runs an SMT-LIB2 solver executable per query, text over pipes.
class ExternalBackend : public SolverBackend {
public:
  /// argv[0] is the executable. A bare z3 gets "-in" appended.
  explicit ExternalBackend(std::vector<std::string> argv) : argv_(std::move(argv)) {
    if (argv_.empty())
      throw Error("external solver: empty command");
    std::string base = argv_[0].substr(argv_[0].find_last_of('/') + 1);
    if (argv_.size() == 1 && base.starts_with("z3"))
      argv_.push_back("-in");
    std::signal(SIGPIPE, SIG_IGN);
  }

  /// Splits a command line on spaces.
  static std::vector<std::string> split_command(const std::string &cmd) {
    std::vector<std::string> out;
    std::istringstream is(cmd);
    for (std::string w; is >> w;)
      out.push_back(w);
    return out;
  }

  std::string name() const override { return "external:" + argv_[0]; }

protected:
  CheckResult do_check(ExprContext &, Expr f, const Domains &doms) override {
    std::optional<std::string> out = run(emit_query(f, doms));
    if (!out) {
      note_timeout();
      return {};
    }
    CheckResult r = parse_solver_output(*out);
    if (r.status != SatStatus::Sat)
      return r;
    for (const auto &[n, w] : free_vars(f))
      if (!r.model.count(n))
        r.model[n] = lower_bound(doms, n);
    for (auto it = r.model.begin(); it != r.model.end();)
      it = free_vars(f).count(it->first) ? std::next(it) : r.model.erase(it);
    if (evaluate(f, r.model) != 1)
      throw Error("external solver returned a model that does not satisfy the query");
    return r;
  }

private:
  /// nullopt on timeout.
  std::optional<std::string> run(const std::string &input) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
      throw Error(std::string("external solver: pipe failed: ") + std::strerror(errno));
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, in_pipe[0], 0);
    posix_spawn_file_actions_adddup2(&fa, out_pipe[1], 1);
    posix_spawn_file_actions_adddup2(&fa, out_pipe[1], 2);
    posix_spawn_file_actions_addclose(&fa, in_pipe[1]);
    posix_spawn_file_actions_addclose(&fa, out_pipe[0]);
    std::vector<char *> args;
    for (auto &a : argv_)
      args.push_back(a.data());
    args.push_back(nullptr);
    pid_t pid = 0;
    int rc = posix_spawnp(&pid, argv_[0].c_str(), &fa, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&fa);
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (rc != 0) {
      close(in_pipe[1]);
      close(out_pipe[0]);
      throw Error("external solver: cannot start '" + argv_[0] + "': " + std::strerror(rc));
    }
    fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);

    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    std::string out;
    size_t written = 0;
    int wfd = in_pipe[1];
    bool timed_out = false;
    char buf[4096];
    for (;;) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        timed_out = true;
        break;
      }
      pollfd fds[2];
      nfds_t n = 0;
      fds[n++] = {out_pipe[0], POLLIN, 0};
      if (wfd >= 0)
        fds[n++] = {wfd, POLLOUT, 0};
      int pr = poll(fds, n, static_cast<int>(std::min<int64_t>(left.count(), 1000)));
      if (pr < 0 && errno != EINTR)
        break;
      if (wfd >= 0 && n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        ssize_t w = write(wfd, input.data() + written, input.size() - written);
        if (w > 0)
          written += static_cast<size_t>(w);
        if (w < 0 && errno != EAGAIN && errno != EINTR)
          written = input.size();
        if (written == input.size()) {
          close(wfd);
          wfd = -1;
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        ssize_t r = read(out_pipe[0], buf, sizeof buf);
        if (r > 0)
          out.append(buf, static_cast<size_t>(r));
        else if (r == 0 || (errno != EAGAIN && errno != EINTR))
          break;
      }
    }
    if (wfd >= 0)
      close(wfd);
    close(out_pipe[0]);
    if (timed_out)
      kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    if (timed_out)
      return std::nullopt;
    return out;
  }

  std::vector<std::string> argv_;
};

} // namespace symsc
