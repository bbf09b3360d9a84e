// SPDX-License-Identifier: Apache-2.0
#pragma once

// Ground truth. A concrete LRU cache, a direct interpreter of the
// structured IR that follows a given thread schedule, and an exhaustive
// leak search over small secret spaces.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "symsc/cache.hpp"
#include "symsc/engine.hpp"
#include "symsc/frontend.hpp"
#include "symsc/ir.hpp"
#include "symsc/ir_eval.hpp"

namespace symsc {

/// Each set lists resident block tags, most recent first.
struct ConcreteCacheState {
  std::map<uint64_t, std::vector<uint64_t>> sets;

  /// Performs one access and reports whether it hit.
  bool access(uint64_t addr, const CacheConfig &cfg) {
    uint64_t block = concrete_tag(addr, cfg);
    auto &set = sets[concrete_line(addr, cfg)];
    auto it = std::find(set.begin(), set.end(), block);
    bool hit = it != set.end();
    if (hit)
      set.erase(it);
    else if (set.size() == cfg.assoc)
      set.pop_back();
    set.insert(set.begin(), block);
    return hit;
  }
};

inline std::pair<ConcreteCacheState, bool> simulate_access(const ConcreteCacheState &st, uint64_t addr,
                                                           const CacheConfig &cfg) {
  ConcreteCacheState next = st;
  bool hit = next.access(addr, cfg);
  return {std::move(next), hit};
}

struct BehaviorEntry {
  int tid = 0;
  SourceLoc site;
  AccessKind kind = AccessKind::Load;
  std::string decl;
  uint64_t addr = 0;
  bool hit = false;
};

using BehaviorSeq = std::vector<BehaviorEntry>;

/// "<m,m,h>" for the accesses of one thread, or of all threads when tid < 0.
inline std::string behavior_string(const BehaviorSeq &b, int tid = -1) {
  std::string out = "<";
  bool first = true;
  for (const auto &e : b) {
    if (tid >= 0 && e.tid != tid)
      continue;
    out += first ? "" : ",";
    out += e.hit ? "h" : "m";
    first = false;
  }
  return out + ">";
}

namespace detail {

class ConcreteMachine {
public:
  ConcreteMachine(const Program &p, const Valuation &inputs, const CacheConfig &cfg)
      : p_(&p), inputs_(&inputs), cfg_(cfg) {
    std::vector<const Thread *> ts;
    for (const auto &t : p.threads)
      ts.push_back(&t);
    std::sort(ts.begin(), ts.end(), [](auto *a, auto *b) { return a->tid < b->tid; });
    for (const Thread *t : ts) {
      Cursor c;
      c.tid = t->tid;
      c.frames.push_back({&t->body, 0});
      threads_.push_back(std::move(c));
    }
    memory_.resize(p.decls.size());
    for (size_t ti = 0; ti < threads_.size(); ++ti)
      run_local(ti);
  }

  size_t thread_count() const { return threads_.size(); }
  int tid(size_t ti) const { return threads_[ti].tid; }
  bool pending(size_t ti) const { return current(ti) != nullptr; }
  const BehaviorSeq &behaviors() const { return behaviors_; }
  const std::string &path_key() const { return key_; }
  /// Path and schedule up to the latest access, before its thread moved on.
  const std::string &access_key() const { return access_key_; }

  std::optional<size_t> index_of(int tid) const {
    for (size_t i = 0; i < threads_.size(); ++i)
      if (threads_[i].tid == tid)
        return i;
    return std::nullopt;
  }

  /// Executes the pending load or store of thread ti, then runs that thread
  /// up to its next access.
  void step(size_t ti) {
    const Stmt *s = current(ti);
    if (!s)
      throw Error("thread " + std::to_string(threads_[ti].tid) + " has no pending access");
    Cursor &c = threads_[ti];
    BehaviorEntry b;
    b.tid = c.tid;
    b.site = s->loc;
    std::string target;
    IrExprPtr index;
    if (const auto *ld = std::get_if<LoadStmt>(&s->node)) {
      b.kind = AccessKind::Load;
      target = ld->target;
      index = ld->index;
    } else {
      const auto &st = std::get<StoreStmt>(s->node);
      b.kind = AccessKind::Store;
      target = st.target;
      index = st.index;
    }
    size_t di = decl_index(target);
    const Declaration &d = p_->decls[di];
    uint64_t idx = index ? eval(ti, index).v & mask_of(kAddrWidth) : 0;
    uint64_t base = d.base ? *d.base : input("@" + d.name);
    b.addr = (base + idx * d.elem_size) & mask_of(kAddrWidth);
    b.decl = d.name;
    if (const auto *ld = std::get_if<LoadStmt>(&s->node)) {
      auto it = memory_[di].find(b.addr);
      uint64_t v = it != memory_[di].end() ? it->second : initial(d, idx);
      c.regs[ld->reg] = ConcreteValue{v, d.value_width()};
    } else {
      const auto &st = std::get<StoreStmt>(s->node);
      memory_[di][b.addr] = eval(ti, st.value).v & mask_of(d.value_width());
    }
    b.hit = cache_.access(b.addr, cfg_);
    key_ += "g" + std::to_string(c.tid) + ":" + s->loc.str() + ";";
    access_key_ = key_;
    behaviors_.push_back(b);
    ++c.frames.back().second;
    run_local(ti);
  }

private:
  struct Cursor {
    int tid = 0;
    std::vector<std::pair<const Block *, size_t>> frames;
    std::map<std::string, ConcreteValue> regs;
  };

  const Stmt *current(size_t ti) const {
    const Cursor &c = threads_[ti];
    if (c.frames.empty())
      return nullptr;
    const auto &[blk, i] = c.frames.back();
    return i < blk->size() ? &(*blk)[i] : nullptr;
  }

  void run_local(size_t ti) {
    Cursor &c = threads_[ti];
    while (!c.frames.empty()) {
      auto &[blk, i] = c.frames.back();
      if (i >= blk->size()) {
        c.frames.pop_back();
        continue;
      }
      const Stmt &s = (*blk)[i];
      if (const auto *a = std::get_if<AssignStmt>(&s.node)) {
        c.regs[a->reg] = eval(ti, a->value);
        ++i;
      } else if (const auto *f = std::get_if<IfStmt>(&s.node)) {
        ConcreteDomain d;
        bool taken = as_condition(d, eval(ti, f->cond)).v != 0;
        key_ += "b" + std::to_string(c.tid) + ":" + s.loc.str() + (taken ? "=1;" : "=0;");
        ++i;
        c.frames.push_back({taken ? &f->then_body : &f->else_body, 0});
      } else if (std::holds_alternative<LoadStmt>(s.node) || std::holds_alternative<StoreStmt>(s.node)) {
        return;
      } else {
        throw Error(s.loc.str() + ": loops must be unrolled before replay");
      }
    }
  }

  uint64_t input(const std::string &n) const {
    auto it = inputs_->find(n);
    if (it == inputs_->end())
      throw Error("replay: no value for '" + n + "'");
    return it->second;
  }

  ConcreteValue eval(size_t ti, const IrExprPtr &e) const {
    ConcreteDomain d;
    const Cursor &c = threads_[ti];
    return eval_ir<ConcreteDomain>(d, e, [&](const std::string &n) -> ConcreteValue {
      if (auto it = c.regs.find(n); it != c.regs.end())
        return it->second;
      if (const InputDecl *in = p_->find_input(n))
        return {(in->secret ? input(n) : in->value) & mask_of(in->width), in->width};
      if (const Declaration *decl = p_->find_decl(n)) {
        if (decl->sensitivity == Sensitivity::Secret)
          return {input(decl->name) & mask_of(decl->value_width()), decl->value_width()};
        if (decl->sensitivity == Sensitivity::Public)
          return {decl->public_value & mask_of(decl->value_width()), decl->value_width()};
      }
      return {0, 32};
    });
  }

  uint64_t initial(const Declaration &d, uint64_t idx) const {
    const uint64_t m = mask_of(d.value_width());
    switch (d.sensitivity) {
    case Sensitivity::Public: return d.public_value & m;
    case Sensitivity::Secret: return idx < d.length ? input(Program::element_var(d, idx)) & m : 0;
    case Sensitivity::Derived: return idx < d.contents.size() ? d.contents[idx] & m : 0;
    }
    return 0;
  }

  size_t decl_index(const std::string &n) const {
    for (size_t i = 0; i < p_->decls.size(); ++i)
      if (p_->decls[i].name == n)
        return i;
    throw Error("undeclared memory '" + n + "'");
  }

  const Program *p_;
  const Valuation *inputs_;
  CacheConfig cfg_;
  std::vector<Cursor> threads_;
  std::vector<std::map<uint64_t, uint64_t>> memory_;
  ConcreteCacheState cache_;
  BehaviorSeq behaviors_;
  std::string key_;
  std::string access_key_;
};

} // namespace detail

/// Executes `p` on concrete inputs, choosing the thread of each access
/// from `schedule`. Inputs name every secret variable and every symbolic
/// base ("@name"). With allow_prefix the run stops where the schedule
/// ends; otherwise the schedule must cover every access.
inline BehaviorSeq replay(const Program &p, const Valuation &inputs, const std::vector<int> &schedule,
                          const CacheConfig &cfg, bool allow_prefix = false) {
  cfg.validate();
  detail::ConcreteMachine m(p, inputs, cfg);
  for (size_t n = 0; n < schedule.size(); ++n) {
    auto ti = m.index_of(schedule[n]);
    if (!ti)
      throw Error("replay: schedule step " + std::to_string(n + 1) + " names unknown thread " +
                  std::to_string(schedule[n]));
    if (!m.pending(*ti))
      throw Error("replay: schedule step " + std::to_string(n + 1) + " selects thread " +
                  std::to_string(schedule[n]) + ", which has no pending access under these inputs");
    m.step(*ti);
  }
  if (!allow_prefix) {
    for (size_t ti = 0; ti < m.thread_count(); ++ti)
      if (m.pending(ti))
        throw Error("replay: schedule ends while thread " + std::to_string(m.tid(ti)) +
                    " still has accesses under these inputs");
  }
  return m.behaviors();
}

struct BruteForceOptions {
  unsigned max_secret_bits = 16;
  uint64_t max_runs = 20'000'000;
};

struct BruteForceResult {
  std::set<SourceLoc> sites;
  /// (site, thread order of the accesses up to and including it)
  std::set<std::pair<SourceLoc, std::vector<int>>> classes;
  uint64_t runs = 0;
};

/// Every critical-thread access where two secret valuations, sharing one
/// path and schedule up to that access, see different verdicts.
inline BruteForceResult brute_force_leaks(const Program &p, const CacheConfig &cfg, const BruteForceOptions &opts = {}) {
  cfg.validate();
  if (has_loops(p))
    throw Error("brute force: loops must be unrolled first");
  const auto secrets = p.secret_inputs();
  unsigned bits = p.secret_bits();
  if (bits > opts.max_secret_bits)
    throw Error("brute force refused: " + std::to_string(bits) + " secret bits exceed the limit of " +
                std::to_string(opts.max_secret_bits));
  std::vector<std::pair<std::string, std::vector<uint64_t>>> adv;
  uint64_t adv_combos = 1;
  const Domains doms = program_domains(p, cfg);
  for (const auto &d : p.decls) {
    if (!d.symbolic())
      continue;
    const VarDomain &dom = doms.at("@" + d.name);
    std::vector<uint64_t> addrs;
    // Offsets inside a line never change a verdict, so one address per line.
    for (uint64_t a = dom.lo; a <= dom.hi; a += std::max<uint64_t>(cfg.line_size, dom.step))
      addrs.push_back(a);
    adv_combos *= addrs.size();
    adv.emplace_back("@" + d.name, std::move(addrs));
  }
  const uint64_t valuations = uint64_t{1} << bits;
  if (adv_combos > opts.max_runs || valuations * adv_combos > opts.max_runs)
    throw Error("brute force refused: " + std::to_string(valuations) + " valuations x " + std::to_string(adv_combos) +
                " adversary layouts exceed the cap of " + std::to_string(opts.max_runs) + " runs");
  const int critical = p.critical_tid();

  struct Group {
    uint8_t seen = 0;
    SourceLoc site;
    std::vector<int> order;
  };
  std::unordered_map<std::string, Group> groups;
  BruteForceResult out;

  for (uint64_t a = 0; a < adv_combos; ++a) {
    Valuation in;
    std::string layout = "A";
    uint64_t rest = a;
    for (const auto &[name, addrs] : adv) {
      in[name] = addrs[rest % addrs.size()];
      rest /= addrs.size();
      layout += ":" + std::to_string(in[name]);
    }
    layout += "|";
    for (uint64_t v = 0; v < valuations; ++v) {
      uint64_t r = v;
      for (const auto &[name, w] : secrets) {
        in[name] = r & mask_of(w);
        r >>= w;
      }
      std::vector<int> order;
      std::function<void(detail::ConcreteMachine &)> dfs = [&](detail::ConcreteMachine &m) {
        bool any = false;
        for (size_t ti = 0; ti < m.thread_count(); ++ti) {
          if (!m.pending(ti))
            continue;
          any = true;
          detail::ConcreteMachine next = m;
          next.step(ti);
          order.push_back(next.tid(ti));
          const BehaviorEntry &b = next.behaviors().back();
          if (b.tid == critical) {
            Group &g = groups[layout + next.access_key()];
            if (g.seen == 0) {
              g.site = b.site;
              g.order = order;
            }
            g.seen |= b.hit ? 1 : 2;
          }
          dfs(next);
          order.pop_back();
        }
        if (!any && ++out.runs > opts.max_runs)
          throw Error("brute force refused: more than " + std::to_string(opts.max_runs) + " runs");
      };
      detail::ConcreteMachine m(p, in, cfg);
      dfs(m);
    }
  }
  for (const auto &[key, g] : groups) {
    if (g.seen == 3) {
      out.sites.insert(g.site);
      out.classes.insert({g.site, g.order});
    }
  }
  return out;
}

} // namespace symsc
