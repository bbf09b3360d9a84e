// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "symsc/report.hpp"

namespace symsc::test {

inline std::string corpus_path(const std::string &name) { return std::string(SYMSC_CORPUS) + "/" + name + ".ir"; }

inline Program load(const std::string &name, AdversaryMode adv = AdversaryMode::Fixed,
                    CacheConfig cfg = small_direct_preset()) {
  RunConfig rc;
  rc.adversary = adv;
  rc.cache = cfg;
  return load_program(corpus_path(name), rc);
}

inline CacheConfig toy_cache() { return CacheConfig{32, 4, 1}; }

struct CorpusEntry {
  std::string label;
  std::string file;
  CacheConfig cfg;
  AdversaryMode adv;
  bool sbox;
  bool oracle; // small enough for brute force
};

inline std::vector<CorpusEntry> corpus() {
  const CacheConfig fig = small_direct_preset();
  const CacheConfig toy = toy_cache();
  return {
      {"seq_leak", "seq_leak", fig, AdversaryMode::None, false, true},
      {"seq_fixed", "seq_fixed", fig, AdversaryMode::None, false, true},
      {"conc_leak", "conc_leak", fig, AdversaryMode::Fixed, false, true},
      {"conc_open+adv", "conc_open", fig, AdversaryMode::Synthesize, false, true},
      {"sbox_seq8", "sbox_seq8", toy, AdversaryMode::Fixed, true, true},
      {"sbox_preload8", "sbox_preload8", toy, AdversaryMode::Fixed, true, true},
      {"sbox_preload8+adv", "sbox_preload8", toy, AdversaryMode::Synthesize, true, true},
      {"sbox_spy8", "sbox_spy8", toy, AdversaryMode::Fixed, true, true},
      {"sbox_tables12", "sbox_tables12", toy, AdversaryMode::Fixed, true, true},
      {"sbox_state12", "sbox_state12", toy, AdversaryMode::Fixed, true, true},
      {"sbox_rounds16", "sbox_rounds16", toy, AdversaryMode::Fixed, true, false},
  };
}

inline ExploreResult run(const Program &p, const CacheConfig &cfg, ExploreOptions o = {}) {
  EnumerativeBackend s;
  return explore(p, cfg, s, o);
}

/// Trace record with an always-true path condition.
inline AccessRecord rec(ExprContext &ctx, Expr addr, int tid = 1, std::string decl = "", Expr pcon = {}) {
  AccessRecord r;
  r.tid = tid;
  r.addr = addr.width() == kAddrWidth ? addr : ctx.resize(addr, kAddrWidth);
  r.pcon = pcon.valid() ? pcon : ctx.true_();
  r.decl = std::move(decl);
  return r;
}

} // namespace symsc::test

namespace symsc::test {

/// Drives the executor along a thread order, taking `arm` at every
/// two-way branch. Returns the state after the last listed access.
inline SymbolicState walk(Executor &ex, const std::vector<int> &tids, bool arm = true) {
  SymbolicState s = ex.advance(ex.initial());
  size_t n = 0;
  for (;;) {
    auto br = ex.branch_events(s);
    if (!br.empty()) {
      s = ex.advance(ex.next_symbolic_state(s, br[arm ? 0 : 1]));
      continue;
    }
    if (n == tids.size())
      return s;
    bool moved = false;
    for (const auto &e : ex.enabled_events(s)) {
      if (e.tid == tids[n]) {
        s = ex.advance(ex.next_symbolic_state(s, e));
        moved = true;
        break;
      }
    }
    if (!moved)
      throw Error("walk: thread " + std::to_string(tids[n]) + " has no pending access");
    ++n;
  }
}

} // namespace symsc::test
