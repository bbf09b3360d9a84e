// SPDX-License-Identifier: Apache-2.0
#pragma once

// End-to-end analysis pipeline and its JSON report.

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "symsc/explorer.hpp"
#include "symsc/frontend.hpp"

namespace symsc {

enum class AdversaryMode { Fixed, Synthesize, None };

inline AdversaryMode parse_adversary_mode(const std::string &s) {
  if (s == "fixed")
    return AdversaryMode::Fixed;
  if (s == "synthesize")
    return AdversaryMode::Synthesize;
  if (s == "none")
    return AdversaryMode::None;
  throw Error("unknown adversary mode '" + s + "' (expected fixed, synthesize or none)");
}

struct RunConfig {
  std::string program_path;
  CacheConfig cache;
  AdversaryMode adversary = AdversaryMode::Fixed;
  uint32_t unroll_bound = 16;
  ExploreOptions explore;
  std::string solver; // empty: built-in enumerative backend
  uint64_t solver_timeout_ms = 30000;
  bool timing = true; // false: wall_ms is reported as 0
};

/// Parse, unroll, and apply the adversary policy.
inline Program prepare_program(std::string_view text, const RunConfig &cfg) {
  Program p = parse_program(text);
  if (has_loops(p))
    p = unroll_loops(p, cfg.unroll_bound);
  switch (cfg.adversary) {
  case AdversaryMode::Fixed:
    break;
  case AdversaryMode::Synthesize:
    p = synthesize_adversary(p, cfg.cache);
    break;
  case AdversaryMode::None: {
    // Keep only the critical thread.
    const int c = p.critical_tid();
    std::erase_if(p.threads, [&](const Thread &t) { return t.tid != c; });
    break;
  }
  }
  return p;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::unique_ptr<SolverBackend> make_solver(const RunConfig &cfg) {
  std::unique_ptr<SolverBackend> s;
  if (cfg.solver.empty())
    s = std::make_unique<EnumerativeBackend>();
  else
    s = std::make_unique<ExternalBackend>(ExternalBackend::split_command(cfg.solver));
  s->set_timeout_ms(cfg.solver_timeout_ms);
  return s;
}

/// prepare_program on a file; errors carry the path.
inline Program load_program(const std::string &path, const RunConfig &cfg) {
  std::string text = read_file(path);
  try {
    return prepare_program(text, cfg);
  } catch (const ParseError &e) {
    throw Error(path + ":" + e.what());
  } catch (const Error &e) {
    throw Error(path + ": " + e.what());
  }
}

struct AnalysisOutcome {
  Program program;
  ExploreResult result;
  uint64_t wall_ms = 0;
};

inline AnalysisOutcome analyze(const Program &p, const RunConfig &cfg, SolverBackend &solver) {
  auto t0 = std::chrono::steady_clock::now();
  AnalysisOutcome out;
  out.program = p;
  ExprContext ctx;
  Explorer ex(ctx, out.program, cfg.cache, solver, cfg.explore);
  out.result = ex.run();
  if (cfg.timing)
    out.wall_ms = static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
  return out;
}

namespace detail {

inline nlohmann::ordered_json valuation_json(const Valuation &v) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto &[n, x] : v)
    j[n] = x;
  return j;
}

} // namespace detail

inline nlohmann::ordered_json report_json(const RunConfig &cfg, const AnalysisOutcome &a) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["program"] = cfg.program_path;
  j["cache"] = {{"size", cfg.cache.cache_size}, {"line", cfg.cache.line_size}, {"assoc", cfg.cache.assoc}};
  j["mode"] = to_string(cfg.explore.mode);
  ordered_json leaks = ordered_json::array();
  for (const auto &l : a.result.leaks) {
    ordered_json e;
    e["site"] = l.site.str();
    e["access_index"] = l.access_index;
    ordered_json sched = ordered_json::array();
    for (const auto &st : l.schedule)
      sched.push_back(ordered_json::array({st.tid, st.site.str()}));
    e["schedule"] = sched;
    e["k1"] = detail::valuation_json(l.k1);
    e["k2"] = detail::valuation_json(l.k2);
    if (!l.adversary.empty())
      e["adversary_addr"] = detail::valuation_json(l.adversary);
    e["verdict1"] = to_string(l.verdict1);
    e["verdict2"] = to_string(l.verdict2);
    e["replay_confirmed"] = l.replay_confirmed;
    leaks.push_back(std::move(e));
  }
  j["leaks"] = std::move(leaks);
  const auto &s = a.result.stats;
  j["stats"] = {{"interleavings", s.interleavings},
                {"leak_checks", s.leak_checks},
                {"solver_calls", s.solver_calls},
                {"wall_ms", a.wall_ms}};
  j["complete"] = a.result.complete;
  if (!a.result.complete)
    j["incomplete_reason"] = a.result.incomplete_reason;
  return j;
}

/// 0 no leaks, 1 leaks, 3 incomplete; errors map to 2 at the call site.
inline int exit_code(const ExploreResult &r) {
  if (!r.complete)
    return 3;
  return r.leaks.empty() ? 0 : 1;
}

} // namespace symsc
