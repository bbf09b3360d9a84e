// SPDX-License-Identifier: Apache-2.0
// symsc: command-line front end.

#include <iostream>

#include <CLI11.hpp>

#include "symsc/report.hpp"

using namespace symsc;

namespace {

struct CacheFlags {
  uint64_t size = 65536;
  uint64_t line = 64;
  uint64_t assoc = 1;
  std::string preset;

  void add(CLI::App *app) {
    app->add_option("--cache-size", size, "Cache size in bytes");
    app->add_option("--line-size", line, "Line size in bytes");
    app->add_option("--assoc", assoc, "Associativity (1 = direct-mapped)");
    app->add_option("--preset", preset, "Named configuration: small-direct, alias paper-fig3 (512 B, 1 B lines, direct-mapped)");
  }

  CacheConfig get() const {
    CacheConfig c;
    if (preset == "small-direct" || preset == "paper-fig3") {
      c = small_direct_preset();
    } else if (!preset.empty()) {
      throw Error("unknown preset '" + preset + "'");
    } else {
      c.cache_size = size;
      c.line_size = line;
      c.assoc = assoc;
    }
    c.validate();
    return c;
  }
};

Valuation parse_inputs(const std::vector<std::string> &items) {
  Valuation v;
  for (const auto &it : items) {
    auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("input '" + it + "' is not name=value");
    v[it.substr(0, eq)] = std::stoull(it.substr(eq + 1), nullptr, 0);
  }
  return v;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Detects secret-dependent cache behavior under thread interleavings"};
  app.require_subcommand(1);

  RunConfig rc;
  CacheFlags cache;
  std::string mode = "precise", adversary = "fixed", out;
  bool no_conc = false, no_tables = false, no_layout = false, no_timing = false;

  auto *an = app.add_subcommand("analyze", "Explore interleavings and report leaks");
  an->add_option("file", rc.program_path, "Program file")->required();
  cache.add(an);
  an->add_option("--mode", mode, "precise | two-step")->check(CLI::IsMember({"precise", "two-step"}));
  an->add_option("--adversary", adversary, "fixed | synthesize | none")
      ->check(CLI::IsMember({"fixed", "synthesize", "none"}));
  an->add_flag("--no-reduce-concretize", no_conc, "Keep environment-only addresses symbolic");
  an->add_flag("--no-reduce-tables", no_tables, "Do not prune pairs in disjoint tables");
  an->add_flag("--no-reduce-layout", no_layout, "Do not drop intermediates that cannot conflict");
  an->add_option("--max-interleavings", rc.explore.max_interleavings, "Bound on explored interleavings");
  an->add_option("--timeout-ms", rc.solver_timeout_ms, "Per-query solver timeout");
  an->add_option("--budget-ms", rc.explore.wall_budget_ms, "Wall-clock budget for exploration (0 = none)");
  an->add_option("--solver", rc.solver, "External SMT-LIB2 solver command (default: built-in enumeration)");
  an->add_option("--unroll-bound", rc.unroll_bound, "Loop unrolling bound");
  an->add_option("--out", out, "Write the JSON report here instead of stdout");
  an->add_flag("--no-timing", no_timing, "Report wall_ms as 0 for byte-stable output");

  std::string rp_file;
  std::vector<std::string> rp_inputs;
  std::vector<int> rp_schedule;
  bool rp_critical = false;
  std::string rp_adversary = "fixed";
  CacheFlags rp_cache;
  auto *rp = app.add_subcommand("replay", "Run concretely under one input and schedule");
  rp->add_option("file", rp_file, "Program file")->required();
  rp_cache.add(rp);
  rp->add_option("--input", rp_inputs, "name=value (secrets, and @decl for symbolic bases)");
  rp->add_option("--schedule", rp_schedule, "Thread id of each access in order")->delimiter(',');
  rp->add_flag("--critical-only", rp_critical, "Show only the critical thread's accesses");
  rp->add_option("--adversary", rp_adversary, "fixed | synthesize | none")
      ->check(CLI::IsMember({"fixed", "synthesize", "none"}));

  std::string bf_file, bf_adversary = "fixed";
  CacheFlags bf_cache;
  unsigned bf_bits = 16;
  auto *bf = app.add_subcommand("brute-force", "Exhaustive concrete leak search (small programs only)");
  bf->add_option("file", bf_file, "Program file")->required();
  bf_cache.add(bf);
  bf->add_option("--max-secret-bits", bf_bits, "Refuse above this many secret bits");
  bf->add_option("--adversary", bf_adversary, "fixed | synthesize | none")
      ->check(CLI::IsMember({"fixed", "synthesize", "none"}));

  std::string pi_file;
  uint32_t pi_bound = 16;
  auto *pi = app.add_subcommand("print-ir", "Parse, unroll, and print the program");
  pi->add_option("file", pi_file, "Program file")->required();
  pi->add_option("--unroll-bound", pi_bound, "Loop unrolling bound");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*an) {
      rc.cache = cache.get();
      rc.explore.mode = mode == "precise" ? Mode::Precise : Mode::TwoStep;
      rc.adversary = parse_adversary_mode(adversary);
      rc.explore.reduce_concretize = !no_conc;
      rc.explore.reduce_tables = !no_tables;
      rc.explore.reduce_layout = !no_layout;
      rc.timing = !no_timing;
      Program p = load_program(rc.program_path, rc);
      auto solver = make_solver(rc);
      AnalysisOutcome a = analyze(p, rc, *solver);
      std::string doc = report_json(rc, a).dump(2) + "\n";
      if (out.empty()) {
        std::cout << doc;
      } else {
        std::ofstream f(out, std::ios::binary);
        if (!(f << doc))
          throw Error("cannot write '" + out + "'");
      }
      return exit_code(a.result);
    }
    if (*rp) {
      RunConfig c;
      c.cache = rp_cache.get();
      c.adversary = parse_adversary_mode(rp_adversary);
      Program p = load_program(rp_file, c);
      BehaviorSeq b = replay(p, parse_inputs(rp_inputs), rp_schedule, c.cache);
      for (const auto &e : b)
        std::cout << "T" << e.tid << "@" << e.site.line << " " << to_string(e.kind) << " " << e.decl << " addr=" << e.addr
                  << " " << (e.hit ? "hit" : "miss") << "\n";
      std::cout << behavior_string(b, rp_critical ? p.critical_tid() : -1) << "\n";
      return 0;
    }
    if (*bf) {
      RunConfig c;
      c.cache = bf_cache.get();
      c.adversary = parse_adversary_mode(bf_adversary);
      Program p = load_program(bf_file, c);
      BruteForceOptions o;
      o.max_secret_bits = bf_bits;
      BruteForceResult r = brute_force_leaks(p, c.cache, o);
      nlohmann::ordered_json j;
      j["program"] = bf_file;
      j["runs"] = r.runs;
      nlohmann::ordered_json sites = nlohmann::ordered_json::array();
      for (const auto &s : r.sites)
        sites.push_back(s.str());
      j["sites"] = sites;
      nlohmann::ordered_json classes = nlohmann::ordered_json::array();
      for (const auto &[s, order] : r.classes)
        classes.push_back({{"site", s.str()}, {"order", order}});
      j["classes"] = classes;
      std::cout << j.dump(2) << "\n";
      return r.sites.empty() ? 0 : 1;
    }
    if (*pi) {
      RunConfig c;
      c.unroll_bound = pi_bound;
      std::cout << print_program(load_program(pi_file, c));
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "symsc: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
