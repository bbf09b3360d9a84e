// SPDX-License-Identifier: Apache-2.0
// Library usage: parse a program, explore it, replay each witness.

#include <iostream>

#include "symsc/report.hpp"

using namespace symsc;

static const char *kProgram = R"(
array table[16] elem 1 at 0
scalar key elem 1 at 64 secret
scalar probe elem 1 at 36
thread 1 critical {
  load a, table[key & 15]
  load b, table[0]
}
thread 2 adversary {
  load c, probe
}
)";

int main() {
  const CacheConfig cfg{32, 4, 1};
  Program p = parse_program(kProgram);
  EnumerativeBackend solver;
  ExploreResult r = explore(p, cfg, solver);

  std::cout << r.stats.interleavings << " interleavings, " << r.stats.solver_calls << " solver calls\n";
  for (const LeakReport &l : r.leaks) {
    std::cout << "leak at " << l.site.str() << " under " << schedule_string(l.schedule) << "\n";
    std::vector<int> order;
    for (const auto &st : l.schedule)
      order.push_back(st.tid);
    for (const Valuation *k : {&l.k1, &l.k2})
      std::cout << "  key=" << k->at("key") << "  " << behavior_string(replay(p, *k, order, cfg, true), 1) << "\n";
  }
  return 0;
}
