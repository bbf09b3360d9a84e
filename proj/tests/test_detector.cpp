// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "common.hpp"

using namespace symsc;

namespace {

struct ConcLeak {
  ExprContext c;
  EnumerativeBackend solver;
  Program p = test::load("conc_leak");
  CacheConfig cfg = small_direct_preset();
  Domains d = program_domains(p, cfg);
  Expr k = c.var("k", 8);
  Expr pcon = c.ule(k, c.constant(8, 127));

  Expr tau(std::vector<int> order, size_t i) {
    Executor ex(c, p, solver, d);
    return hit_constraint(c, test::walk(ex, order).trace, i, cfg);
  }
  LeakQuery query(Expr t) { return LeakQuery{pcon, t, {"k"}, d}; }
};

} // namespace

TEST(Precise, Tau3GivesZeroAndOne) {
  ConcLeak f;
  auto r = solve_precise(f.c, f.solver, f.query(f.tau({1, 1, 2, 1}, 3)));
  ASSERT_EQ(r.status, SatStatus::Sat);
  EXPECT_EQ(r.k1.at("k"), 0u);
  EXPECT_EQ(r.k2.at("k"), 1u);
  auto v = check_witness(f.pcon, f.tau({1, 1, 2, 1}, 3), r);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->first, Verdict::Hit);
  EXPECT_EQ(v->second, Verdict::Miss);
}

TEST(Precise, ConstantTauNeverLeaks) {
  ConcLeak f;
  EXPECT_EQ(solve_precise(f.c, f.solver, f.query(f.c.false_())).status, SatStatus::Unsat);
  EXPECT_EQ(solve_precise(f.c, f.solver, f.query(f.c.true_())).status, SatStatus::Unsat);
  EXPECT_EQ(f.solver.calls(), 0u);
}

TEST(Precise, ThresholdSeparates) {
  ExprContext c;
  EnumerativeBackend s;
  Expr k = c.var("k", 8);
  LeakQuery q{c.true_(), c.ult(k, c.constant(8, 128)), {"k"}, {{"k", VarDomain::full(8)}}};
  auto r = solve_precise(c, s, q);
  ASSERT_EQ(r.status, SatStatus::Sat);
  EXPECT_NE(r.k1.at("k") < 128, r.k2.at("k") < 128);
}

TEST(TwoStep, Tau3FindsOneOnSecondStep) {
  ConcLeak f;
  Expr t = f.tau({1, 1, 2, 1}, 3);
  auto r = solve_two_step(f.c, f.solver, f.query(t));
  ASSERT_EQ(r.status, SatStatus::Sat);
  EXPECT_LE(r.k1.at("k"), 127u);
  EXPECT_NE(r.k1.at("k"), 1u);
  EXPECT_EQ(r.k2.at("k"), 1u);
  EXPECT_TRUE(check_witness(f.pcon, t, r));
}

TEST(TwoStep, AlwaysHitHasNoSecondStep) {
  ExprContext c;
  EnumerativeBackend s;
  Expr k = c.var("k", 8);
  Expr t = c.lor(c.ult(k, c.constant(8, 200)), c.uge(k, c.constant(8, 200)));
  auto r = solve_two_step(c, s, LeakQuery{c.true_(), t, {"k"}, {{"k", VarDomain::full(8)}}});
  EXPECT_EQ(r.status, SatStatus::Unsat);
}

TEST(TwoStep, NoHitSideMeansNoLeak) {
  ExprContext c;
  EnumerativeBackend s;
  Expr k = c.var("k", 8);
  Expr t = c.eq(k, c.constant(8, 3));
  LeakQuery q{c.ne(k, c.constant(8, 3)), t, {"k"}, {{"k", VarDomain::full(8)}}};
  EXPECT_EQ(solve_two_step(c, s, q, true).status, SatStatus::Unsat);
  EXPECT_EQ(solve_two_step(c, s, q, false).status, SatStatus::Unsat);
  LeakQuery q2{c.true_(), c.ne(k, c.constant(8, 9)), {"k"}, {{"k", VarDomain::full(8)}}};
  auto r = solve_two_step(c, s, q2, false);
  ASSERT_EQ(r.status, SatStatus::Sat);
  EXPECT_EQ(r.k2.at("k"), 9u);
}

TEST(Witness, RejectsNonSeparatingPairs) {
  ConcLeak f;
  Expr t = f.tau({1, 1, 2, 1}, 3);
  DivergenceResult w;
  w.status = SatStatus::Sat;
  w.k1 = {{"k", 0}};
  w.k2 = {{"k", 5}};
  EXPECT_FALSE(check_witness(f.pcon, t, w));
  w.k2 = {{"k", 200}}; // off the path
  EXPECT_FALSE(check_witness(f.pcon, t, w));
}

TEST(Adversarial, CrossThreadRequirement) {
  ConcLeak f;
  Executor ex(f.c, f.p, f.solver, f.d);
  Explorer probe(f.c, f.p, f.cfg, f.solver);
  // store p[k] after T2's load tmp
  SymbolicState s = test::walk(ex, {1, 1, 2});
  auto store = ex.enabled_events(s);
  ASSERT_EQ(store.size(), 1u);
  EXPECT_TRUE(probe.adversarial_access(s, ex.prepare_access(s, store[0])));
  // load p[k] with only T1's own q access before it
  SymbolicState t = test::walk(ex, {1});
  auto en = ex.enabled_events(t);
  ASSERT_EQ(en[0].tid, 1);
  EXPECT_FALSE(probe.adversarial_access(t, ex.prepare_access(t, en[0])));
  // the adversary's own access
  EXPECT_EQ(en[1].tid, 2);
  EXPECT_FALSE(probe.adversarial_access(t, ex.prepare_access(t, en[1])));
}

TEST(Divergence, HandDerivedRows) {
  ConcLeak f;
  Executor ex(f.c, f.p, f.solver, f.d);
  ExploreOptions o;
  o.check_sequential = false;
  Explorer probe(f.c, f.p, f.cfg, f.solver, o);
  SymbolicState s = test::walk(ex, {1, 1});
  auto en = ex.enabled_events(s);
  ASSERT_EQ(en.size(), 2u);
  EXPECT_FALSE(probe.divergent_cache_behavior(s, en[1])); // load tmp: adversary thread
  SymbolicState u = ex.advance(ex.next_symbolic_state(s, en[1]));
  auto leak = probe.divergent_cache_behavior(u, ex.enabled_events(u)[0]);
  ASSERT_TRUE(leak);
  EXPECT_EQ(leak->site.line, 11);
  EXPECT_EQ(leak->k1.at("k"), 0u);
  EXPECT_EQ(leak->k2.at("k"), 1u);
  EXPECT_TRUE(leak->replay_confirmed);
  EXPECT_EQ(schedule_string(leak->schedule), "T1@6 T1@9 T2@13 T1@11");
}
