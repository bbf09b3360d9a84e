// SPDX-License-Identifier: Apache-2.0
// Cross-checks the built-in enumeration against an external z3.
#include <random>

#include <gtest/gtest.h>

#include "common.hpp"

using namespace symsc;

namespace {

ExternalBackend z3() { return ExternalBackend({SYMSC_Z3}); }

Expr random_term(ExprContext &ctx, std::mt19937 &rng, const std::vector<Expr> &leaves, int depth) {
  std::uniform_int_distribution<int> pick(0, 7);
  if (depth == 0 || pick(rng) < 2) {
    if (pick(rng) < 3)
      return ctx.constant(8, rng() & 0xff);
    return leaves[rng() % leaves.size()];
  }
  Expr a = random_term(ctx, rng, leaves, depth - 1);
  Expr b = random_term(ctx, rng, leaves, depth - 1);
  switch (pick(rng)) {
  case 0: return ctx.add(a, b);
  case 1: return ctx.sub(a, b);
  case 2: return ctx.mul(a, b);
  case 3: return ctx.bit_and(a, b);
  case 4: return ctx.bit_xor(a, b);
  case 5: return ctx.lshr(a, ctx.constant(8, rng() % 8));
  case 6: return ctx.shl(a, ctx.constant(8, rng() % 8));
  default: return ctx.bit_or(a, b);
  }
}

Expr random_formula(ExprContext &ctx, std::mt19937 &rng, const std::vector<Expr> &leaves) {
  Expr a = random_term(ctx, rng, leaves, 3);
  Expr b = random_term(ctx, rng, leaves, 3);
  Expr c = random_term(ctx, rng, leaves, 2);
  Expr f = (rng() & 1) ? ctx.eq(a, b) : ctx.ult(a, b);
  return (rng() & 1) ? ctx.land(f, ctx.ne(c, ctx.constant(8, rng() & 0xff))) : ctx.lor(f, ctx.eq(c, a));
}

} // namespace

TEST(Z3, AgreesWithEnumerationOnRandomQueries) {
  ExprContext ctx;
  std::mt19937 rng(7);
  Domains doms{{"x", VarDomain::full(8)}, {"y", {8, 0, 63, 1}}};
  std::vector<Expr> leaves{ctx.var("x", 8), ctx.var("y", 8)};
  EnumerativeBackend en;
  ExternalBackend ext = z3();
  int sat = 0;
  for (int n = 0; n < 60; ++n) {
    Expr f = random_formula(ctx, rng, leaves);
    CheckResult a = en.check(ctx, f, doms);
    CheckResult b = ext.check(ctx, f, doms);
    ASSERT_EQ(a.status, b.status) << n;
    if (b.status == SatStatus::Sat) {
      ++sat;
      Valuation m = b.model;
      for (const auto &[v, w] : free_vars(f))
        EXPECT_TRUE(doms.at(v).contains(m.at(v)));
      EXPECT_EQ(evaluate(f, m), 1u);
    }
  }
  EXPECT_GT(sat, 5);
}

TEST(Z3, DivergenceAgrees) {
  ExprContext ctx;
  Domains doms{{"k", {8, 0, 127, 1}}};
  Expr k = ctx.var("k", 8);
  Expr tau = ctx.eq(k, ctx.constant(8, 1));
  ExternalBackend ext = z3();
  DivergenceResult r = ext.divergence(ctx, {ctx.true_(), tau, {"k"}, doms});
  ASSERT_EQ(r.status, SatStatus::Sat);
  EXPECT_NE(evaluate(tau, r.k1), evaluate(tau, r.k2));
  DivergenceResult u = ext.divergence(ctx, {ctx.true_(), ctx.ult(k, ctx.constant(8, 200)), {"k"}, doms});
  EXPECT_EQ(u.status, SatStatus::Unsat);
}

TEST(Z3, ExplorerSitesAgreeAcrossBackends) {
  for (const auto &e : test::corpus()) {
    Program p = test::load(e.file, e.adv, e.cfg);
    EnumerativeBackend en;
    ExternalBackend ext = z3();
    ExploreResult a = explore(p, e.cfg, en);
    ExploreResult b = explore(p, e.cfg, ext);
    EXPECT_EQ(a.leak_sites(), b.leak_sites()) << e.label;
    EXPECT_TRUE(b.complete) << e.label;
    for (const auto &l : b.leaks)
      EXPECT_TRUE(l.replay_confirmed) << e.label;
  }
}
