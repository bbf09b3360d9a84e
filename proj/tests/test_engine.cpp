// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "common.hpp"

using namespace symsc;

// ---- expressions ----

TEST(Expr, ConstantFoldingAndHashConsing) {
  ExprContext c;
  Expr k = c.var("k", 8);
  EXPECT_EQ(c.add(k, c.constant(8, 0)), k);
  EXPECT_EQ(c.add(k, c.constant(8, 1)), c.add(k, c.constant(8, 1)));
  EXPECT_TRUE(c.eq(k, k).is_true());
  EXPECT_TRUE(c.ne(k, k).is_false());
  EXPECT_EQ(c.add(c.constant(8, 250), c.constant(8, 10)).value(), 4u);
  EXPECT_TRUE(c.land(c.false_(), c.ult(k, c.constant(8, 3))).is_false());
}

TEST(Expr, WidthMismatchIsAnError) {
  ExprContext c;
  EXPECT_THROW(c.add(c.var("a", 8), c.var("b", 16)), Error);
  EXPECT_THROW(c.land(c.var("a", 8), c.true_()), Error);
}

TEST(Expr, SubstituteThenEvaluateMatchesEvaluate) {
  ExprContext c;
  Expr k = c.var("k", 8), x = c.var("x", 8);
  Expr e = c.ite(c.ule(k, c.constant(8, 127)), c.sub(c.constant(8, 255), k), c.bit_xor(k, x));
  for (uint64_t kv = 0; kv < 256; kv += 7) {
    Valuation v{{"k", kv}, {"x", 0x5a}};
    Expr s = c.substitute(e, v);
    ASSERT_TRUE(s.is_const());
    EXPECT_EQ(s.value(), evaluate(e, v));
  }
}

TEST(Expr, CompiledMatchesTreeEvaluation) {
  ExprContext c;
  Expr a = c.var("a", 16), b = c.var("b", 16);
  Expr e = c.add(c.mul(a, c.constant(16, 3)), c.lshr(b, c.constant(16, 2)));
  Expr f = c.ult(c.bit_and(a, b), c.bit_or(a, c.constant(16, 7)));
  std::array<Expr, 2> roots{e, f};
  CompiledExpr ce(roots, {"a", "b"});
  std::mt19937_64 rng(7);
  for (int n = 0; n < 500; ++n) {
    uint64_t av = rng() & 0xffff, bv = rng() & 0xffff;
    std::array<uint64_t, 2> in{av, bv};
    auto out = ce.eval(in);
    Valuation v{{"a", av}, {"b", bv}};
    EXPECT_EQ(out[0], evaluate(e, v));
    EXPECT_EQ(out[1], evaluate(f, v));
  }
}

TEST(Domain, IntervalsAreSound) {
  ExprContext c;
  Domains d{{"k", VarDomain::full(8)}};
  Expr k = c.var("k", 8);
  Expr addr = c.add(c.constant(32, 257), c.zext(c.sub(c.constant(8, 255), k), 32));
  Interval iv = interval_of(addr, d);
  for (uint64_t kv = 0; kv < 256; ++kv) {
    uint64_t a = evaluate(addr, {{"k", kv}});
    EXPECT_LE(iv.lo, a);
    EXPECT_GE(iv.hi, a);
  }
  EXPECT_EQ(interval_of(c.bit_and(k, c.constant(8, 15)), d).hi, 15u);
}

// ---- executor ----

namespace {

struct Fixture {
  ExprContext ctx;
  EnumerativeBackend solver;
  Program p;
  Domains doms;
  std::unique_ptr<Executor> ex;

  explicit Fixture(const std::string &file, CacheConfig cfg = small_direct_preset()) {
    p = test::load(file, AdversaryMode::Fixed, cfg);
    doms = program_domains(p, cfg);
    ex = std::make_unique<Executor>(ctx, p, solver, doms);
  }
};

} // namespace

TEST(Executor, BranchArmConjoinsCondition) {
  Fixture f("conc_leak");
  SymbolicState s = f.ex->advance(f.ex->initial());
  auto br = f.ex->branch_events(s);
  ASSERT_EQ(br.size(), 2u);
  EXPECT_TRUE(br[0].arm);
  SymbolicState t = f.ex->next_symbolic_state(s, br[0]);
  Expr k = f.ctx.var("k", 8);
  EXPECT_EQ(t.pcon, f.ctx.ule(k, f.ctx.constant(8, 127)));
  EXPECT_TRUE(t.trace.empty());
}

TEST(Executor, InitialEnabledEventsOnePerThread) {
  Fixture f("conc_leak");
  SymbolicState s = f.ex->advance(f.ex->initial());
  for (const auto &b : f.ex->branch_events(s)) {
    SymbolicState t = f.ex->advance(f.ex->next_symbolic_state(s, b));
    auto en = f.ex->enabled_events(t);
    ASSERT_EQ(en.size(), 2u);
    EXPECT_EQ(en[0].tid, 1);
    EXPECT_EQ(en[0].site.line, b.arm ? 6 : 8);
    EXPECT_EQ(en[1].tid, 2);
    EXPECT_EQ(en[1].site.line, 13);
  }
}

TEST(Executor, LoadAddressFollowsLayout) {
  Fixture f("conc_leak");
  SymbolicState s = f.ex->advance(f.ex->initial());
  SymbolicState t = f.ex->advance(f.ex->next_symbolic_state(s, f.ex->branch_events(s)[0]));
  SymbolicState u = f.ex->next_symbolic_state(t, f.ex->enabled_events(t)[0]);
  ASSERT_EQ(u.trace.size(), 1u);
  const AccessRecord &r = u.trace[0];
  EXPECT_EQ(r.pcon, t.pcon);
  EXPECT_EQ(r.decl, "q");
  for (uint64_t k = 0; k <= 127; ++k)
    EXPECT_EQ(evaluate(r.addr, {{"k", k}}), 257 + 255 - k);
}

TEST(Executor, AssignmentLeavesTraceAlone) {
  ExprContext ctx;
  EnumerativeBackend solver;
  Program p = parse_program("array a[4] elem 1 at 0\nthread 1 { r := 5\n load x, a[r & 3] }");
  Executor ex(ctx, p, solver, program_domains(p, small_direct_preset()));
  SymbolicState s = ex.advance(ex.initial());
  EXPECT_TRUE(s.trace.empty());
  EXPECT_EQ(s.threads[0].regs.at("r"), ctx.constant(32, 5));
  SymbolicState t = ex.next_symbolic_state(s, ex.enabled_events(s)[0]);
  EXPECT_EQ(t.trace[0].addr, ctx.constant(32, 1));
}

TEST(Executor, Feasibility) {
  Fixture f("conc_leak");
  Expr k = f.ctx.var("k", 8);
  Expr le = f.ctx.ule(k, f.ctx.constant(8, 127));
  EXPECT_FALSE(f.ex->feasible(f.ctx.land(le, f.ctx.lnot(le))));
  EXPECT_TRUE(f.ex->feasible(le));
  EXPECT_TRUE(f.ex->feasible(f.ctx.land(le, f.ctx.eq(k, f.ctx.constant(8, 1)))));
}

TEST(Executor, StoreThenLoadReadsBack) {
  ExprContext ctx;
  EnumerativeBackend solver;
  Program p = parse_program("array a[4] elem 1 at 0\ninput k width 8 secret\n"
                            "thread 1 { store a[k & 3], k\n load x, a[1]\n store a[2], x }");
  Executor ex(ctx, p, solver, program_domains(p, small_direct_preset()));
  SymbolicState s = ex.advance(ex.initial());
  while (!ex.enabled_events(s).empty())
    s = ex.advance(ex.next_symbolic_state(s, ex.enabled_events(s)[0]));
  Expr x = s.threads[0].regs.at("x");
  // x = k when k selects slot 1, otherwise the (environment) initial value.
  for (uint64_t k = 0; k < 256; ++k) {
    Valuation v{{"k", k}};
    for (const auto &[n, w] : free_vars(x))
      if (is_environment_var(n))
        v[n] = 0;
    EXPECT_EQ(evaluate(x, v), (k & 3) == 1 ? k : 0u);
  }
}
