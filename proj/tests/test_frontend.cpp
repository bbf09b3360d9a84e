// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "common.hpp"

using namespace symsc;

namespace {

std::string parse_error(const std::string &src) {
  try {
    parse_program(src);
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

size_t count_loads(const Block &b) {
  size_t n = 0;
  for (const auto &s : b) {
    if (std::holds_alternative<LoadStmt>(s.node))
      ++n;
    else if (auto *i = std::get_if<IfStmt>(&s.node))
      n += count_loads(i->then_body) + count_loads(i->else_body);
  }
  return n;
}

} // namespace

TEST(Frontend, ConcurrentExampleShape) {
  Program p = parse_program(read_file(test::corpus_path("conc_leak")));
  EXPECT_EQ(p.threads.size(), 2u);
  EXPECT_EQ(p.decls.size(), 4u);
  EXPECT_EQ(p.secret_bits(), 8u);
  ASSERT_EQ(p.secret_inputs().size(), 1u);
  EXPECT_EQ(p.secret_inputs()[0].first, "k");
  EXPECT_EQ(p.critical_tid(), 1);
  EXPECT_TRUE(p.find_thread(2)->adversary);
  EXPECT_EQ(*p.find_decl("tmp")->base, 513u);
}

TEST(Frontend, EmptyThreadBody) {
  Program p = parse_program("thread 1 { }");
  ASSERT_EQ(p.threads.size(), 1u);
  EXPECT_TRUE(p.threads[0].body.empty());
  EXPECT_TRUE(p.threads[0].critical); // a lone thread is critical
}

TEST(Frontend, OverlapNamesBothDeclarations) {
  std::string e = parse_error("array a[64] elem 1 at 50\narray b[8] elem 1 at 100\nthread 1 { }");
  EXPECT_NE(e.find("'a'"), std::string::npos) << e;
  EXPECT_NE(e.find("'b'"), std::string::npos) << e;
  EXPECT_NE(e.find("overlap"), std::string::npos) << e;
}

TEST(Frontend, ErrorsCarryPosition) {
  EXPECT_NE(parse_error("thread 1 {\n  load r, nowhere\n}").find("2:"), std::string::npos);
  EXPECT_NE(parse_error("array s[4] elem 3 at 0\nthread 1 { }").find("1:"), std::string::npos);
  EXPECT_NE(parse_error("scalar x elem 1 at 0\nthread 1 { r := s[1] }"), "");
  EXPECT_NE(parse_error("thread 1 { r := q + 1 }"), "");
  EXPECT_NE(parse_error("thread 1 critical { }\nthread 2 critical { }"), "");
  EXPECT_NE(parse_error("thread 1 { }\nthread 1 { }"), "");
}

TEST(Frontend, ForLoopUnrollsInOrder) {
  Program p = parse_program("array S[16] elem 1 at 0\narray x[4] elem 1 at 16\n"
                            "thread 1 { for i in 0..2 { load v, x[i]\n load r, S[v] } }");
  Program u = unroll_loops(p, 8);
  EXPECT_FALSE(has_loops(u));
  ASSERT_EQ(u.threads[0].body.size(), 4u);
  const auto &first = std::get<LoadStmt>(u.threads[0].body[0].node);
  const auto &third = std::get<LoadStmt>(u.threads[0].body[2].node);
  EXPECT_EQ(first.target, "x");
  EXPECT_EQ(first.index->value, 0u);
  EXPECT_EQ(third.index->value, 1u);
}

TEST(Frontend, LoopBoundExceeded) {
  Program p = parse_program("array x[16] elem 1 at 0\nthread 1 { for i in 0..10 { load r, x[i] } }");
  EXPECT_THROW(unroll_loops(p, 4), Error);
}

TEST(Frontend, EmptyLoopDisappears) {
  Program p = parse_program("array x[16] elem 1 at 0\nthread 1 { for i in 0..0 { load r, x[i] } }");
  EXPECT_TRUE(unroll_loops(p, 4).threads[0].body.empty());
}

TEST(Frontend, WhileNeedsBound) {
  Program ok = parse_program("array x[4] elem 1 at 0\ninput n width 8 secret\n"
                             "thread 1 { i := 0\n while (i < n) bound 3 { load r, x[i]\n i := i + 1 } }");
  Program u = unroll_loops(ok, 4);
  EXPECT_FALSE(has_loops(u));
  EXPECT_EQ(count_loads(u.threads[0].body), 3u);
  Program bad = parse_program("array x[4] elem 1 at 0\ninput n width 8 secret\n"
                              "thread 1 { i := 0\n while (i < n) { i := i + 1 } }");
  EXPECT_THROW(unroll_loops(bad, 4), Error);
}

TEST(Frontend, PrintParseRoundTrip) {
  for (const auto &e : test::corpus()) {
    Program p = parse_program(read_file(test::corpus_path(e.file)));
    Program q = parse_program(print_program(p));
    EXPECT_TRUE(same_program(p, q)) << e.file;
  }
}

TEST(Frontend, SynthesizeAdversaryOnRepairedProgram) {
  Program p = parse_program(read_file(test::corpus_path("seq_fixed")));
  Program q = synthesize_adversary(p, small_direct_preset());
  ASSERT_EQ(q.threads.size(), 2u);
  EXPECT_EQ(q.critical_tid(), 1);
  const Thread &adv = q.threads[1];
  EXPECT_TRUE(adv.adversary);
  EXPECT_EQ(count_loads(adv.body), 1u);
  const Declaration *d = q.find_decl(std::get<LoadStmt>(adv.body[0].node).target);
  ASSERT_NE(d, nullptr);
  EXPECT_TRUE(d->symbolic());
  EXPECT_EQ(*d->window, 4u * 512u);
}

TEST(Frontend, SynthesizeRejectsExistingAdversary) {
  Program p = parse_program(read_file(test::corpus_path("conc_leak")));
  EXPECT_THROW(synthesize_adversary(p, small_direct_preset()), Error);
}

TEST(Frontend, SynthesizeWithoutCriticalAccesses) {
  Program p = parse_program("input k width 8 secret\nthread 1 { r := k + 1 }");
  Program q = synthesize_adversary(p, small_direct_preset());
  EXPECT_EQ(q.threads.size(), 2u);
  auto r = test::run(q, small_direct_preset());
  EXPECT_TRUE(r.leaks.empty());
  EXPECT_EQ(r.stats.interleavings, 1u);
}
