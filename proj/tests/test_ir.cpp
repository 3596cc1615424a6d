// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "chamois/cfg.hpp"
#include "chamois/interpreter.hpp"
#include "chamois/parser.hpp"
#include "support/generators.hpp"

using namespace chamois;
using chamois::testing::Rng;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(CHAMOIS_SAMPLES_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* const kDiamond = R"(
func d(r1) entry 1 {
  1: if lt r1 r1 -> 2, 3
  2: r2 := 1 -> 4
  3: r2 := 2 -> 4
  4: return r2
}
)";

} // namespace

TEST(Parser, RunningExample) {
    const Function f = parse(slurp("running.ir"));
    EXPECT_EQ(f.name, "running");
    EXPECT_EQ(f.params, std::vector<Reg>{1});
    EXPECT_EQ(f.entry, 1);
    EXPECT_EQ(f.code.size(), 3u);
    EXPECT_EQ(f.at(2), Instr(instr::Op{3, BinOp::sub, 1, 2, 3}));
    EXPECT_EQ(f.at(3), Instr(instr::Return{3}));
    EXPECT_TRUE(check_well_formed(f).empty());
}

TEST(Parser, AllInstructionForms) {
    const Function f = parse(R"(
        # comment
        func all(r1, r2) entry 7 {
          7: nop -> 8
          8: r3 := -12 -> 9   # trailing comment
          9: r4 := move r3 -> 10
          10: r5 := div r1 r2 -> 11
          11: if ge r5 r4 -> 12, 7
          12: return r5
        })");
    EXPECT_EQ(f.at(7), Instr(instr::Nop{8}));
    EXPECT_EQ(f.at(8), Instr(instr::Const{3, Int(-12), 9}));
    EXPECT_EQ(f.at(9), Instr(instr::Move{4, 3, 10}));
    EXPECT_EQ(f.at(10), Instr(instr::Op{5, BinOp::div, 1, 2, 11}));
    EXPECT_EQ(f.at(11), Instr(instr::Branch{Cmp::ge, 5, 4, 12, 7}));
}

TEST(Parser, BigConstants) {
    const Function f = parse("func b() entry 1 { 1: r1 := 123456789012345678901234567890 -> 2 2: return r1 }");
    EXPECT_EQ(std::get<instr::Const>(f.at(1)).value, Int("123456789012345678901234567890"));
}

TEST(Parser, ErrorsCarryPositions) {
    try {
        (void)parse("func f() entry 1 {\n  1: r1 := 3 -> 2\n  1: return r1\n}");
        FAIL() << "duplicate location accepted";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("duplicate location 1"), std::string::npos);
    }
    try {
        (void)parse("func f() entry 1 {\n  1: r1 := 3 -> 9\n}");
        FAIL() << "dangling successor accepted";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("undefined location 9"), std::string::npos);
    }
    EXPECT_THROW((void)parse("func f() entry 2 { 1: return r1 }"), ParseError);
    EXPECT_THROW((void)parse("func f() entry 1 { 1: r1 := pow r1 r1 -> 1 }"), ParseError);
    EXPECT_THROW((void)parse("func f() entry 1 { 0: return r1 }"), ParseError);
    EXPECT_THROW((void)parse("func f(r1, r1) entry 1 { 1: return r1 }"), ParseError);
    EXPECT_THROW((void)parse("func f() entry 1 { 1: return x1 }"), ParseError);
    EXPECT_THROW((void)parse("func f() entry 1 { 1: return r1 } extra"), ParseError);
    EXPECT_THROW((void)parse("func f() entry 1 { 1: return r1 $ }"), ParseError);
}

TEST(Parser, BlockFileLiveTrailer) {
    const BlockFile b = parse_block_file(slurp("pair_src.blk"));
    EXPECT_EQ(b.live, (std::vector<Reg>{3, 4, 5, 2}));
    const BlockFile plain = parse_block_file("func f(r1) entry 1 { 1: return r1 }");
    EXPECT_TRUE(plain.live.empty());
}

TEST(Printer, RoundTrips) {
    for (const char* name : {"running.ir", "loop.ir", "diamond.ir", "two_adds.ir"}) {
        const Function f = parse(slurp(name));
        EXPECT_EQ(parse(print(f)), f) << name;
    }
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const Function f = chamois::testing::random_function(rng);
        ASSERT_EQ(parse(print(f)), f) << print(f);
    }
}

TEST(Interpreter, RunningExampleReturnsZero) {
    const Function f = parse(slurp("running.ir"));
    for (int x : {-3, 0, 17}) {
        const std::vector<Int> in{Int(x)};
        EXPECT_EQ(interpret(f, in, 100), Outcome(Returned{0}));
    }
}

TEST(Interpreter, LoopCountsToTen) {
    const Function f = parse(slurp("loop.ir"));
    EXPECT_EQ(interpret(f, {}, 1000), Outcome(Returned{10}));
    EXPECT_EQ(interpret(f, {}, 5), Outcome(OutOfFuel{}));
}

TEST(Interpreter, DivisionTruncatesAndTraps) {
    const Function f = parse("func q(r1, r2) entry 1 { 1: r3 := div r1 r2 -> 2 2: return r3 }");
    auto run = [&](int a, int b) {
        const std::vector<Int> in{Int(a), Int(b)};
        return interpret(f, in, 10);
    };
    EXPECT_EQ(run(7, 2), Outcome(Returned{3}));
    EXPECT_EQ(run(-7, 2), Outcome(Returned{-3}));
    EXPECT_EQ(run(7, -2), Outcome(Returned{-3}));
    EXPECT_EQ(run(1, 0), Outcome(Trapped{1}));
}

TEST(Interpreter, Misuse) {
    const Function f = parse("func u(r1) entry 1 { 1: return r2 }");
    const std::vector<Int> in{Int(1)};
    EXPECT_THROW((void)interpret(f, in, 10), UsageError);
    EXPECT_THROW((void)interpret(f, {}, 10), UsageError);
}

TEST(Interpreter, ObserverSeesStateBeforeEachStep) {
    const Function f = parse(slurp("running.ir"));
    std::vector<Loc> seen;
    const std::vector<Int> in{Int(5)};
    (void)interpret(f, in, 10, [&](Loc l, const RegFile& regs) {
        seen.push_back(l);
        if (l == 2) {
            EXPECT_EQ(regs.at(2), 5);
        }
    });
    EXPECT_EQ(seen, (std::vector<Loc>{1, 2, 3}));
}

TEST(Cfg, DiamondOrder) {
    const Function f = parse(kDiamond);
    EXPECT_EQ(reverse_postorder(f), (std::vector<Loc>{1, 2, 3, 4}));
    EXPECT_TRUE(back_edges(f).empty());
    EXPECT_TRUE(widening_points(f).empty());
}

TEST(Cfg, LoopBackEdge) {
    const Function f = parse(slurp("loop.ir"));
    EXPECT_EQ(back_edges(f), (std::vector<std::pair<Loc, Loc>>{{5, 4}}));
    EXPECT_EQ(widening_points(f), std::set<Loc>{4});
    EXPECT_FALSE(acyclic_without_edges_into(f, {}));
    EXPECT_TRUE(acyclic_without_edges_into(f, {4}));
}

TEST(Cfg, RenumberPutsEntryHighest) {
    const Function f = parse(R"(
        func g(r1) entry 3 {
          3: if lt r1 r1 -> 9, 5
          5: return r1
          9: nop -> 3
          11: return r1
        })");
    const Renumbered rn = renumber(f);
    EXPECT_EQ(rn.dropped, std::vector<Loc>{11});
    EXPECT_EQ(rn.function.entry, 3);
    EXPECT_EQ(rn.new_of_old.at(3), 3);
    EXPECT_EQ(rn.new_of_old.at(9), 2);
    EXPECT_EQ(rn.new_of_old.at(5), 1);
    EXPECT_EQ(rn.function.at(3), Instr(instr::Branch{Cmp::lt, 1, 1, 2, 1}));
}

TEST(CfgProperty, WideningPointsCutEveryCycle) {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const Function f = chamois::testing::random_function(rng);
        ASSERT_TRUE(acyclic_without_edges_into(f, widening_points(f))) << print(f);
        const Renumbered rn = renumber(f);
        ASSERT_TRUE(check_well_formed(rn.function).empty());
        // Reverse postorder of the renumbered function is strictly descending.
        const auto order = reverse_postorder(rn.function);
        ASSERT_EQ(order.size(), rn.function.code.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            ASSERT_EQ(order[k], static_cast<Loc>(order.size() - k));
        }
    }
}
