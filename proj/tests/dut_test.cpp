// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "m3lv/dut/core.hpp"
#include "m3lv/tb/campaign.hpp"
#include "m3lv/tb/directed.hpp"
#include "m3lv/tb/environment.hpp"

namespace {

using namespace m3lv;
using namespace m3lv::tb;
namespace o = isa::ops;

CampaignResult run(Stimulus s, uint8_t code_wait = 0, uint8_t sram_wait = 0, dut::BugId bug = dut::BugId::kNone) {
  EnvironmentConfig cfg;
  cfg.test = "unit";
  cfg.stimulus = std::move(s);
  cfg.code_wait = code_wait;
  cfg.sram_wait = sram_wait;
  cfg.bug = bug;
  cfg.record = true;
  cfg.stop_on_mismatch = false;
  return run_environment(cfg);
}

TEST(Pipeline, FirstRetireAfterFillingThreeStages) {
  const auto r = run(directed::add_directed());
  ASSERT_TRUE(r.passed());
  ASSERT_FALSE(r.retirements.empty());
  // Fetch at cycle 0, decode at 1, execute at 2.
  EXPECT_GE(r.retirements.front().cycle, 2u);
  EXPECT_EQ(r.retirements.front().event.pc, kCodeStart);
}

TEST(Pipeline, BackToBackAluRetiresEveryCycle) {
  StimulusBuilder s;
  s.nops(2).emit({o::movs_imm(0, 1), o::movs_imm(1, 2), o::movs_imm(2, 3), o::movs_imm(3, 4)});
  const auto r = run(s.done());
  ASSERT_TRUE(r.passed());
  for (size_t k = 3; k < 6; ++k) EXPECT_EQ(r.retirements[k].cycle, r.retirements[k - 1].cycle + 1);
}

TEST(Pipeline, TakenBranchRetiresNoWrongPath) {
  const auto r = run(directed::witness_br_off2());
  ASSERT_TRUE(r.passed());
  for (const auto& t : r.retirements)
    EXPECT_NE(t.event.inst, std::optional(o::movs_imm(1, 0xEE))) << "wrong-path instruction retired";
}

TEST(Pipeline, LoadStallsByWaitStates) {
  const auto gap = [](uint8_t wait) {
    StimulusBuilder s;
    s.materialize(1, isa::kSramBase);
    s.nops(2).emit({o::ldr_imm(0, 1, 0)}).nops(2);
    const auto r = run(s.done(), 0, wait);
    EXPECT_TRUE(r.passed());
    for (size_t k = 1; k < r.retirements.size(); ++k)
      if (r.retirements[k].event.inst && r.retirements[k].event.inst->mnemonic == isa::Mnemonic::kLdrImm)
        return r.retirements[k].cycle - r.retirements[k - 1].cycle;
    ADD_FAILURE() << "no load retired";
    return uint64_t{0};
  };
  EXPECT_EQ(gap(2), gap(0) + 2);
  EXPECT_EQ(gap(3), gap(0) + 3);
}

TEST(Pipeline, FetchWaitStatesSlowButDoNotChangeResults) {
  const auto fast = run(directed::alu_immediate_matrix(), 0, 0);
  const auto slow = run(directed::alu_immediate_matrix(), 3, 0);
  ASSERT_TRUE(fast.passed());
  ASSERT_TRUE(slow.passed());
  EXPECT_GT(slow.cycles, fast.cycles);
  ASSERT_EQ(fast.retirements.size(), slow.retirements.size());
  for (size_t k = 0; k < fast.retirements.size(); ++k)
    EXPECT_EQ(fast.retirements[k].event, slow.retirements[k].event);
}

TEST(Pipeline, RetirementSequenceIsDense) {
  const auto r = run(directed::irq_tail_chain());
  ASSERT_TRUE(r.passed());
  for (size_t k = 0; k < r.retirements.size(); ++k) EXPECT_EQ(r.retirements[k].event.seq, k);
}

// Index of the first retirement carrying exception `kind`.
size_t first_exception(const CampaignResult& r, isa::ExceptionKind kind) {
  for (size_t k = 0; k < r.retirements.size(); ++k)
    if (r.retirements[k].event.exception && r.retirements[k].event.exception->kind == kind) return k;
  return r.retirements.size();
}

TEST(Interrupts, LatencyConstants) {
  // Zero wait states. Entry: pend to the handler's first retirement. Tail
  // chain: BX entering execute to the chained handler's first retirement.
  const auto a = run(directed::irq_entry());
  ASSERT_TRUE(a.passed());
  const size_t ea = first_exception(a, isa::ExceptionKind::kEntry);
  ASSERT_LT(ea + 1, a.retirements.size());
  const uint64_t k_entry = a.retirements[ea + 1].cycle - a.irq_applied.back();

  const auto b = run(directed::irq_tail_chain());
  ASSERT_TRUE(b.passed());
  const size_t eb = first_exception(b, isa::ExceptionKind::kTailChain);
  ASSERT_TRUE(eb > 0 && eb + 1 < b.retirements.size());
  const uint64_t k_tail = b.retirements[eb + 1].cycle - (b.retirements[eb - 1].cycle + 1);

  EXPECT_EQ(k_entry, 13u);
  EXPECT_EQ(k_tail, 7u);
}

TEST(Core, InjectBugAfterClockThrows) {
  auto mem = isa::MemoryImage::standard();
  mem.write32(0, kDefaultSp);
  mem.write32(4, kCodeStart | 1);
  dut::Core core(mem);
  core.inject_bug(dut::BugId::kFlagZ16);
  EXPECT_EQ(core.bug(), dut::BugId::kFlagZ16);
  core.clock({}, {}, NvicDirective::none());
  EXPECT_THROW(core.inject_bug(dut::BugId::kNone), std::logic_error);
}

TEST(Core, IcodeFetchesAreAlignedWordReads) {
  for (const char* name : {"branches", "literal_nop", "irq_nested"}) {
    const DirectedTest* t = find_directed(name);
    ASSERT_NE(t, nullptr);
    auto cfg = make_config(RunRequest{.test = name});
    auto mem = isa::MemoryImage::standard(t->code_wait, t->sram_wait);
    drive(cfg.stimulus, mem);
    bus::BusMemory bm(std::move(mem));
    dut::Core core(bm.image());
    for (int c = 0; c < 400 && !core.quiescent(); ++c) {
      const auto qi = core.icode_request();
      if (qi.htrans == bus::htrans::kNonseq) {
        EXPECT_EQ(qi.hsize, bus::hsize::kWord);
        EXPECT_EQ(qi.hwrite, 0);
        EXPECT_EQ(qi.hburst, bus::hburst::kSingle);
        EXPECT_EQ(qi.haddr % 4, 0u);
      }
      const auto ri = bm.memory_step(bus::Port::kIcode, qi);
      const auto rd = bm.memory_step(bus::Port::kDcode, core.dcode_request());
      core.clock(ri, rd, NvicDirective::none());
    }
    for (const auto& f : core.icode_log()) EXPECT_EQ(f.addr % 4, 0u);
  }
}

TEST(Bugs, CleanCoreRunsTheWholeSuite) {
  for (const auto& r : run_all(suite_requests())) EXPECT_TRUE(r.passed()) << r.test;
}

class BugWitness : public ::testing::TestWithParam<dut::BugId> {};

TEST_P(BugWitness, WitnessProgramExposesBug) {
  const dut::BugId bug = GetParam();
  const DirectedTest& w = witness_for(bug);
  RunRequest clean{.test = w.name};
  EXPECT_TRUE(run_request(clean).passed());
  RunRequest buggy{.test = w.name, .bug = bug};
  const auto r = run_request(buggy);
  EXPECT_FALSE(r.mismatches.empty()) << dut::bug_name(bug);
}

INSTANTIATE_TEST_SUITE_P(AllBugs, BugWitness, ::testing::ValuesIn(dut::kAllBugs),
                         [](const auto& info) { return std::string(dut::bug_name(info.param)); });

}  // namespace
