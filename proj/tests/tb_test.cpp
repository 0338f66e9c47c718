// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "m3lv/tb/campaign.hpp"
#include "m3lv/tb/checker.hpp"
#include "m3lv/tb/coverage.hpp"
#include "m3lv/tb/driver.hpp"
#include "m3lv/tb/generator.hpp"

namespace {

using namespace m3lv;
using namespace m3lv::tb;
namespace o = isa::ops;

TEST(Generator, SameSeedSameStimulus) {
  GeneratorConfig g;
  g.seed = 77;
  g.count = 500;
  EXPECT_EQ(generate(g), generate(g));
  GeneratorConfig h = g;
  h.seed = 78;
  EXPECT_NE(generate(g), generate(h));
}

TEST(Generator, HonoursCountAndEndsWithHalt) {
  GeneratorConfig g;
  g.count = 300;
  const auto s = generate(g);
  size_t main = 0;
  for (const auto& it : s)
    if (it.kind == ItemKind::kInstruction && it.section == kMainSection) ++main;
  EXPECT_GE(main, 300u);
  EXPECT_LE(main, 300u + 16u);
}

TEST(Generator, AluOnlyWeightsStayInAlu) {
  GeneratorConfig g;
  g.count = 2000;
  g.irq_rate = 0;
  g.weights = GeneratorConfig::alu_only_weights();
  for (const auto& it : generate(g)) {
    if (it.kind != ItemKind::kInstruction || it.inst.mnemonic == isa::Mnemonic::kBkpt) continue;
    EXPECT_FALSE(isa::is_load_store(it.inst.mnemonic)) << isa::to_string(it.inst);
    EXPECT_FALSE(isa::is_branch(it.inst.mnemonic)) << isa::to_string(it.inst);
  }
}

TEST(Generator, InfeasibleConstraints) {
  GeneratorConfig g;
  g.weights.fill(0.0);
  EXPECT_THROW(Generator{g}, InfeasibleConstraint);
  g.weights = GeneratorConfig::default_weights();
  g.weights[0] = -1;
  EXPECT_THROW(Generator{g}, InfeasibleConstraint);
  g.weights[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Generator{g}, InfeasibleConstraint);
  g.weights = GeneratorConfig::default_weights();
  g.reg_max = 8;
  EXPECT_THROW(Generator{g}, InfeasibleConstraint);
  g.reg_max = 7;
  g.window_base = isa::kSramBase + 2;
  EXPECT_THROW(Generator{g}, InfeasibleConstraint);
  g.window_base = isa::kSramBase + isa::kSramSize - 0x100;
  EXPECT_THROW(Generator{g}, InfeasibleConstraint);
}

TEST(Driver, LaysOutProgramAndVectors) {
  StimulusBuilder s;
  s.emit(o::movs_imm(0, 1));
  s.emit(o::bx(14), 2);
  auto mem = isa::MemoryImage::standard();
  const auto p = drive(s.done(), mem);
  EXPECT_EQ(mem.read32(0), kDefaultSp);
  EXPECT_EQ(mem.read32(4), kCodeStart | 1);
  EXPECT_EQ(p.main_length, 2u);
  ASSERT_EQ(p.handlers.count(2), 1u);
  EXPECT_EQ(p.handlers.at(2) % 4, 0u);
  EXPECT_EQ(mem.read32(4 * 18), p.handlers.at(2) | 1);
  EXPECT_EQ(mem.read(p.handlers.at(2), isa::AccessSize::kHalf), std::optional<uint32_t>(isa::encode(o::bx(14))));
}

TEST(Driver, RejectsOversizedImages) {
  StimulusBuilder s;
  s.nops(isa::MemoryImage::standard().region_of(kCodeStart, 2)->size);
  auto mem = isa::MemoryImage::standard();
  EXPECT_THROW(drive(s.done(), mem), ImageOverlap);

  StimulusBuilder t;
  t.emit(o::bx(14), 100);  // vector 116 lands past the code base
  auto mem2 = isa::MemoryImage::standard();
  EXPECT_THROW(drive(t.done(), mem2), ImageOverlap);
}

isa::RetireEvent store_event() {
  isa::RetireEvent e;
  e.seq = 4;
  e.pc = 0x110;
  e.inst = o::str_imm(0, 1, 0);
  e.mem = isa::MemEffect{isa::MemKind::kWrite, isa::kSramBase, isa::AccessSize::kWord, 0x1234};
  return e;
}

bus::Transfer write_transfer(uint32_t data) {
  bus::Transfer t;
  t.port = bus::Port::kDcode;
  t.kind = bus::TransferKind::kWrite;
  t.addr = isa::kSramBase;
  t.data = data;
  return t;
}

TEST(Unpack, MatchesBusAgainstMemEffect) {
  const auto txn = check_unpack(store_event(), {write_transfer(0x1234)});
  ASSERT_TRUE(txn.observed);
  EXPECT_EQ(*txn.observed, *store_event().mem);
  EXPECT_THROW(check_unpack(store_event(), {write_transfer(0x1235)}), InconsistentEvent);
  EXPECT_THROW(check_unpack(store_event(), {}), InconsistentEvent);
  isa::RetireEvent alu;
  alu.inst = o::movs_imm(0, 0);
  EXPECT_THROW(check_unpack(alu, {write_transfer(0)}), InconsistentEvent);
  auto err = write_transfer(0x1234);
  err.response = bus::Response::kError;
  EXPECT_THROW(check_unpack(store_event(), {err}), InconsistentEvent);
}

TEST(Scoreboard, ReportsFirstDifferingField) {
  Scoreboard sb;
  auto exp = store_event();
  sb.expect(exp);
  EXPECT_FALSE(sb.compare({exp, {}, std::nullopt}));
  auto bad = exp;
  bad.mem->data = 0;
  sb.expect(exp);
  const auto m = sb.compare({bad, {}, std::nullopt});
  ASSERT_TRUE(m);
  EXPECT_EQ(m->field, "mem");
  EXPECT_EQ(m->family, Family::kMemory);
  EXPECT_EQ(m->mnemonic, "str_imm");
  bad = exp;
  bad.pc += 2;
  sb.expect(exp);
  EXPECT_EQ(sb.compare({bad, {}, std::nullopt})->family, Family::kFetch);
  EXPECT_THROW(sb.compare({exp, {}, std::nullopt}), ExpectedUnderflow);
}

TEST(Coverage, SamplesOpcodeFlagsAndBus) {
  CoverageModel c;
  isa::RetireEvent e;
  e.inst = o::adds_reg(1, 2, 2);
  e.flags_after = {false, true, true, false};
  bus::Transfer t = write_transfer(0);
  t.size = isa::AccessSize::kByte;
  t.wait_cycles = 2;
  c.sample({e, {t}, std::nullopt});
  EXPECT_EQ(c.hits("opcode.adds_reg"), 1u);
  EXPECT_EQ(c.hits("flag.Z.set"), 1u);
  EXPECT_EQ(c.hits("flag.N.clear"), 1u);
  EXPECT_EQ(c.hits("opcode_x_flag.adds_reg.C.set"), 1u);
  EXPECT_EQ(c.hits("operand.regs.equal"), 1u);
  EXPECT_EQ(c.hits("bus.byte.write.waited"), 1u);
  EXPECT_EQ(c.hits("opcode.subs_reg"), 0u);
  EXPECT_FALSE(c.has_bin("opcode_x_flag.movs_imm.N.set"));
  EXPECT_FALSE(c.has_bin("opcode_x_flag.nop.Z.set"));

  CoverageModel d;
  d.merge(c);
  d.merge(c);
  EXPECT_EQ(d.hits("opcode.adds_reg"), 2u);
  EXPECT_EQ(d.hit_bins(), c.hit_bins());
}

std::string traced(const EnvironmentConfig& base, bool checking, bool coverage) {
  auto cfg = base;
  cfg.checking = checking;
  cfg.coverage = coverage;
  std::ostringstream out;
  cfg.trace = &out;
  run_environment(cfg);
  return out.str();
}

TEST(Environment, MonitorAndCheckersArePassive) {
  for (const char* test : {"irq_nested", "memory_ops"}) {
    const auto cfg = make_config(RunRequest{.test = test});
    const auto ref = traced(cfg, true, true);
    EXPECT_EQ(traced(cfg, false, false), ref) << test;
    EXPECT_EQ(traced(cfg, true, false), ref) << test;
    EXPECT_EQ(traced(cfg, false, true), ref) << test;
  }
  RunRequest rnd{.seed = 9, .count = 2000};
  const auto cfg = make_config(rnd);
  EXPECT_EQ(traced(cfg, false, false), traced(cfg, true, true));
}

TEST(Environment, RunsAreDeterministic) {
  RunRequest req{.seed = 5, .count = 3000};
  const auto a = run_request(req);
  const auto b = run_request(req);
  EXPECT_EQ(a.cycles, b.cycles);
  EXPECT_EQ(a.retired, b.retired);
  EXPECT_EQ(a.coverage, b.coverage);
  EXPECT_TRUE(a.passed());
}

TEST(Environment, BudgetExceededFails) {
  RunRequest req{.test = "irq_nested", .cycle_budget = 20};
  const auto r = run_request(req);
  EXPECT_TRUE(r.budget_exceeded);
  EXPECT_FALSE(r.passed());
}

TEST(Campaign, SampledWaitStatesAreDeterministicAndBounded) {
  bool varied = false;
  for (uint64_t s = 0; s < 64; ++s) {
    const auto [c, m] = sampled_wait_states(s);
    EXPECT_LE(c, 3);
    EXPECT_LE(m, 3);
    EXPECT_EQ(sampled_wait_states(s), std::make_pair(c, m));
    varied |= c != m;
  }
  EXPECT_TRUE(varied);
}

TEST(Campaign, ParallelMatchesSerial) {
  std::vector<RunRequest> reqs;
  for (uint64_t s = 0; s < 8; ++s) reqs.push_back(RunRequest{.seed = s, .count = 500});
  const auto serial = run_all(reqs, 1);
  const auto parallel = run_all(reqs, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(serial[k].cycles, parallel[k].cycles);
    EXPECT_EQ(serial[k].coverage, parallel[k].coverage);
  }
  EXPECT_THROW(run_all({RunRequest{.test = "nope"}}), UnknownTest);
}

}  // namespace
