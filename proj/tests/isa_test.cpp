// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "m3lv/isa/alu.hpp"
#include "m3lv/isa/assembler.hpp"
#include "m3lv/isa/program_image.hpp"
#include "m3lv/isa/reference.hpp"
#include "m3lv/util.hpp"
#include "oracles.hpp"

namespace {

using namespace m3lv;
using namespace m3lv::isa;
namespace o = isa::ops;

constexpr uint32_t kCorners[] = {0u, 1u, 0x7FFFFFFFu, 0x80000000u, 0xFFFFFFFFu};

TEST(Decode, MatchesAssemblerVectors) {
  std::ifstream in(std::string(M3LV_TEST_DATA) + "/thumb_vectors.txt");
  ASSERT_TRUE(in) << "missing vector file";
  std::string line;
  size_t n = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string hex, name;
    unsigned rd, rn, rm, imm, cond;
    row >> hex >> name >> rd >> rn >> rm >> imm >> cond;
    const auto hw = static_cast<uint16_t>(std::stoul(hex, nullptr, 16));
    const Instruction i = decode(hw);
    EXPECT_EQ(isa::name(i.mnemonic), name) << line;
    EXPECT_EQ(i.rd, rd) << line;
    EXPECT_EQ(i.rn, rn) << line;
    EXPECT_EQ(i.rm, rm) << line;
    EXPECT_EQ(i.imm, imm) << line;
    EXPECT_EQ(i.cond, cond) << line;
    EXPECT_EQ(encode(i), hw) << line;
    seen.insert(name);
    ++n;
  }
  EXPECT_GT(n, 900u);
  EXPECT_EQ(seen.size(), kMnemonicCount);
}

TEST(Decode, TotalOverAllHalfwords) {
  size_t defined = 0;
  for (uint32_t hw = 0; hw < 0x10000; ++hw) {
    const auto i = try_decode(static_cast<uint16_t>(hw));
    if (i) {
      ++defined;
      EXPECT_EQ(decode(encode(*i)), *i) << std::hex << hw;
    } else {
      EXPECT_THROW(decode(static_cast<uint16_t>(hw)), UndefinedError);
    }
  }
  EXPECT_GT(defined, 20000u);
}

TEST(Decode, RoundTripOverOperandSpace) {
  const auto all = oracle::all_instructions();
  std::set<uint16_t> codes;
  for (const auto& i : all) {
    const uint16_t hw = encode(i);
    EXPECT_EQ(decode(hw), i) << to_string(i);
    codes.insert(hw);
  }
  EXPECT_EQ(codes.size(), all.size()) << "two instructions share an encoding";
}

TEST(Decode, Examples) {
  EXPECT_EQ(decode(0x18D1), o::adds_reg(1, 2, 3));
  EXPECT_EQ(decode(0x4770), o::bx(14));
  EXPECT_EQ(decode(0xBF00), o::nop());
  EXPECT_THROW(decode(0xDE00), UndefinedError);  // udf
  EXPECT_THROW(decode(0xDF00), UndefinedError);  // svc
}

TEST(Encode, RejectsOutOfRangeFields) {
  EXPECT_THROW(encode(o::movs_imm(8, 0)), RangeError);
  EXPECT_THROW(encode(o::movs_imm(0, 256)), RangeError);
  EXPECT_THROW(encode(o::adds_imm3(0, 0, 8)), RangeError);
  EXPECT_THROW(encode(o::b(2048)), RangeError);
}

TEST(Alu, AddAndSubMatchRippleOracle) {
  util::SplitMix64 rng(11);
  const auto check = [](uint32_t a, uint32_t b, bool cin) {
    const auto r = alu_eval(AluOp::kAdd, a, b, cin);
    const auto w = oracle::ripple_add(a, b, cin);
    ASSERT_EQ(r.value, w.value);
    ASSERT_EQ(r.c, w.c);
    ASSERT_EQ(r.v, w.v);
    ASSERT_EQ(r.n, w.n);
    ASSERT_EQ(r.z, w.z);
    const auto s = alu_eval(AluOp::kSub, a, b, cin);
    const auto ws = oracle::ripple_sub(a, b, cin);
    ASSERT_EQ(s.value, ws.value);
    ASSERT_EQ(s.c, ws.c);
    ASSERT_EQ(s.v, ws.v);
  };
  for (uint32_t a : kCorners)
    for (uint32_t b : kCorners)
      for (bool c : {false, true}) check(a, b, c);
  for (int k = 0; k < 100000; ++k) check(rng.next_u32(), rng.next_u32(), rng.chance(0.5));
}

TEST(Alu, LogicalAndMultiply) {
  util::SplitMix64 rng(12);
  for (int k = 0; k < 20000; ++k) {
    const uint32_t a = rng.next_u32(), b = rng.next_u32();
    EXPECT_EQ(alu_eval(AluOp::kMul, a, b, false).value, oracle::shift_add_mul(a, b));
    EXPECT_EQ(alu_eval(AluOp::kBic, a, b, false).value, a & ~b);
    const auto r = alu_eval(AluOp::kEor, a, b, true, true);
    EXPECT_TRUE(r.c);
    EXPECT_TRUE(r.v);
  }
}

TEST(Shifter, MatchesBitSerialOracle) {
  util::SplitMix64 rng(13);
  const ShiftKind kinds[] = {ShiftKind::kLsl, ShiftKind::kLsr, ShiftKind::kAsr, ShiftKind::kRor};
  const oracle::Shift ok[] = {oracle::Shift::kLsl, oracle::Shift::kLsr, oracle::Shift::kAsr, oracle::Shift::kRor};
  const auto check = [&](int k, uint32_t a, uint32_t amount, bool cin) {
    const auto r = shifter_eval(kinds[k], a, amount, cin);
    const auto [v, c] = oracle::step_shift(ok[k], a, amount & 0xFF, cin);
    ASSERT_EQ(r.value, v) << k << ' ' << a << ' ' << amount;
    ASSERT_EQ(r.carry_out, c) << k << ' ' << a << ' ' << amount;
  };
  for (int k = 0; k < 4; ++k)
    for (uint32_t a : kCorners)
      for (uint32_t amount = 0; amount < 256; ++amount) check(k, a, amount, amount & 1);
  for (int i = 0; i < 50000; ++i) check(static_cast<int>(rng.below(4)), rng.next_u32(), rng.next_u32(), rng.chance(0.5));
}

// Image with `prog` at 0x100, SP at the top of SRAM.
MemoryImage image_of(const std::vector<Instruction>& prog) {
  auto mem = MemoryImage::standard();
  ProgramImage img;
  uint32_t a = 0x100;
  for (const auto& i : prog) {
    img[a] = encode(i);
    a += 2;
  }
  load_image(mem, img);
  mem.write32(0, kSramBase + kSramSize);
  mem.write32(4, 0x101);
  return mem;
}

TEST(Reference, AddWritesSum) {
  auto mem = image_of({o::movs_imm(2, 5), o::movs_imm(3, 7), o::adds_reg(1, 2, 3), o::bkpt()});
  ReferenceModel ref(reset_state(mem), mem);
  ref.step();
  ref.step();
  const auto e = ref.step();
  ASSERT_TRUE(e.wb);
  EXPECT_EQ(e.wb->reg, 1);
  EXPECT_EQ(e.wb->value, 12u);
  EXPECT_EQ(e.pc, 0x104u);
  EXPECT_EQ(e.flags_after, Flags{});
  ref.step();
  EXPECT_TRUE(ref.halted());
}

TEST(Reference, LiteralLoadUsesAlignedPc) {
  // ldr at 0x102 reads Align(0x106, 4) = 0x104.
  auto mem = image_of({o::nop(), o::ldr_lit(0, 0), o::movs_imm(1, 0x11), o::movs_imm(1, 0x22)});
  ReferenceModel ref(reset_state(mem), mem);
  ref.step();
  const auto e = ref.step();
  ASSERT_TRUE(e.mem);
  EXPECT_EQ(e.mem->addr, 0x104u);
  EXPECT_EQ(e.wb->value, (uint32_t{encode(o::movs_imm(1, 0x22))} << 16) | encode(o::movs_imm(1, 0x11)));
}

TEST(Reference, ExceptionEntryStacksFrame) {
  auto mem = image_of({o::movs_imm(0, 9), o::nop(), o::bkpt()});
  mem.write32(4 * 16, 0x201);
  mem.write16(0x200, encode(o::bx(14)));
  ReferenceModel ref(reset_state(mem), mem);
  ref.step();
  const auto entry = ref.step(NvicDirective::enter(16));
  ASSERT_TRUE(entry.exception);
  EXPECT_EQ(entry.exception->kind, ExceptionKind::kEntry);
  EXPECT_EQ(entry.exception->lr, kExcReturnThread);
  EXPECT_EQ(entry.pc, 0x102u);
  const uint32_t frame = kSramBase + kSramSize - 32;
  EXPECT_EQ(entry.exception->sp, frame);
  EXPECT_EQ(ref.memory().read32(frame), 9u);         // r0
  EXPECT_EQ(ref.memory().read32(frame + 24), 0x102u);  // return address
  EXPECT_EQ(ref.state().ipsr, 16u);
  const auto ret = ref.step();
  ASSERT_TRUE(ret.exception);
  EXPECT_EQ(ret.exception->kind, ExceptionKind::kReturn);
  EXPECT_EQ(ref.state().pc(), 0x102u);
  EXPECT_EQ(ref.state().sp(), kSramBase + kSramSize);
}

TEST(Reference, UnalignedLoadFaults) {
  auto mem = image_of({o::movs_imm(1, 2), o::ldr_imm(0, 1, 0)});
  ReferenceModel ref(reset_state(mem), mem);
  ref.step();
  const auto e = ref.step();
  ASSERT_TRUE(e.exception);
  EXPECT_EQ(e.exception->kind, ExceptionKind::kFault);
  EXPECT_TRUE(ref.halted());
}

TEST(Assembler, ResolvesLabels) {
  ProgramBuilder b;
  b.b("end").emit(o::movs_imm(0, 1)).label("end").emit(o::bkpt());
  const auto hw = b.assemble(0x100);
  ASSERT_EQ(hw.size(), 3u);
  EXPECT_EQ(decode(hw[0]), o::b(0));
}

TEST(Assembler, MaterializeBuildsValue) {
  for (uint32_t v : kCorners) {
    std::vector<Instruction> prog = ProgramBuilder::materialize_sequence(3, v);
    EXPECT_LE(prog.size(), 7u);
    prog.push_back(o::bkpt());
    auto mem = image_of(prog);
    ReferenceModel ref(reset_state(mem), mem);
    while (!ref.halted()) ref.step();
    EXPECT_EQ(ref.state().r[3], v);
  }
}

}  // namespace
