// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Directed tests. Together they touch every mnemonic, every reachable
// opcode x flag-outcome bin, every bus bin and every irq bin. Each catalogued
// bug has a short witness program.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "m3lv/dut/bugs.hpp"
#include "m3lv/isa/assembler.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/tb/generator.hpp"
#include "m3lv/tb/stimulus.hpp"

namespace m3lv::tb {

struct DirectedTest {
  std::string name;
  std::string description;
  uint8_t code_wait = 0;
  uint8_t sram_wait = 0;
  dut::BugId witness = dut::BugId::kNone;  // bug this program is built to expose
  std::function<Stimulus()> build;
};

// Small helper for writing directed programs as stimulus.
class StimulusBuilder {
 public:
  StimulusBuilder& emit(const isa::Instruction& i, int section = kMainSection) {
    StimulusItem it;
    it.kind = ItemKind::kInstruction;
    it.seq_id = next_++;
    it.inst = i;
    it.section = section;
    items_.push_back(it);
    return *this;
  }
  StimulusBuilder& emit(std::initializer_list<isa::Instruction> is, int section = kMainSection) {
    for (const auto& i : is) emit(i, section);
    return *this;
  }
  StimulusBuilder& materialize(uint8_t rd, uint32_t value) {
    for (const auto& i : isa::ProgramBuilder::materialize_sequence(rd, value)) emit(i);
    return *this;
  }
  StimulusBuilder& nops(size_t n, int section = kMainSection) {
    for (size_t k = 0; k < n; ++k) emit(isa::ops::nop(), section);
    return *this;
  }
  StimulusBuilder& irq(uint64_t cycle, uint32_t line, nvic::IrqActionKind a, uint8_t prio = 0) {
    StimulusItem it;
    it.kind = ItemKind::kIrq;
    it.seq_id = next_++;
    it.irq = {cycle, line, a, prio};
    items_.push_back(it);
    return *this;
  }
  // Enables `line` at cycle 0 with priority `prio`.
  StimulusBuilder& line(uint32_t l, uint8_t prio) {
    irq(0, l, nvic::IrqActionKind::kPriority, prio);
    return irq(0, l, nvic::IrqActionKind::kEnable);
  }
  Stimulus done() {
    emit(isa::ops::bkpt());
    return std::move(items_);
  }

 private:
  Stimulus items_;
  uint64_t next_ = 0;
};

namespace directed {

namespace o = isa::ops;
using M = isa::Mnemonic;

// r3..r7 hold the corner values after this prologue.
inline constexpr std::array<uint8_t, 5> kCornerRegs = {7, 6, 3, 4, 5};  // 0, 1, 7fffffff, 80000000, ffffffff

inline void load_corners(StimulusBuilder& s) {
  for (size_t k = 0; k < kCornerValues.size(); ++k) s.materialize(kCornerRegs[k], kCornerValues[k]);
}

// r1 = a, r2 = b, C = carry, then op.
inline void case_reg(StimulusBuilder& s, const isa::Instruction& op, uint8_t ra, uint8_t rb, bool carry) {
  s.emit({o::adds_imm3(1, ra, 0), o::adds_imm3(2, rb, 0), o::cmp_imm(7, carry ? 0 : 1), op});
}

inline Stimulus add_directed() {
  StimulusBuilder s;
  s.emit({o::movs_imm(2, 5), o::movs_imm(3, 7), o::adds_reg(1, 2, 3)});
  return s.done();
}

// Every register-operand ALU form over all corner pairs, both carry-ins.
inline Stimulus alu_register_matrix() {
  StimulusBuilder s;
  load_corners(s);
  const M ms[] = {M::kAddsReg, M::kSubsReg, M::kAnds, M::kEors, M::kLslsReg, M::kLsrsReg, M::kAsrsReg, M::kAdcs,
                  M::kSbcs,    M::kRors,    M::kTst,  M::kRsbs, M::kCmpReg,  M::kCmn,     M::kOrrs,    M::kMuls,
                  M::kBics,    M::kMvns};
  for (M m : ms) {
    isa::Instruction op;
    switch (m) {
      case M::kAddsReg: op = o::adds_reg(0, 1, 2); break;
      case M::kSubsReg: op = o::subs_reg(0, 1, 2); break;
      case M::kRsbs: op = o::rsbs(0, 1); break;
      case M::kMvns: op = o::mvns(0, 1); break;
      case M::kMuls: op = o::muls(1, 2); break;
      default: op = o::dp(m, 1, 2); break;
    }
    const bool uses_carry = m == M::kAdcs || m == M::kSbcs;
    for (uint8_t a : kCornerRegs)
      for (uint8_t b : kCornerRegs) {
        case_reg(s, op, a, b, false);
        if (uses_carry) case_reg(s, op, a, b, true);
      }
  }
  // Shift amounts of exactly 1 and 31 besides the corner low bytes.
  for (M m : {M::kLslsReg, M::kLsrsReg, M::kAsrsReg, M::kRors})
    for (uint8_t a : kCornerRegs)
      for (uint32_t amount : {1u, 31u, 32u, 33u}) {
        s.emit({o::adds_imm3(1, a, 0), o::movs_imm(2, amount), o::cmp_imm(7, 1), o::dp(m, 1, 2)});
      }
  return s.done();
}

// Immediate ALU forms over all corner values and immediate corners.
inline Stimulus alu_immediate_matrix() {
  StimulusBuilder s;
  load_corners(s);
  for (uint32_t imm : {0u, 1u, 0x80u, 0xFFu}) {
    s.emit({o::movs_imm(0, imm)});
    for (uint8_t a : kCornerRegs) {
      s.emit({o::cmp_imm(a, imm)});
      s.emit({o::adds_imm3(1, a, 0), o::adds_imm8(1, imm)});
      s.emit({o::adds_imm3(1, a, 0), o::subs_imm8(1, imm)});
    }
  }
  for (uint32_t imm : {0u, 1u, 7u}) {
    for (uint8_t a : kCornerRegs) s.emit({o::adds_imm3(0, a, imm), o::subs_imm3(0, a, imm)});
  }
  for (uint32_t imm : {0u, 1u, 16u, 31u}) {
    for (uint8_t a : kCornerRegs)
      s.emit({o::cmp_imm(7, 1), o::lsls_imm(0, a, imm), o::cmp_imm(7, 1), o::lsrs_imm(0, a, imm), o::cmp_imm(7, 1),
              o::asrs_imm(0, a, imm)});
  }
  return s.done();
}

inline Stimulus memory_ops(uint32_t base) {
  StimulusBuilder s;
  s.materialize(1, base);
  s.materialize(2, 0x89ABCDEF);
  s.emit({o::str_imm(2, 1, 0), o::ldr_imm(3, 1, 0), o::strb_imm(2, 1, 5), o::ldrb_imm(4, 1, 5), o::str_imm(3, 1, 31),
          o::ldr_imm(5, 1, 31), o::strb_imm(3, 1, 31), o::ldrb_imm(6, 1, 31), o::ldrb_imm(0, 1, 1), o::adds_reg(0, 0, 6)});
  return s.done();
}

inline Stimulus branches() {
  StimulusBuilder s;
  // Taken and not-taken for every condition, forward jumps only. After the
  // compare: Z=0 C=1 N=0 V=0 on 5 vs 3, and each case is followed by a
  // skipped marker.
  for (uint8_t a : {5, 3, 0}) {
    for (uint8_t c = 0; c < 14; ++c) {
      s.emit({o::movs_imm(0, a), o::cmp_imm(0, 3), o::b_cond(static_cast<isa::Cond>(c), 0), o::movs_imm(6, c)});
    }
  }
  s.emit({o::b(1), o::movs_imm(7, 1), o::movs_imm(7, 2), o::b(0), o::movs_imm(7, 3), o::nop()});
  return s.done();
}

inline Stimulus literal_and_nop() {
  StimulusBuilder s;
  s.emit({o::nop(), o::ldr_lit(0, 0), o::ldr_lit(1, 1), o::ldr_lit(2, 0xFF), o::nop(), o::ldr_lit(3, 2), o::nop()});
  s.emit({o::movs_imm(0, 0), o::movs_imm(0, 0x80), o::movs_imm(0, 0xFF)});
  return s.done();
}

// Flush behaviour: taken branches right behind dependent ALU work and loads.
inline Stimulus branch_flush() {
  StimulusBuilder s;
  s.materialize(1, isa::kSramBase);
  for (int k = 0; k < 8; ++k) {
    s.emit({o::movs_imm(0, static_cast<uint32_t>(k)), o::str_imm(0, 1, static_cast<uint32_t>(k)), o::b(2),
            o::movs_imm(2, 0xEE), o::movs_imm(2, 0xEE), o::movs_imm(2, 0xEE), o::ldr_imm(3, 1, static_cast<uint32_t>(k)),
            o::cmp_reg(3, 0), o::b_cond(isa::Cond::kEq, 0), o::movs_imm(2, 0xDD), o::adds_reg(4, 3, 0)});
  }
  return s.done();
}

inline Stimulus irq_entry() {
  StimulusBuilder s;
  s.line(0, 0x40);
  s.irq(12, 0, nvic::IrqActionKind::kPend);
  s.emit({o::movs_imm(0, 1), o::movs_imm(1, 2), o::movs_imm(7, 0x55)});
  s.nops(40);
  s.emit({o::adds_reg(2, 0, 1)});
  s.emit({o::movs_imm(0, 0x42), o::adds_imm8(1, 3), o::bx(14)}, 0);
  return s.done();
}

// Line 1 (low urgency) is preempted by line 0 while its handler runs.
inline Stimulus irq_nested() {
  StimulusBuilder s;
  s.line(0, 0x20).line(1, 0x80);
  s.irq(10, 1, nvic::IrqActionKind::kPend);
  s.irq(40, 0, nvic::IrqActionKind::kPend);
  s.nops(80);
  s.emit({o::movs_imm(0, 0x11), o::bx(14)}, 0);
  s.emit({o::movs_imm(1, 0x22)}, 1);
  s.nops(40, 1);
  s.emit({o::bx(14)}, 1);
  return s.done();
}

// Two lines pended together: the second runs by tail-chaining.
inline Stimulus irq_tail_chain() {
  StimulusBuilder s;
  s.line(0, 0x40).line(1, 0x80);
  s.irq(10, 0, nvic::IrqActionKind::kPend);
  s.irq(10, 1, nvic::IrqActionKind::kPend);
  s.nops(60);
  s.emit({o::movs_imm(0, 1), o::bx(14)}, 0);
  s.emit({o::movs_imm(1, 2), o::bx(14)}, 1);
  return s.done();
}

inline Stimulus witness_alu_carry() {
  StimulusBuilder s;
  s.emit({o::movs_imm(0, 255), o::lsls_imm(0, 0, 24), o::adds_reg(0, 0, 0), o::adcs(0, 0)});
  return s.done();
}

inline Stimulus witness_flag_z16() {
  StimulusBuilder s;
  s.emit({o::movs_imm(0, 1), o::lsls_imm(0, 0, 16)});
  return s.done();
}

inline Stimulus witness_fwd_miss() {
  StimulusBuilder s;
  s.emit({o::movs_imm(0, 1), o::adds_imm3(1, 0, 1), o::adds_reg(2, 1, 1)});
  return s.done();
}

inline Stimulus witness_br_off2() {
  StimulusBuilder s;
  s.emit({o::movs_imm(0, 0), o::b(1), o::movs_imm(1, 0xEE), o::movs_imm(1, 0xEE), o::movs_imm(2, 1),
          o::movs_imm(3, 2)});
  return s.done();
}

inline Stimulus witness_lsu_size() {
  StimulusBuilder s;
  s.materialize(1, isa::kSramBase);
  s.materialize(0, 0x12345678);
  s.emit({o::strb_imm(0, 1, 1), o::ldr_imm(2, 1, 0)});
  return s.done();
}

}  // namespace directed

inline const std::vector<DirectedTest>& directed_tests() {
  using dut::BugId;
  static const std::vector<DirectedTest> tests = {
      {"add_directed", "adds r1,r2,r3 on r2=5 r3=7", 0, 0, BugId::kNone, directed::add_directed},
      {"alu_register_matrix", "register ALU forms over corner operand pairs", 0, 0, BugId::kNone,
       directed::alu_register_matrix},
      {"alu_immediate_matrix", "immediate ALU and shift forms over corner operands", 0, 0, BugId::kNone,
       directed::alu_immediate_matrix},
      {"memory_ops", "word and byte loads and stores, no wait states", 0, 0, BugId::kNone,
       [] { return directed::memory_ops(isa::kSramBase); }},
      {"lsu_wait", "word and byte loads and stores with 2 SRAM wait states", 0, 2, BugId::kNone,
       [] { return directed::memory_ops(isa::kSramBase + 0x100); }},
      {"branches", "every condition taken and not taken, unconditional branches", 0, 0, BugId::kNone,
       directed::branches},
      {"literal_nop", "pc-relative loads and nop", 1, 0, BugId::kNone, directed::literal_and_nop},
      {"branch_flush", "taken branches behind stores, loads and dependent ALU ops", 0, 1, BugId::kNone,
       directed::branch_flush},
      {"irq_entry", "single interrupt entry and return", 0, 0, BugId::kNone, directed::irq_entry},
      {"irq_nested", "higher-priority interrupt preempts a running handler", 0, 0, BugId::kNone,
       directed::irq_nested},
      {"irq_tail_chain", "two pending interrupts, the second tail-chained", 0, 0, BugId::kNone,
       directed::irq_tail_chain},
      {"witness_alu_carry", "adcs with carry set", 0, 0, BugId::kAluCarry, directed::witness_alu_carry},
      {"witness_flag_z16", "result 0x00010000", 0, 0, BugId::kFlagZ16, directed::witness_flag_z16},
      {"witness_fwd_miss", "back-to-back dependent ALU ops", 0, 0, BugId::kFwdMiss, directed::witness_fwd_miss},
      {"witness_br_off2", "taken unconditional branch", 0, 0, BugId::kBrOff2, directed::witness_br_off2},
      {"witness_lsu_size", "byte store of a register with upper bits set", 0, 0, BugId::kLsuSize,
       directed::witness_lsu_size},
  };
  return tests;
}

inline const DirectedTest* find_directed(std::string_view name) {
  for (const auto& t : directed_tests())
    if (t.name == name) return &t;
  return nullptr;
}

inline const DirectedTest& witness_for(dut::BugId bug) {
  for (const auto& t : directed_tests())
    if (t.witness == bug && bug != dut::BugId::kNone) return t;
  throw std::invalid_argument("no witness for bug " + std::string(dut::bug_name(bug)));
}

}  // namespace m3lv::tb
