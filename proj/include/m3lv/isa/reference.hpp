// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Golden architectural model: one instruction (or one exception entry) per
// step, no pipeline timing.
//
// PC reads: an instruction that reads the PC sees its own address + 4. ldr_lit
// uses Align(PC, 4) + imm8 * 4 and `bx pc` targets address + 4 (bit 0 clear,
// so it faults).
//
// Exception frame, lowest address first, at SP - 32:
//   r0 r1 r2 r3 r12 lr return-address xpsr
// with xpsr = N:Z:C:V in bits 31..28, the Thumb bit 24 set and the current
// exception number in bits 8..0.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "m3lv/exception.hpp"
#include "m3lv/isa/alu.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/memory.hpp"
#include "m3lv/isa/retire_event.hpp"

namespace m3lv::isa {

struct ArchState {
  std::array<uint32_t, 16> r{};  // r13 = SP, r14 = LR, r15 = address of the next instruction
  Flags apsr;
  uint32_t ipsr = 0;  // current exception number, 0 in thread mode
  uint32_t vtor = 0;
  bool halted = false;

  uint32_t pc() const { return r[15]; }
  uint32_t sp() const { return r[13]; }

  friend bool operator==(const ArchState&, const ArchState&) = default;
};

inline uint32_t pack_xpsr(const Flags& f, uint32_t ipsr) { return (f.bits() << 28) | (1u << 24) | (ipsr & 0x1FF); }

inline bool condition_passed(uint8_t cond, const Flags& f) {
  bool result = false;
  switch (cond >> 1) {
    case 0: result = f.z; break;
    case 1: result = f.c; break;
    case 2: result = f.n; break;
    case 3: result = f.v; break;
    case 4: result = f.c && !f.z; break;
    case 5: result = f.n == f.v; break;
    case 6: result = f.n == f.v && !f.z; break;
    case 7: return true;
  }
  return (cond & 1) != 0 ? !result : result;
}

inline int32_t branch_offset(const Instruction& i) {
  if (i.mnemonic == Mnemonic::kBCond) return static_cast<int32_t>(static_cast<int8_t>(i.imm & 0xFF)) * 2;
  return (static_cast<int32_t>(i.imm << 21)) >> 20;
}

// Loads SP and the reset PC from the vector table.
inline ArchState reset_state(const MemoryImage& mem, uint32_t vtor = 0) {
  ArchState s;
  s.vtor = vtor;
  s.r[13] = mem.read32(vtor);
  s.r[15] = mem.read32(vtor + 4) & ~1u;
  return s;
}

struct StepResult {
  ArchState state;
  RetireEvent event;
};

namespace detail {

class ReferenceStep {
 public:
  ReferenceStep(ArchState s, MemoryImage& mem, uint64_t seq) : s_(s), mem_(mem) {
    ev_.seq = seq;
    ev_.pc = s_.pc();
  }

  StepResult run(const std::optional<NvicDirective>& directive) {
    if (s_.halted) throw std::logic_error("reference_step on a halted state");
    if (directive && directive->action == DirectiveAction::kEnter) {
      enter(directive->exception);
      return finish();
    }
    const uint32_t pc = s_.pc();
    std::optional<uint32_t> hw;
    if ((pc & 1) == 0) hw = mem_.read(pc, AccessSize::kHalf);
    if (!hw) return fault();
    auto inst = try_decode(static_cast<uint16_t>(*hw));
    if (!inst) return fault();
    ev_.inst = inst;
    if (directive && directive->action == DirectiveAction::kTailChain && returns_from_exception(*inst)) {
      tail_chain(directive->exception);
      return finish();
    }
    execute(*inst);
    return finish();
  }

 private:
  StepResult finish() {
    ev_.flags_after = s_.apsr;
    return {s_, ev_};
  }

  StepResult fault() {
    s_.halted = true;
    ev_.wb.reset();
    ev_.mem.reset();
    ev_.exception = ExceptionEffect{ExceptionKind::kFault, kHardFault, s_.sp(), s_.r[14]};
    return finish();
  }

  uint32_t reg(unsigned r) const { return r == 15 ? s_.pc() + 4 : s_.r[r]; }

  bool returns_from_exception(const Instruction& i) const {
    const uint32_t target = reg(i.rm);
    return i.mnemonic == Mnemonic::kBx && s_.ipsr != 0 && (target == kExcReturnHandler || target == kExcReturnThread);
  }

  void enter(uint32_t exception) {
    const uint32_t frame = s_.sp() - 32;
    if (!aligned(frame, AccessSize::kWord)) {
      fault();
      return;
    }
    const std::array<uint32_t, 8> words = {s_.r[0], s_.r[1], s_.r[2], s_.r[3], s_.r[12],
                                           s_.r[14], s_.pc(), pack_xpsr(s_.apsr, s_.ipsr)};
    for (uint32_t i = 0; i < 8; ++i) {
      if (!mem_.write(frame + 4 * i, AccessSize::kWord, words[i])) {
        fault();
        return;
      }
    }
    const auto vector = mem_.read(s_.vtor + 4 * exception, AccessSize::kWord);
    if (!vector) {
      fault();
      return;
    }
    s_.r[14] = s_.ipsr == 0 ? kExcReturnThread : kExcReturnHandler;
    s_.r[13] = frame;
    s_.ipsr = exception;
    s_.r[15] = *vector & ~1u;
    ev_.wb = Writeback{15, s_.pc()};
    ev_.exception = ExceptionEffect{ExceptionKind::kEntry, exception, s_.sp(), s_.r[14]};
  }

  void tail_chain(uint32_t exception) {
    const auto vector = mem_.read(s_.vtor + 4 * exception, AccessSize::kWord);
    if (!vector) {
      fault();
      return;
    }
    s_.ipsr = exception;
    s_.r[15] = *vector & ~1u;
    ev_.wb = Writeback{15, s_.pc()};
    ev_.exception = ExceptionEffect{ExceptionKind::kTailChain, exception, s_.sp(), s_.r[14]};
  }

  void exception_return(uint32_t exc_return) {
    const uint32_t leaving = s_.ipsr;
    if (exc_return != kExcReturnHandler && exc_return != kExcReturnThread) {
      fault();
      return;
    }
    const uint32_t frame = s_.sp();
    std::array<uint32_t, 8> w{};
    for (uint32_t i = 0; i < 8; ++i) {
      const auto v = aligned(frame, AccessSize::kWord) ? mem_.read(frame + 4 * i, AccessSize::kWord) : std::nullopt;
      if (!v) {
        fault();
        return;
      }
      w[i] = *v;
    }
    const uint32_t restored_ipsr = w[7] & 0x1FF;
    if ((exc_return == kExcReturnThread) != (restored_ipsr == 0)) {
      fault();
      return;
    }
    s_.r[0] = w[0];
    s_.r[1] = w[1];
    s_.r[2] = w[2];
    s_.r[3] = w[3];
    s_.r[12] = w[4];
    s_.r[14] = w[5];
    s_.r[15] = w[6] & ~1u;
    s_.apsr = Flags::from_bits(w[7] >> 28);
    s_.ipsr = restored_ipsr;
    s_.r[13] = frame + 32;
    ev_.wb = Writeback{15, s_.pc()};
    ev_.exception = ExceptionEffect{ExceptionKind::kReturn, leaving, s_.sp(), s_.r[14]};
  }

  void write_reg(uint8_t rd, uint32_t v) {
    s_.r[rd] = v;
    ev_.wb = Writeback{rd, v};
  }

  void set_nz(uint32_t v) {
    s_.apsr.n = (v >> 31) != 0;
    s_.apsr.z = v == 0;
  }

  void arith(const AluResult& r, std::optional<uint8_t> rd) {
    if (rd) write_reg(*rd, r.value);
    s_.apsr = Flags{r.n, r.z, r.c, r.v};
  }

  void logical(uint32_t v, std::optional<uint8_t> rd) {
    if (rd) write_reg(*rd, v);
    set_nz(v);
  }

  void shift(ShiftKind k, uint8_t rd, uint32_t value, uint32_t amount) {
    const auto r = shifter_eval(k, value, amount, s_.apsr.c);
    write_reg(rd, r.value);
    set_nz(r.value);
    s_.apsr.c = r.carry_out;
  }

  bool load(uint8_t rt, uint32_t addr, AccessSize size) {
    if (!aligned(addr, size)) return false;
    const auto v = mem_.read(addr, size);
    if (!v) return false;
    write_reg(rt, *v);
    ev_.mem = MemEffect{MemKind::kRead, addr, size, *v};
    return true;
  }

  bool store(uint32_t value, uint32_t addr, AccessSize size) {
    if (!aligned(addr, size)) return false;
    const uint32_t data = size == AccessSize::kByte ? value & 0xFF : value;
    if (!mem_.write(addr, size, data)) return false;
    ev_.mem = MemEffect{MemKind::kWrite, addr, size, data};
    return true;
  }

  void execute(const Instruction& i) {
    using M = Mnemonic;
    const uint32_t pc = s_.pc();
    uint32_t next = pc + 2;
    const bool c = s_.apsr.c;
    const bool v = s_.apsr.v;
    const uint32_t rn = reg(i.rn), rm = reg(i.rm);
    switch (i.mnemonic) {
      case M::kMovsImm: logical(i.imm, i.rd); break;
      case M::kCmpImm: arith(alu_eval(AluOp::kSub, rn, i.imm, true), std::nullopt); break;
      case M::kAddsImm8: arith(alu_eval(AluOp::kAdd, rn, i.imm, false), i.rd); break;
      case M::kSubsImm8: arith(alu_eval(AluOp::kSub, rn, i.imm, true), i.rd); break;
      case M::kAddsReg: arith(alu_eval(AluOp::kAdd, rn, rm, false), i.rd); break;
      case M::kSubsReg: arith(alu_eval(AluOp::kSub, rn, rm, true), i.rd); break;
      case M::kAddsImm3: arith(alu_eval(AluOp::kAdd, rn, i.imm, false), i.rd); break;
      case M::kSubsImm3: arith(alu_eval(AluOp::kSub, rn, i.imm, true), i.rd); break;
      case M::kAnds: logical(alu_eval(AluOp::kAnd, rn, rm, c, v).value, i.rd); break;
      case M::kEors: logical(alu_eval(AluOp::kEor, rn, rm, c, v).value, i.rd); break;
      case M::kOrrs: logical(alu_eval(AluOp::kOrr, rn, rm, c, v).value, i.rd); break;
      case M::kBics: logical(alu_eval(AluOp::kBic, rn, rm, c, v).value, i.rd); break;
      case M::kMvns: logical(alu_eval(AluOp::kMvn, 0, rm, c, v).value, i.rd); break;
      case M::kMuls: logical(alu_eval(AluOp::kMul, rn, rm, c, v).value, i.rd); break;
      case M::kTst: logical(alu_eval(AluOp::kAnd, rn, rm, c, v).value, std::nullopt); break;
      case M::kLslsReg: shift(ShiftKind::kLsl, i.rd, rn, rm); break;
      case M::kLsrsReg: shift(ShiftKind::kLsr, i.rd, rn, rm); break;
      case M::kAsrsReg: shift(ShiftKind::kAsr, i.rd, rn, rm); break;
      case M::kRors: shift(ShiftKind::kRor, i.rd, rn, rm); break;
      case M::kAdcs: arith(alu_eval(AluOp::kAdd, rn, rm, c), i.rd); break;
      case M::kSbcs: arith(alu_eval(AluOp::kSub, rn, rm, c), i.rd); break;
      case M::kRsbs: arith(alu_eval(AluOp::kSub, 0, rn, true), i.rd); break;
      case M::kCmpReg: arith(alu_eval(AluOp::kSub, rn, rm, true), std::nullopt); break;
      case M::kCmn: arith(alu_eval(AluOp::kAdd, rn, rm, false), std::nullopt); break;
      case M::kLslsImm: shift(ShiftKind::kLsl, i.rd, rm, i.imm); break;
      case M::kLsrsImm: shift(ShiftKind::kLsr, i.rd, rm, i.imm == 0 ? 32 : i.imm); break;
      case M::kAsrsImm: shift(ShiftKind::kAsr, i.rd, rm, i.imm == 0 ? 32 : i.imm); break;
      case M::kStrImm:
        if (!store(reg(i.rd), rn + i.imm * 4, AccessSize::kWord)) return void(fault());
        break;
      case M::kStrbImm:
        if (!store(reg(i.rd), rn + i.imm, AccessSize::kByte)) return void(fault());
        break;
      case M::kLdrImm:
        if (!load(i.rd, rn + i.imm * 4, AccessSize::kWord)) return void(fault());
        break;
      case M::kLdrbImm:
        if (!load(i.rd, rn + i.imm, AccessSize::kByte)) return void(fault());
        break;
      case M::kLdrLit:
        if (!load(i.rd, ((pc + 4) & ~3u) + i.imm * 4, AccessSize::kWord)) return void(fault());
        break;
      case M::kBCond:
      case M::kB:
        if (condition_passed(i.cond, s_.apsr)) {
          next = pc + 4 + static_cast<uint32_t>(branch_offset(i));
          ev_.wb = Writeback{15, next};
        }
        break;
      case M::kBx: {
        const uint32_t target = reg(i.rm);
        if (is_exc_return(target) && s_.ipsr != 0) return exception_return(target);
        if ((target & 1) == 0) return void(fault());
        next = target & ~1u;
        ev_.wb = Writeback{15, next};
        break;
      }
      case M::kNop: break;
      case M::kBkpt: s_.halted = true; break;
    }
    s_.r[15] = next;
  }

  ArchState s_;
  MemoryImage& mem_;
  RetireEvent ev_;
};

}  // namespace detail

// A kEnter directive performs exception entry in place of an instruction. A
// kTailChain directive applies when the instruction at PC is an exception
// return, which then chains into the named exception without unstacking.
inline StepResult reference_step(const ArchState& state, MemoryImage& memory,
                                 const std::optional<NvicDirective>& directive = std::nullopt, uint64_t seq = 0) {
  return detail::ReferenceStep(state, memory, seq).run(directive);
}

class ReferenceModel {
 public:
  ReferenceModel(ArchState state, MemoryImage memory) : state_(state), memory_(std::move(memory)) {}

  RetireEvent step(const std::optional<NvicDirective>& directive = std::nullopt) {
    auto r = reference_step(state_, memory_, directive, seq_++);
    state_ = r.state;
    return r.event;
  }

  const ArchState& state() const { return state_; }
  const MemoryImage& memory() const { return memory_; }
  bool halted() const { return state_.halted; }

 private:
  ArchState state_;
  MemoryImage memory_;
  uint64_t seq_ = 0;
};

}  // namespace m3lv::isa
