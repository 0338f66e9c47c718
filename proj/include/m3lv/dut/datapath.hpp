// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// The core's own ALU and barrel shifter. Written against 64-bit intermediates
// so it shares no code with the reference model's datapath.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>

#include "m3lv/dut/bugs.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/retire_event.hpp"

namespace m3lv::dut {

struct Sum {
  uint32_t value;
  bool carry;
  bool overflow;
};

inline Sum wide_add(uint32_t a, uint32_t b, bool cin) {
  const uint64_t u = uint64_t{a} + uint64_t{b} + (cin ? 1 : 0);
  const int64_t s = int64_t{static_cast<int32_t>(a)} + int64_t{static_cast<int32_t>(b)} + (cin ? 1 : 0);
  const auto value = static_cast<uint32_t>(u);
  return {value, (u >> 32) != 0, s != int64_t{static_cast<int32_t>(value)}};
}

struct Shifted {
  uint32_t value;
  bool carry;
};

enum class Shift : uint8_t { kLsl, kLsr, kAsr, kRor };

inline Shifted barrel(Shift kind, uint32_t a, uint32_t amount, bool cin) {
  amount &= 0xFF;
  if (amount == 0) return {a, cin};
  switch (kind) {
    case Shift::kLsl: {
      if (amount > 32) return {0, false};
      const uint64_t w = uint64_t{a} << amount;
      return {static_cast<uint32_t>(w), ((w >> 32) & 1) != 0};
    }
    case Shift::kLsr: {
      if (amount > 32) return {0, false};
      const uint64_t w = uint64_t{a};
      return {static_cast<uint32_t>(w >> amount), ((w >> (amount - 1)) & 1) != 0};
    }
    case Shift::kAsr: {
      const uint32_t n = amount > 32 ? 32 : amount;
      const int64_t w = static_cast<int32_t>(a);
      return {static_cast<uint32_t>(w >> n), ((w >> (n - 1)) & 1) != 0};
    }
    case Shift::kRor: {
      const uint32_t v = std::rotr(a, static_cast<int>(amount & 31));
      return {v, (v >> 31) != 0};
    }
  }
  return {a, cin};
}

struct AluOutcome {
  std::optional<uint8_t> rd;
  uint32_t value = 0;
  isa::Flags flags;
};

// Executes a data-processing instruction against latched operands.
// `operand(r)` already folds in the PC-read rule.
template <class Operand>
AluOutcome execute_alu(const isa::Instruction& i, Operand operand, isa::Flags f, BugId bug) {
  using M = isa::Mnemonic;
  AluOutcome o;
  o.flags = f;
  const auto zero = [bug](uint32_t v) { return bug == BugId::kFlagZ16 ? (v & 0xFFFF) == 0 : v == 0; };
  const auto nz = [&](uint32_t v) {
    o.value = v;
    o.flags.n = (v >> 31) != 0;
    o.flags.z = zero(v);
  };
  const auto arith = [&](Sum s) {
    nz(s.value);
    o.flags.c = s.carry;
    o.flags.v = s.overflow;
  };
  const auto shift = [&](Shift k, uint32_t a, uint32_t n) {
    const auto r = barrel(k, a, n, f.c);
    nz(r.value);
    o.flags.c = r.carry;
  };
  const uint32_t rn = operand(i.rn), rm = operand(i.rm);
  switch (i.mnemonic) {
    case M::kMovsImm: nz(i.imm); break;
    case M::kCmpImm: arith(wide_add(rn, ~i.imm, true)); break;
    case M::kAddsImm8:
    case M::kAddsImm3: arith(wide_add(rn, i.imm, false)); break;
    case M::kSubsImm8:
    case M::kSubsImm3: arith(wide_add(rn, ~i.imm, true)); break;
    case M::kAddsReg:
    case M::kCmn: arith(wide_add(rn, rm, false)); break;
    case M::kSubsReg:
    case M::kCmpReg: arith(wide_add(rn, ~rm, true)); break;
    case M::kAdcs: arith(wide_add(rn, rm, bug == BugId::kAluCarry ? false : f.c)); break;
    case M::kSbcs: arith(wide_add(rn, ~rm, f.c)); break;
    case M::kRsbs: arith(wide_add(~rn, 0, true)); break;
    case M::kAnds:
    case M::kTst: nz(rn & rm); break;
    case M::kEors: nz(rn ^ rm); break;
    case M::kOrrs: nz(rn | rm); break;
    case M::kBics: nz(rn & ~rm); break;
    case M::kMvns: nz(~rm); break;
    case M::kMuls: nz(static_cast<uint32_t>(uint64_t{rn} * uint64_t{rm})); break;
    case M::kLslsReg: shift(Shift::kLsl, rn, rm); break;
    case M::kLsrsReg: shift(Shift::kLsr, rn, rm); break;
    case M::kAsrsReg: shift(Shift::kAsr, rn, rm); break;
    case M::kRors: shift(Shift::kRor, rn, rm); break;
    case M::kLslsImm: shift(Shift::kLsl, rm, i.imm); break;
    case M::kLsrsImm: shift(Shift::kLsr, rm, i.imm == 0 ? 32 : i.imm); break;
    case M::kAsrsImm: shift(Shift::kAsr, rm, i.imm == 0 ? 32 : i.imm); break;
    default: return o;
  }
  if (i.mnemonic != M::kCmpImm && i.mnemonic != M::kCmpReg && i.mnemonic != M::kCmn && i.mnemonic != M::kTst)
    o.rd = i.rd;
  return o;
}

inline bool is_alu(isa::Mnemonic m) {
  return !isa::is_load_store(m) && !isa::is_branch(m) && m != isa::Mnemonic::kLdrLit && m != isa::Mnemonic::kNop && m != isa::Mnemonic::kBkpt;
}

inline bool cond_holds(uint8_t cond, const isa::Flags& f) {
  switch (cond) {
    case 0: return f.z;
    case 1: return !f.z;
    case 2: return f.c;
    case 3: return !f.c;
    case 4: return f.n;
    case 5: return !f.n;
    case 6: return f.v;
    case 7: return !f.v;
    case 8: return f.c && !f.z;
    case 9: return !f.c || f.z;
    case 10: return f.n == f.v;
    case 11: return f.n != f.v;
    case 12: return !f.z && f.n == f.v;
    case 13: return f.z || f.n != f.v;
    default: return true;
  }
}

}  // namespace m3lv::dut
