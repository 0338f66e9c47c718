// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Independent oracles. None of these call into the library's arithmetic.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "m3lv/isa/instruction.hpp"

namespace oracle {

struct Sum {
  uint32_t value = 0;
  bool n = false, z = false, c = false, v = false;
};

// Ripple-carry adder, one bit at a time. V is the carry into bit 31 xor the
// carry out of it.
inline Sum ripple_add(uint32_t a, uint32_t b, bool cin) {
  Sum s;
  bool carry = cin;
  bool carry_into_msb = false;
  for (int bit = 0; bit < 32; ++bit) {
    const bool x = (a >> bit) & 1, y = (b >> bit) & 1;
    if (bit == 31) carry_into_msb = carry;
    const bool r = x ^ y ^ carry;
    carry = (x && y) || (x && carry) || (y && carry);
    if (r) s.value |= 1u << bit;
  }
  s.c = carry;
  s.v = carry != carry_into_msb;
  s.n = (s.value >> 31) & 1;
  s.z = s.value == 0;
  return s;
}

inline Sum ripple_sub(uint32_t a, uint32_t b, bool cin) { return ripple_add(a, ~b, cin); }

// Shift-and-add multiply, low 32 bits.
inline uint32_t shift_add_mul(uint32_t a, uint32_t b) {
  uint32_t acc = 0;
  for (int bit = 0; bit < 32; ++bit)
    if ((b >> bit) & 1) acc += a << bit;
  return acc;
}

enum class Shift { kLsl, kLsr, kAsr, kRor };

// Applies `amount` single-bit steps, tracking the bit shifted out.
inline std::pair<uint32_t, bool> step_shift(Shift k, uint32_t a, uint32_t amount, bool cin) {
  uint32_t v = a;
  bool c = cin;
  for (uint32_t i = 0; i < amount; ++i) {
    switch (k) {
      case Shift::kLsl: c = (v >> 31) & 1; v <<= 1; break;
      case Shift::kLsr: c = v & 1; v >>= 1; break;
      case Shift::kAsr: c = v & 1; v = (v >> 1) | (v & 0x80000000u); break;
      case Shift::kRor: c = v & 1; v = (v >> 1) | ((v & 1) << 31); break;
    }
  }
  return {v, c};
}

// Highest-priority pending enabled line by sorting every candidate.
inline std::optional<std::pair<uint32_t, uint8_t>> scan_pending(const std::vector<bool>& pending,
                                                                const std::vector<bool>& enabled,
                                                                const std::vector<uint8_t>& prio) {
  std::vector<std::pair<uint8_t, uint32_t>> c;
  for (uint32_t l = 0; l < pending.size(); ++l)
    if (pending[l] && enabled[l]) c.emplace_back(prio[l], l);
  if (c.empty()) return std::nullopt;
  std::sort(c.begin(), c.end());
  return std::pair{c.front().second, c.front().first};
}

// Every encodable instruction, built from field ranges written out here.
inline std::vector<m3lv::isa::Instruction> all_instructions() {
  namespace o = m3lv::isa::ops;
  using M = m3lv::isa::Mnemonic;
  std::vector<m3lv::isa::Instruction> v;
  for (uint8_t a = 0; a < 8; ++a) {
    for (uint32_t imm = 0; imm < 256; ++imm) {
      v.push_back(o::movs_imm(a, imm));
      v.push_back(o::cmp_imm(a, imm));
      v.push_back(o::adds_imm8(a, imm));
      v.push_back(o::subs_imm8(a, imm));
      v.push_back(o::ldr_lit(a, imm));
    }
    for (uint8_t b = 0; b < 8; ++b) {
      for (uint8_t c = 0; c < 8; ++c) {
        v.push_back(o::adds_reg(a, b, c));
        v.push_back(o::subs_reg(a, b, c));
      }
      for (uint32_t imm = 0; imm < 8; ++imm) {
        v.push_back(o::adds_imm3(a, b, imm));
        v.push_back(o::subs_imm3(a, b, imm));
      }
      for (M m : {M::kAnds, M::kEors, M::kLslsReg, M::kLsrsReg, M::kAsrsReg, M::kAdcs, M::kSbcs, M::kRors, M::kTst,
                  M::kCmpReg, M::kCmn, M::kOrrs, M::kBics})
        v.push_back(o::dp(m, a, b));
      v.push_back(o::rsbs(a, b));
      v.push_back(o::muls(a, b));
      v.push_back(o::mvns(a, b));
      for (uint32_t imm = 0; imm < 32; ++imm) {
        v.push_back(o::lsls_imm(a, b, imm));
        v.push_back(o::lsrs_imm(a, b, imm));
        v.push_back(o::asrs_imm(a, b, imm));
        v.push_back(o::str_imm(a, b, imm));
        v.push_back(o::ldr_imm(a, b, imm));
        v.push_back(o::strb_imm(a, b, imm));
        v.push_back(o::ldrb_imm(a, b, imm));
      }
    }
  }
  for (uint8_t c = 0; c < 14; ++c)
    for (uint32_t imm = 0; imm < 256; ++imm) v.push_back(o::b_cond(static_cast<m3lv::isa::Cond>(c), imm));
  for (uint32_t imm = 0; imm < 2048; ++imm) v.push_back(o::b(imm));
  for (uint8_t r = 0; r < 16; ++r) v.push_back(o::bx(r));
  v.push_back(o::nop());
  for (uint32_t imm = 0; imm < 256; ++imm) v.push_back(o::bkpt(imm));
  return v;
}

}  // namespace oracle
