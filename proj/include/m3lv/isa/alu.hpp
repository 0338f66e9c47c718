// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Architectural ALU and barrel shifter used by the golden reference model.

#pragma once

#include <cstdint>

namespace m3lv::isa {

// kAdd computes a + b + carry_in and kSub computes a + NOT(b) + carry_in, so
// ADDS/SUBS pass carry_in 0/1 and ADCS/SBCS pass the APSR carry. The remaining
// operations keep C = carry_in and V = overflow_in; kMov and kMvn ignore a.
enum class AluOp : uint8_t { kAdd, kSub, kAnd, kEor, kOrr, kBic, kMvn, kMov, kMul };

struct AluResult {
  uint32_t value = 0;
  bool n = false;
  bool z = false;
  bool c = false;
  bool v = false;

  friend bool operator==(const AluResult&, const AluResult&) = default;
};

namespace detail {

inline AluResult add_with_carry(uint32_t a, uint32_t b, bool carry_in) {
  const uint32_t value = a + b + (carry_in ? 1u : 0u);
  AluResult r;
  r.value = value;
  r.n = (value >> 31) != 0;
  r.z = value == 0;
  // Unsigned overflow iff the truncated sum is below an addend, or equal to it
  // when the carry-in contributed.
  r.c = carry_in ? value <= a : value < a;
  // Signed overflow iff both addends agree in sign and the sum does not.
  r.v = ((~(a ^ b) & (a ^ value)) >> 31) != 0;
  return r;
}

}  // namespace detail

inline AluResult alu_eval(AluOp op, uint32_t a, uint32_t b, bool carry_in, bool overflow_in = false) {
  uint32_t value = 0;
  switch (op) {
    case AluOp::kAdd: return detail::add_with_carry(a, b, carry_in);
    case AluOp::kSub: return detail::add_with_carry(a, ~b, carry_in);
    case AluOp::kAnd: value = a & b; break;
    case AluOp::kEor: value = a ^ b; break;
    case AluOp::kOrr: value = a | b; break;
    case AluOp::kBic: value = a & ~b; break;
    case AluOp::kMvn: value = ~b; break;
    case AluOp::kMov: value = b; break;
    case AluOp::kMul: value = a * b; break;
  }
  return {value, (value >> 31) != 0, value == 0, carry_in, overflow_in};
}

enum class ShiftKind : uint8_t { kLsl, kLsr, kAsr, kRor };

struct ShiftResult {
  uint32_t value = 0;
  bool carry_out = false;

  friend bool operator==(const ShiftResult&, const ShiftResult&) = default;
};

// Register-controlled shift semantics: amount is the bottom byte of the shift
// register; 0 passes the operand and carry through unchanged.
inline ShiftResult shifter_eval(ShiftKind kind, uint32_t a, uint32_t amount, bool carry_in) {
  amount &= 0xFF;
  if (amount == 0) return {a, carry_in};
  switch (kind) {
    case ShiftKind::kLsl:
      if (amount < 32) return {a << amount, ((a >> (32 - amount)) & 1) != 0};
      if (amount == 32) return {0, (a & 1) != 0};
      return {0, false};
    case ShiftKind::kLsr:
      if (amount < 32) return {a >> amount, ((a >> (amount - 1)) & 1) != 0};
      if (amount == 32) return {0, (a >> 31) != 0};
      return {0, false};
    case ShiftKind::kAsr: {
      const auto s = static_cast<int32_t>(a);
      if (amount < 32) return {static_cast<uint32_t>(s >> amount), ((a >> (amount - 1)) & 1) != 0};
      return {static_cast<uint32_t>(s >> 31), (a >> 31) != 0};
    }
    case ShiftKind::kRor: {
      const uint32_t m = amount & 31;
      const uint32_t v = m == 0 ? a : (a >> m) | (a << (32 - m));
      return {v, (v >> 31) != 0};
    }
  }
  return {a, carry_in};
}

}  // namespace m3lv::isa
