// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// The M3-lite instruction subset: 16-bit Thumb encodings only.
//
// Bit patterns (T1 forms, bit 15 on the left):
//
//   lsls_imm   000 00 imm5 Rm Rd          adds_reg  0001100 Rm Rn Rd
//   lsrs_imm   000 01 imm5 Rm Rd          subs_reg  0001101 Rm Rn Rd
//   asrs_imm   000 10 imm5 Rm Rd          adds_imm3 0001110 imm3 Rn Rd
//   movs_imm   001 00 Rd imm8             subs_imm3 0001111 imm3 Rn Rd
//   cmp_imm    001 01 Rn imm8             adds_imm8 001 10 Rdn imm8
//   subs_imm8  001 11 Rdn imm8
//   data-proc  010000 op4 Rm Rdn   (op4: ands eors lsls lsrs asrs adcs sbcs
//                                   rors tst rsbs cmp cmn orrs muls bics mvns)
//   bx         010001110 Rm 000
//   ldr_lit    01001 Rt imm8
//   str_imm    01100 imm5 Rn Rt       ldr_imm   01101 imm5 Rn Rt
//   strb_imm   01110 imm5 Rn Rt       ldrb_imm  01111 imm5 Rn Rt
//   bkpt       10111110 imm8          nop       1011111100000000
//   b_cond     1101 cond imm8  (cond 0..13)
//   b          11100 imm11
//
// Everything else, including the 32-bit prefixes 11101/11110/11111, is
// undefined in this subset.
//
// `imm` always holds the raw encoding field. The architectural meaning
// (shift of 32 for lsrs/asrs imm5 == 0, word scaling of load/store offsets,
// sign extension of branch offsets) is applied by the executors.
//
// Field use per mnemonic; unused fields are zero:
//   rd  destination (Rd, Rdn, Rt); rn first source; rm second source.
//   Two-operand data-processing forms carry Rdn in both rd and rn.
//   tst/cmp/cmn carry Rn in rn and leave rd zero. muls carries Rdm in rd and
//   rm. mvns uses rd and rm. rsbs uses rd and rn.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace m3lv::isa {

enum class Mnemonic : uint8_t {
  kMovsImm, kCmpImm, kAddsImm8, kSubsImm8,
  kAddsReg, kSubsReg, kAddsImm3, kSubsImm3,
  kAnds, kEors, kLslsReg, kLsrsReg, kAsrsReg, kAdcs, kSbcs, kRors,
  kTst, kRsbs, kCmpReg, kCmn, kOrrs, kMuls, kBics, kMvns,
  kLslsImm, kLsrsImm, kAsrsImm,
  kStrImm, kLdrImm, kStrbImm, kLdrbImm, kLdrLit,
  kBCond, kB, kBx, kNop, kBkpt,
};

inline constexpr size_t kMnemonicCount = 37;

inline constexpr std::array<std::string_view, kMnemonicCount> kMnemonicNames = {
    "movs_imm", "cmp_imm",  "adds_imm8", "subs_imm8", "adds_reg", "subs_reg", "adds_imm3", "subs_imm3",
    "ands",     "eors",     "lsls_reg",  "lsrs_reg",  "asrs_reg", "adcs",     "sbcs",      "rors",
    "tst",      "rsbs",     "cmp_reg",   "cmn",       "orrs",     "muls",     "bics",      "mvns",
    "lsls_imm", "lsrs_imm", "asrs_imm",  "str_imm",   "ldr_imm",  "strb_imm", "ldrb_imm",  "ldr_lit",
    "b_cond",   "b",        "bx",        "nop",       "bkpt",
};

inline constexpr std::string_view name(Mnemonic m) { return kMnemonicNames[static_cast<size_t>(m)]; }

inline std::optional<Mnemonic> parse_mnemonic(std::string_view s) {
  for (size_t i = 0; i < kMnemonicCount; ++i)
    if (kMnemonicNames[i] == s) return static_cast<Mnemonic>(i);
  return std::nullopt;
}

inline constexpr std::array<Mnemonic, kMnemonicCount> all_mnemonics() {
  std::array<Mnemonic, kMnemonicCount> a{};
  for (size_t i = 0; i < kMnemonicCount; ++i) a[i] = static_cast<Mnemonic>(i);
  return a;
}

enum class Form : uint8_t { kRegister, kImmediate, kLiteral, kBranch };

inline constexpr Form form_of(Mnemonic m) {
  switch (m) {
    case Mnemonic::kMovsImm: case Mnemonic::kCmpImm: case Mnemonic::kAddsImm8: case Mnemonic::kSubsImm8:
    case Mnemonic::kAddsImm3: case Mnemonic::kSubsImm3: case Mnemonic::kLslsImm: case Mnemonic::kLsrsImm:
    case Mnemonic::kAsrsImm: case Mnemonic::kStrImm: case Mnemonic::kLdrImm: case Mnemonic::kStrbImm:
    case Mnemonic::kLdrbImm: case Mnemonic::kNop: case Mnemonic::kBkpt:
      return Form::kImmediate;
    case Mnemonic::kLdrLit:
      return Form::kLiteral;
    case Mnemonic::kBCond: case Mnemonic::kB: case Mnemonic::kBx:
      return Form::kBranch;
    default:
      return Form::kRegister;
  }
}

enum class Cond : uint8_t { kEq, kNe, kCs, kCc, kMi, kPl, kVs, kVc, kHi, kLs, kGe, kLt, kGt, kLe, kAl };

inline constexpr std::array<std::string_view, 15> kCondNames = {
    "eq", "ne", "cs", "cc", "mi", "pl", "vs", "vc", "hi", "ls", "ge", "lt", "gt", "le", "al"};

inline constexpr uint8_t kCondAlways = 14;

struct Instruction {
  Mnemonic mnemonic = Mnemonic::kNop;
  uint8_t rd = 0;
  uint8_t rn = 0;
  uint8_t rm = 0;
  uint32_t imm = 0;
  uint8_t cond = 0;
  Form form = Form::kImmediate;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

class UndefinedError : public std::runtime_error {
 public:
  explicit UndefinedError(uint16_t hw)
      : std::runtime_error("undefined encoding 0x" + hex4(hw)), halfword(hw) {}
  uint16_t halfword;

 private:
  static std::string hex4(uint16_t v) {
    static constexpr char d[] = "0123456789abcdef";
    return {d[(v >> 12) & 0xF], d[(v >> 8) & 0xF], d[(v >> 4) & 0xF], d[v & 0xF]};
  }
};

class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Data-processing register group, indexed by op4.
inline constexpr std::array<Mnemonic, 16> kDataProc = {
    Mnemonic::kAnds, Mnemonic::kEors, Mnemonic::kLslsReg, Mnemonic::kLsrsReg,
    Mnemonic::kAsrsReg, Mnemonic::kAdcs, Mnemonic::kSbcs, Mnemonic::kRors,
    Mnemonic::kTst, Mnemonic::kRsbs, Mnemonic::kCmpReg, Mnemonic::kCmn,
    Mnemonic::kOrrs, Mnemonic::kMuls, Mnemonic::kBics, Mnemonic::kMvns};

inline constexpr int data_proc_op(Mnemonic m) {
  for (int i = 0; i < 16; ++i)
    if (kDataProc[static_cast<size_t>(i)] == m) return i;
  return -1;
}

inline Instruction make(Mnemonic m) {
  Instruction i;
  i.mnemonic = m;
  i.form = form_of(m);
  return i;
}

}  // namespace detail

// Decodes without throwing; nullopt for anything outside the subset.
inline std::optional<Instruction> try_decode(uint16_t hw) {
  using detail::make;
  const auto bits = [hw](int hi, int lo) -> uint32_t {
    return (static_cast<uint32_t>(hw) >> lo) & ((1u << (hi - lo + 1)) - 1);
  };
  const auto r3 = [&](int lo) { return static_cast<uint8_t>(bits(lo + 2, lo)); };

  switch (hw >> 13) {
    case 0b000: {
      const uint32_t op = bits(12, 11);
      if (op != 0b11) {
        static constexpr Mnemonic kShift[] = {Mnemonic::kLslsImm, Mnemonic::kLsrsImm, Mnemonic::kAsrsImm};
        Instruction i = make(kShift[op]);
        i.imm = bits(10, 6);
        i.rm = r3(3);
        i.rd = r3(0);
        return i;
      }
      static constexpr Mnemonic kAddSub[] = {Mnemonic::kAddsReg, Mnemonic::kSubsReg, Mnemonic::kAddsImm3,
                                             Mnemonic::kSubsImm3};
      Instruction i = make(kAddSub[bits(10, 9)]);
      if (bits(10, 10) == 0) i.rm = r3(6);
      else i.imm = bits(8, 6);
      i.rn = r3(3);
      i.rd = r3(0);
      return i;
    }
    case 0b001: {
      static constexpr Mnemonic kImm8[] = {Mnemonic::kMovsImm, Mnemonic::kCmpImm, Mnemonic::kAddsImm8,
                                           Mnemonic::kSubsImm8};
      const Mnemonic m = kImm8[bits(12, 11)];
      Instruction i = make(m);
      const uint8_t r = r3(8);
      if (m == Mnemonic::kMovsImm) i.rd = r;
      else if (m == Mnemonic::kCmpImm) i.rn = r;
      else i.rd = i.rn = r;
      i.imm = bits(7, 0);
      return i;
    }
    case 0b010: {
      if (bits(12, 10) == 0b000) {
        const Mnemonic m = detail::kDataProc[bits(9, 6)];
        Instruction i = make(m);
        const uint8_t lo = r3(0), hi = r3(3);
        switch (m) {
          case Mnemonic::kTst: case Mnemonic::kCmpReg: case Mnemonic::kCmn:
            i.rn = lo; i.rm = hi; break;
          case Mnemonic::kRsbs:
            i.rd = lo; i.rn = hi; break;
          case Mnemonic::kMuls:
            i.rd = lo; i.rm = lo; i.rn = hi; break;
          case Mnemonic::kMvns:
            i.rd = lo; i.rm = hi; break;
          default:
            i.rd = i.rn = lo; i.rm = hi; break;
        }
        return i;
      }
      if (bits(12, 7) == 0b001110 && bits(2, 0) == 0) {
        Instruction i = make(Mnemonic::kBx);
        i.rm = static_cast<uint8_t>(bits(6, 3));
        return i;
      }
      if (bits(12, 11) == 0b01) {
        Instruction i = make(Mnemonic::kLdrLit);
        i.rd = r3(8);
        i.imm = bits(7, 0);
        return i;
      }
      return std::nullopt;
    }
    case 0b011: {
      static constexpr Mnemonic kLs[] = {Mnemonic::kStrImm, Mnemonic::kLdrImm, Mnemonic::kStrbImm,
                                         Mnemonic::kLdrbImm};
      Instruction i = make(kLs[bits(12, 11)]);
      i.imm = bits(10, 6);
      i.rn = r3(3);
      i.rd = r3(0);
      return i;
    }
    case 0b101: {
      if (hw == 0xBF00) return make(Mnemonic::kNop);
      if ((hw >> 8) == 0xBE) {
        Instruction i = make(Mnemonic::kBkpt);
        i.imm = bits(7, 0);
        return i;
      }
      return std::nullopt;
    }
    case 0b110: {
      if (bits(12, 12) == 0) return std::nullopt;
      const uint32_t cond = bits(11, 8);
      if (cond >= 14) return std::nullopt;
      Instruction i = make(Mnemonic::kBCond);
      i.cond = static_cast<uint8_t>(cond);
      i.imm = bits(7, 0);
      return i;
    }
    case 0b111: {
      if (bits(12, 11) != 0b00) return std::nullopt;
      Instruction i = make(Mnemonic::kB);
      i.cond = kCondAlways;
      i.imm = bits(10, 0);
      return i;
    }
    default:
      return std::nullopt;
  }
}

inline Instruction decode(uint16_t hw) {
  if (auto i = try_decode(hw)) return *i;
  throw UndefinedError(hw);
}

namespace detail {

struct FieldSpec {
  bool rd, rn, rm;
  uint32_t imm_max;  // 0 when the form has no immediate
  uint8_t reg_max;   // 7 for low-register forms
};

inline constexpr FieldSpec field_spec(Mnemonic m) {
  switch (m) {
    case Mnemonic::kMovsImm: return {true, false, false, 255, 7};
    case Mnemonic::kCmpImm: return {false, true, false, 255, 7};
    case Mnemonic::kAddsImm8: case Mnemonic::kSubsImm8: return {true, true, false, 255, 7};
    case Mnemonic::kAddsReg: case Mnemonic::kSubsReg: return {true, true, true, 0, 7};
    case Mnemonic::kAddsImm3: case Mnemonic::kSubsImm3: return {true, true, false, 7, 7};
    case Mnemonic::kTst: case Mnemonic::kCmpReg: case Mnemonic::kCmn: return {false, true, true, 0, 7};
    case Mnemonic::kRsbs: return {true, true, false, 0, 7};
    case Mnemonic::kMvns: return {true, false, true, 0, 7};
    case Mnemonic::kLslsImm: case Mnemonic::kLsrsImm: case Mnemonic::kAsrsImm: return {true, false, true, 31, 7};
    case Mnemonic::kStrImm: case Mnemonic::kLdrImm: case Mnemonic::kStrbImm: case Mnemonic::kLdrbImm:
      return {true, true, false, 31, 7};
    case Mnemonic::kLdrLit: return {true, false, false, 255, 7};
    case Mnemonic::kBCond: return {false, false, false, 255, 7};
    case Mnemonic::kB: return {false, false, false, 2047, 7};
    case Mnemonic::kBx: return {false, false, true, 0, 15};
    case Mnemonic::kNop: return {false, false, false, 0, 7};
    case Mnemonic::kBkpt: return {false, false, false, 255, 7};
    default: return {true, true, true, 0, 7};  // two-operand data processing, muls
  }
}

}  // namespace detail

// Checks the invariants of `inst` and returns its halfword.
inline uint16_t encode(const Instruction& inst) {
  using M = Mnemonic;
  const M m = inst.mnemonic;
  if (static_cast<size_t>(m) >= kMnemonicCount) throw RangeError("unknown mnemonic");
  const auto spec = detail::field_spec(m);
  const auto check_reg = [&](bool used, uint8_t r, const char* what) {
    if (!used && r != 0) throw RangeError(std::string(name(m)) + ": " + what + " is not an operand");
    if (r > spec.reg_max) throw RangeError(std::string(name(m)) + ": " + what + " out of range");
  };
  check_reg(spec.rd, inst.rd, "rd");
  check_reg(spec.rn, inst.rn, "rn");
  check_reg(spec.rm, inst.rm, "rm");
  if (inst.imm > spec.imm_max) throw RangeError(std::string(name(m)) + ": immediate exceeds field width");
  if (inst.form != form_of(m)) throw RangeError(std::string(name(m)) + ": wrong form tag");
  const uint8_t expected_cond = m == M::kBCond ? inst.cond : (m == M::kB ? kCondAlways : 0);
  if (m == M::kBCond ? inst.cond >= 14 : inst.cond != expected_cond)
    throw RangeError(std::string(name(m)) + ": condition out of range");

  const uint32_t rd = inst.rd, rn = inst.rn, rm = inst.rm, imm = inst.imm;
  uint32_t hw = 0;
  switch (m) {
    case M::kLslsImm: hw = (0b00000u << 11) | (imm << 6) | (rm << 3) | rd; break;
    case M::kLsrsImm: hw = (0b00001u << 11) | (imm << 6) | (rm << 3) | rd; break;
    case M::kAsrsImm: hw = (0b00010u << 11) | (imm << 6) | (rm << 3) | rd; break;
    case M::kAddsReg: hw = (0b0001100u << 9) | (rm << 6) | (rn << 3) | rd; break;
    case M::kSubsReg: hw = (0b0001101u << 9) | (rm << 6) | (rn << 3) | rd; break;
    case M::kAddsImm3: hw = (0b0001110u << 9) | (imm << 6) | (rn << 3) | rd; break;
    case M::kSubsImm3: hw = (0b0001111u << 9) | (imm << 6) | (rn << 3) | rd; break;
    case M::kMovsImm: hw = (0b00100u << 11) | (rd << 8) | imm; break;
    case M::kCmpImm: hw = (0b00101u << 11) | (rn << 8) | imm; break;
    case M::kAddsImm8:
    case M::kSubsImm8:
      if (rd != rn) throw RangeError(std::string(name(m)) + ": rd and rn must name the same register");
      hw = ((m == M::kAddsImm8 ? 0b00110u : 0b00111u) << 11) | (rd << 8) | imm;
      break;
    case M::kBx: hw = (0b010001110u << 7) | (rm << 3); break;
    case M::kLdrLit: hw = (0b01001u << 11) | (rd << 8) | imm; break;
    case M::kStrImm: hw = (0b01100u << 11) | (imm << 6) | (rn << 3) | rd; break;
    case M::kLdrImm: hw = (0b01101u << 11) | (imm << 6) | (rn << 3) | rd; break;
    case M::kStrbImm: hw = (0b01110u << 11) | (imm << 6) | (rn << 3) | rd; break;
    case M::kLdrbImm: hw = (0b01111u << 11) | (imm << 6) | (rn << 3) | rd; break;
    case M::kNop: hw = 0xBF00; break;
    case M::kBkpt: hw = 0xBE00 | imm; break;
    case M::kBCond: hw = (0b1101u << 12) | (static_cast<uint32_t>(inst.cond) << 8) | imm; break;
    case M::kB: hw = (0b11100u << 11) | imm; break;
    default: {
      const uint32_t op = static_cast<uint32_t>(detail::data_proc_op(m));
      uint32_t lo = 0, hi = 0;
      switch (m) {
        case M::kTst: case M::kCmpReg: case M::kCmn: lo = rn; hi = rm; break;
        case M::kRsbs: lo = rd; hi = rn; break;
        case M::kMuls:
          if (rd != rm) throw RangeError("muls: rd and rm must name the same register");
          lo = rd; hi = rn;
          break;
        case M::kMvns: lo = rd; hi = rm; break;
        default:
          if (rd != rn) throw RangeError(std::string(name(m)) + ": rd and rn must name the same register");
          lo = rd; hi = rm;
          break;
      }
      hw = (0b010000u << 10) | (op << 6) | (hi << 3) | lo;
      break;
    }
  }
  return static_cast<uint16_t>(hw);
}

// Builders; each yields a well-formed Instruction (encode() still validates
// ranges).
namespace ops {

using detail::make;

inline Instruction with(Mnemonic m, uint8_t rd, uint8_t rn, uint8_t rm, uint32_t imm) {
  Instruction i = make(m);
  i.rd = rd; i.rn = rn; i.rm = rm; i.imm = imm;
  return i;
}

inline Instruction movs_imm(uint8_t rd, uint32_t imm8) { return with(Mnemonic::kMovsImm, rd, 0, 0, imm8); }
inline Instruction cmp_imm(uint8_t rn, uint32_t imm8) { return with(Mnemonic::kCmpImm, 0, rn, 0, imm8); }
inline Instruction adds_imm8(uint8_t rdn, uint32_t imm8) { return with(Mnemonic::kAddsImm8, rdn, rdn, 0, imm8); }
inline Instruction subs_imm8(uint8_t rdn, uint32_t imm8) { return with(Mnemonic::kSubsImm8, rdn, rdn, 0, imm8); }
inline Instruction adds_reg(uint8_t rd, uint8_t rn, uint8_t rm) { return with(Mnemonic::kAddsReg, rd, rn, rm, 0); }
inline Instruction subs_reg(uint8_t rd, uint8_t rn, uint8_t rm) { return with(Mnemonic::kSubsReg, rd, rn, rm, 0); }
inline Instruction adds_imm3(uint8_t rd, uint8_t rn, uint32_t imm3) { return with(Mnemonic::kAddsImm3, rd, rn, 0, imm3); }
inline Instruction subs_imm3(uint8_t rd, uint8_t rn, uint32_t imm3) { return with(Mnemonic::kSubsImm3, rd, rn, 0, imm3); }

// Two-operand data processing: Rdn = Rdn op Rm.
inline Instruction dp(Mnemonic m, uint8_t rdn, uint8_t rm) {
  switch (m) {
    case Mnemonic::kTst: case Mnemonic::kCmpReg: case Mnemonic::kCmn: return with(m, 0, rdn, rm, 0);
    case Mnemonic::kRsbs: return with(m, rdn, rm, 0, 0);
    case Mnemonic::kMuls: return with(m, rdn, rm, rdn, 0);
    case Mnemonic::kMvns: return with(m, rdn, 0, rm, 0);
    default: return with(m, rdn, rdn, rm, 0);
  }
}
inline Instruction ands(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kAnds, rdn, rm); }
inline Instruction eors(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kEors, rdn, rm); }
inline Instruction adcs(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kAdcs, rdn, rm); }
inline Instruction sbcs(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kSbcs, rdn, rm); }
inline Instruction orrs(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kOrrs, rdn, rm); }
inline Instruction bics(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kBics, rdn, rm); }
inline Instruction tst(uint8_t rn, uint8_t rm) { return dp(Mnemonic::kTst, rn, rm); }
inline Instruction cmp_reg(uint8_t rn, uint8_t rm) { return dp(Mnemonic::kCmpReg, rn, rm); }
inline Instruction cmn(uint8_t rn, uint8_t rm) { return dp(Mnemonic::kCmn, rn, rm); }
// rsbs rd, rn, #0
inline Instruction rsbs(uint8_t rd, uint8_t rn) { return with(Mnemonic::kRsbs, rd, rn, 0, 0); }
// muls rdm, rn, rdm
inline Instruction muls(uint8_t rdm, uint8_t rn) { return with(Mnemonic::kMuls, rdm, rn, rdm, 0); }
inline Instruction mvns(uint8_t rd, uint8_t rm) { return with(Mnemonic::kMvns, rd, 0, rm, 0); }
inline Instruction lsls_reg(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kLslsReg, rdn, rm); }
inline Instruction lsrs_reg(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kLsrsReg, rdn, rm); }
inline Instruction asrs_reg(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kAsrsReg, rdn, rm); }
inline Instruction rors(uint8_t rdn, uint8_t rm) { return dp(Mnemonic::kRors, rdn, rm); }
inline Instruction lsls_imm(uint8_t rd, uint8_t rm, uint32_t imm5) { return with(Mnemonic::kLslsImm, rd, 0, rm, imm5); }
inline Instruction lsrs_imm(uint8_t rd, uint8_t rm, uint32_t imm5) { return with(Mnemonic::kLsrsImm, rd, 0, rm, imm5); }
inline Instruction asrs_imm(uint8_t rd, uint8_t rm, uint32_t imm5) { return with(Mnemonic::kAsrsImm, rd, 0, rm, imm5); }
// Offsets are the raw imm5 field: bytes for strb/ldrb, words for str/ldr.
inline Instruction str_imm(uint8_t rt, uint8_t rn, uint32_t imm5) { return with(Mnemonic::kStrImm, rt, rn, 0, imm5); }
inline Instruction ldr_imm(uint8_t rt, uint8_t rn, uint32_t imm5) { return with(Mnemonic::kLdrImm, rt, rn, 0, imm5); }
inline Instruction strb_imm(uint8_t rt, uint8_t rn, uint32_t imm5) { return with(Mnemonic::kStrbImm, rt, rn, 0, imm5); }
inline Instruction ldrb_imm(uint8_t rt, uint8_t rn, uint32_t imm5) { return with(Mnemonic::kLdrbImm, rt, rn, 0, imm5); }
inline Instruction ldr_lit(uint8_t rt, uint32_t imm8) { return with(Mnemonic::kLdrLit, rt, 0, 0, imm8); }
inline Instruction b_cond(Cond c, uint32_t imm8) {
  Instruction i = with(Mnemonic::kBCond, 0, 0, 0, imm8);
  i.cond = static_cast<uint8_t>(c);
  return i;
}
inline Instruction b(uint32_t imm11) {
  Instruction i = with(Mnemonic::kB, 0, 0, 0, imm11);
  i.cond = kCondAlways;
  return i;
}
inline Instruction bx(uint8_t rm) { return with(Mnemonic::kBx, 0, 0, rm, 0); }
inline Instruction nop() { return make(Mnemonic::kNop); }
inline Instruction bkpt(uint32_t imm8 = 0) { return with(Mnemonic::kBkpt, 0, 0, 0, imm8); }

}  // namespace ops

// Classification helpers shared by executors, generator and coverage.

inline constexpr bool is_load_store(Mnemonic m) {
  return m == Mnemonic::kStrImm || m == Mnemonic::kLdrImm || m == Mnemonic::kStrbImm || m == Mnemonic::kLdrbImm;
}

inline constexpr bool is_branch(Mnemonic m) { return m == Mnemonic::kBCond || m == Mnemonic::kB || m == Mnemonic::kBx; }

// Flags an instruction writes, as a mask N=8 Z=4 C=2 V=1.
inline constexpr unsigned flags_written(Mnemonic m) {
  switch (m) {
    case Mnemonic::kMovsImm: case Mnemonic::kAnds: case Mnemonic::kEors: case Mnemonic::kTst:
    case Mnemonic::kOrrs: case Mnemonic::kMuls: case Mnemonic::kBics: case Mnemonic::kMvns:
      return 0b1100;
    case Mnemonic::kLslsReg: case Mnemonic::kLsrsReg: case Mnemonic::kAsrsReg: case Mnemonic::kRors:
    case Mnemonic::kLslsImm: case Mnemonic::kLsrsImm: case Mnemonic::kAsrsImm:
      return 0b1110;
    case Mnemonic::kCmpImm: case Mnemonic::kAddsImm8: case Mnemonic::kSubsImm8: case Mnemonic::kAddsReg:
    case Mnemonic::kSubsReg: case Mnemonic::kAddsImm3: case Mnemonic::kSubsImm3: case Mnemonic::kAdcs:
    case Mnemonic::kSbcs: case Mnemonic::kRsbs: case Mnemonic::kCmpReg: case Mnemonic::kCmn:
      return 0b1111;
    default:
      return 0;
  }
}

// Registers read as data operands (excludes the PC read by ldr_lit).
inline std::array<int, 3> source_registers(const Instruction& i) {
  using M = Mnemonic;
  switch (i.mnemonic) {
    case M::kMovsImm: case M::kLdrLit: case M::kBCond: case M::kB: case M::kNop: case M::kBkpt:
      return {-1, -1, -1};
    case M::kCmpImm: case M::kAddsImm8: case M::kSubsImm8: case M::kAddsImm3: case M::kSubsImm3:
    case M::kRsbs: case M::kLdrImm: case M::kLdrbImm:
      return {i.rn, -1, -1};
    case M::kLslsImm: case M::kLsrsImm: case M::kAsrsImm: case M::kMvns: case M::kBx:
      return {i.rm, -1, -1};
    case M::kStrImm: case M::kStrbImm:
      return {i.rn, i.rd, -1};
    default:
      return {i.rn, i.rm, -1};
  }
}

inline std::optional<uint8_t> destination_register(const Instruction& i) {
  using M = Mnemonic;
  switch (i.mnemonic) {
    case M::kCmpImm: case M::kTst: case M::kCmpReg: case M::kCmn: case M::kStrImm: case M::kStrbImm:
    case M::kBCond: case M::kB: case M::kBx: case M::kNop: case M::kBkpt:
      return std::nullopt;
    default:
      return i.rd;
  }
}

inline std::string reg_name(unsigned r) {
  switch (r) {
    case 13: return "sp";
    case 14: return "lr";
    case 15: return "pc";
    default: return "r" + std::to_string(r);
  }
}

// Unified-syntax disassembly, e.g. "adds r1, r2, r3".
inline std::string to_string(const Instruction& i) {
  using M = Mnemonic;
  const auto r = [](unsigned x) { return reg_name(x); };
  const auto imm = [](uint32_t v) { return "#" + std::to_string(v); };
  const int32_t b8 = static_cast<int32_t>(static_cast<int8_t>(i.imm & 0xFF)) * 2 + 4;
  const int32_t b11 = ((static_cast<int32_t>(i.imm << 21)) >> 20) + 4;
  const auto rel = [](int32_t off) { return std::string(off < 0 ? ".-" : ".+") + std::to_string(off < 0 ? -off : off); };
  switch (i.mnemonic) {
    case M::kMovsImm: return "movs " + r(i.rd) + ", " + imm(i.imm);
    case M::kCmpImm: return "cmp " + r(i.rn) + ", " + imm(i.imm);
    case M::kAddsImm8: return "adds " + r(i.rd) + ", " + imm(i.imm);
    case M::kSubsImm8: return "subs " + r(i.rd) + ", " + imm(i.imm);
    case M::kAddsReg: return "adds " + r(i.rd) + ", " + r(i.rn) + ", " + r(i.rm);
    case M::kSubsReg: return "subs " + r(i.rd) + ", " + r(i.rn) + ", " + r(i.rm);
    case M::kAddsImm3: return "adds " + r(i.rd) + ", " + r(i.rn) + ", " + imm(i.imm);
    case M::kSubsImm3: return "subs " + r(i.rd) + ", " + r(i.rn) + ", " + imm(i.imm);
    case M::kTst: return "tst " + r(i.rn) + ", " + r(i.rm);
    case M::kCmpReg: return "cmp " + r(i.rn) + ", " + r(i.rm);
    case M::kCmn: return "cmn " + r(i.rn) + ", " + r(i.rm);
    case M::kRsbs: return "rsbs " + r(i.rd) + ", " + r(i.rn) + ", #0";
    case M::kMuls: return "muls " + r(i.rd) + ", " + r(i.rn) + ", " + r(i.rd);
    case M::kMvns: return "mvns " + r(i.rd) + ", " + r(i.rm);
    case M::kLslsImm: return "lsls " + r(i.rd) + ", " + r(i.rm) + ", " + imm(i.imm);
    case M::kLsrsImm: return "lsrs " + r(i.rd) + ", " + r(i.rm) + ", " + imm(i.imm == 0 ? 32 : i.imm);
    case M::kAsrsImm: return "asrs " + r(i.rd) + ", " + r(i.rm) + ", " + imm(i.imm == 0 ? 32 : i.imm);
    case M::kStrImm: return "str " + r(i.rd) + ", [" + r(i.rn) + ", " + imm(i.imm * 4) + "]";
    case M::kLdrImm: return "ldr " + r(i.rd) + ", [" + r(i.rn) + ", " + imm(i.imm * 4) + "]";
    case M::kStrbImm: return "strb " + r(i.rd) + ", [" + r(i.rn) + ", " + imm(i.imm) + "]";
    case M::kLdrbImm: return "ldrb " + r(i.rd) + ", [" + r(i.rn) + ", " + imm(i.imm) + "]";
    case M::kLdrLit: return "ldr " + r(i.rd) + ", [pc, " + imm(i.imm * 4) + "]";
    case M::kBCond: return "b" + std::string(kCondNames[i.cond]) + " " + rel(b8);
    case M::kB: return "b " + rel(b11);
    case M::kBx: return "bx " + r(i.rm);
    case M::kNop: return "nop";
    case M::kBkpt: return "bkpt " + imm(i.imm);
    default: {
      std::string n(name(i.mnemonic));
      if (auto p = n.find('_'); p != std::string::npos) n.resize(p);
      return n + " " + r(i.rd) + ", " + r(i.rm);
    }
  }
}

}  // namespace m3lv::isa
