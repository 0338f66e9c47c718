// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// What one retirement commits. The pipelined core and the reference model
// emit the same record so the scoreboard can compare them field by field.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/memory.hpp"
#include "m3lv/util.hpp"

namespace m3lv::isa {

struct Flags {
  bool n = false;
  bool z = false;
  bool c = false;
  bool v = false;

  uint32_t bits() const { return (n ? 8u : 0u) | (z ? 4u : 0u) | (c ? 2u : 0u) | (v ? 1u : 0u); }
  static Flags from_bits(uint32_t b) { return {(b & 8) != 0, (b & 4) != 0, (b & 2) != 0, (b & 1) != 0}; }

  friend bool operator==(const Flags&, const Flags&) = default;
};

struct Writeback {
  uint8_t reg = 0;
  uint32_t value = 0;
  friend bool operator==(const Writeback&, const Writeback&) = default;
};

enum class MemKind : uint8_t { kRead, kWrite };

struct MemEffect {
  MemKind kind = MemKind::kRead;
  uint32_t addr = 0;
  AccessSize size = AccessSize::kWord;
  uint32_t data = 0;  // zero-extended value of `size` bytes
  friend bool operator==(const MemEffect&, const MemEffect&) = default;
};

enum class ExceptionKind : uint8_t { kEntry, kReturn, kTailChain, kFault };

// Exception side effects. For kEntry the event carries no instruction and pc
// is the stacked return address; kReturn and kTailChain ride on the BX that
// performed the exception return; kFault halts the core.
struct ExceptionEffect {
  ExceptionKind kind = ExceptionKind::kEntry;
  uint32_t number = 0;  // entered (entry, tail-chain), left (return), or 3 for faults
  uint32_t sp = 0;      // SP after the event
  uint32_t lr = 0;      // LR after the event
  friend bool operator==(const ExceptionEffect&, const ExceptionEffect&) = default;
};

struct RetireEvent {
  uint64_t seq = 0;
  uint32_t pc = 0;
  std::optional<Instruction> inst;
  // Register write; branch-class events write r15 with the redirect target.
  std::optional<Writeback> wb;
  Flags flags_after;
  std::optional<MemEffect> mem;
  std::optional<ExceptionEffect> exception;

  friend bool operator==(const RetireEvent&, const RetireEvent&) = default;
};

inline std::string to_string(const Flags& f) {
  std::string s = "----";
  if (f.n) s[0] = 'N';
  if (f.z) s[1] = 'Z';
  if (f.c) s[2] = 'C';
  if (f.v) s[3] = 'V';
  return s;
}

inline std::string to_string(AccessSize s) {
  switch (s) {
    case AccessSize::kByte: return "byte";
    case AccessSize::kHalf: return "half";
    case AccessSize::kWord: return "word";
  }
  return "?";
}

inline std::string to_string(const std::optional<Writeback>& wb) {
  if (!wb) return "none";
  return reg_name(wb->reg) + "=" + util::hex32(wb->value);
}

inline std::string to_string(const std::optional<MemEffect>& m) {
  if (!m) return "none";
  return std::string(m->kind == MemKind::kRead ? "read " : "write ") + to_string(m->size) + " [" +
         util::hex32(m->addr) + "]=" + util::hex32(m->data);
}

inline std::string to_string(const std::optional<ExceptionEffect>& e) {
  if (!e) return "none";
  static constexpr const char* kKinds[] = {"entry", "return", "tail_chain", "fault"};
  return std::string(kKinds[static_cast<int>(e->kind)]) + "(" + std::to_string(e->number) +
         ") sp=" + util::hex32(e->sp) + " lr=" + util::hex32(e->lr);
}

inline std::string to_string(const std::optional<Instruction>& i) { return i ? to_string(*i) : "none"; }

inline std::string to_string(const RetireEvent& e) {
  return "#" + std::to_string(e.seq) + " pc=" + util::hex32(e.pc) + " " + to_string(e.inst) +
         " wb=" + to_string(e.wb) + " flags=" + to_string(e.flags_after) + " mem=" + to_string(e.mem) +
         " exc=" + to_string(e.exception);
}

}  // namespace m3lv::isa
