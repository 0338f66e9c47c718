// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "m3lv/isa/instruction.hpp"

namespace m3lv::isa {

// Straight-line assembler with labels. Branch and literal operands are
// resolved when the program is placed at a base address.
class ProgramBuilder {
 public:
  ProgramBuilder& emit(const Instruction& i) {
    items_.push_back({Item::kInst, i, {}, 0});
    return *this;
  }

  ProgramBuilder& label(const std::string& name) {
    if (!labels_.emplace(name, items_.size()).second) throw std::invalid_argument("duplicate label " + name);
    return *this;
  }

  ProgramBuilder& b(const std::string& target) {
    items_.push_back({Item::kBranch, ops::b(0), target, 0});
    return *this;
  }

  ProgramBuilder& b_cond(Cond c, const std::string& target) {
    items_.push_back({Item::kBranch, ops::b_cond(c, 0), target, 0});
    return *this;
  }

  // ldr rt, =label where label marks a word emitted by word().
  ProgramBuilder& ldr_lit(uint8_t rt, const std::string& target) {
    items_.push_back({Item::kLiteral, ops::ldr_lit(rt, 0), target, 0});
    return *this;
  }

  // Pads with a nop to a word boundary.
  ProgramBuilder& align4() {
    items_.push_back({Item::kAlign, ops::nop(), {}, 0});
    return *this;
  }

  ProgramBuilder& word(uint32_t value) {
    items_.push_back({Item::kWord, {}, {}, value});
    return *this;
  }

  // Builds `value` in `rd` with movs/lsls/adds, at most seven instructions.
  // Clobbers the flags.
  ProgramBuilder& materialize(uint8_t rd, uint32_t value) {
    for (const auto& i : materialize_sequence(rd, value)) emit(i);
    return *this;
  }

  static std::vector<Instruction> materialize_sequence(uint8_t rd, uint32_t value) {
    std::vector<Instruction> seq;
    int top = 3;
    while (top > 0 && ((value >> (8 * top)) & 0xFF) == 0) --top;
    seq.push_back(ops::movs_imm(rd, (value >> (8 * top)) & 0xFF));
    for (int byte = top - 1; byte >= 0; --byte) {
      seq.push_back(ops::lsls_imm(rd, rd, 8));
      const uint32_t b = (value >> (8 * byte)) & 0xFF;
      if (b != 0) seq.push_back(ops::adds_imm8(rd, b));
    }
    return seq;
  }

  size_t size() const { return items_.size(); }

  // Halfwords placed at `base` (halfword-aligned).
  std::vector<uint16_t> assemble(uint32_t base) const {
    std::vector<uint32_t> addr(items_.size() + 1);
    uint32_t a = base;
    for (size_t k = 0; k < items_.size(); ++k) {
      if (items_[k].kind == Item::kWord && (a & 3) != 0) throw std::invalid_argument("unaligned word");
      addr[k] = a;
      if (items_[k].kind == Item::kAlign) a += (a & 3) != 0 ? 2 : 0;
      else a += items_[k].kind == Item::kWord ? 4 : 2;
    }
    addr[items_.size()] = a;

    std::vector<uint16_t> out;
    for (size_t k = 0; k < items_.size(); ++k) {
      const Item& it = items_[k];
      switch (it.kind) {
        case Item::kInst:
          out.push_back(encode(it.inst));
          break;
        case Item::kAlign:
          if ((addr[k] & 3) != 0) out.push_back(encode(ops::nop()));
          break;
        case Item::kWord:
          out.push_back(static_cast<uint16_t>(it.value));
          out.push_back(static_cast<uint16_t>(it.value >> 16));
          break;
        case Item::kBranch: {
          const int64_t delta = static_cast<int64_t>(target(it.target, addr)) - (static_cast<int64_t>(addr[k]) + 4);
          Instruction i = it.inst;
          if (i.mnemonic == Mnemonic::kBCond) {
            if (delta < -256 || delta > 254) throw std::out_of_range("conditional branch out of range");
            i.imm = static_cast<uint32_t>(delta / 2) & 0xFF;
          } else {
            if (delta < -2048 || delta > 2046) throw std::out_of_range("branch out of range");
            i.imm = static_cast<uint32_t>(delta / 2) & 0x7FF;
          }
          out.push_back(encode(i));
          break;
        }
        case Item::kLiteral: {
          const uint32_t t = target(it.target, addr);
          const uint32_t pc_base = (addr[k] + 4) & ~3u;
          if ((t & 3) != 0 || t < pc_base || t - pc_base > 1020) throw std::out_of_range("literal out of range");
          Instruction i = it.inst;
          i.imm = (t - pc_base) / 4;
          out.push_back(encode(i));
          break;
        }
      }
    }
    return out;
  }

 private:
  struct Item {
    enum Kind { kInst, kBranch, kLiteral, kAlign, kWord } kind;
    Instruction inst;
    std::string target;
    uint32_t value;
  };

  uint32_t target(const std::string& name, const std::vector<uint32_t>& addr) const {
    auto it = labels_.find(name);
    if (it == labels_.end()) throw std::invalid_argument("unknown label " + name);
    return addr[it->second];
  }

  std::vector<Item> items_;
  std::map<std::string, size_t> labels_;
};

}  // namespace m3lv::isa
