// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Constrained-random program generator.
//
// The main program is a sequence of blocks:
//   single ALU / ldr_lit / nop instruction
//   load/store: materialize a base register, then the access, so the
//     effective address always lands in the configured window
//   forward branch over 0..max_branch_skip ALU instructions; the target is
//     the start of the next block, so no branch can loop
//   corner block: materialize 0, 1, 0x7fffffff, 0x80000000 or 0xffffffff
// A block that does not fit in the remaining count is replaced by nops. The
// program ends with bkpt. Each interrupt line gets a short handler that only
// writes r0-r3 and returns with `bx lr`.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "m3lv/isa/assembler.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/tb/stimulus.hpp"
#include "m3lv/util.hpp"

namespace m3lv::tb {

inline constexpr std::array<uint32_t, 5> kCornerValues = {0u, 1u, 0x7FFFFFFFu, 0x80000000u, 0xFFFFFFFFu};

// Top of SRAM kept free for exception frames.
inline constexpr uint32_t kStackReserve = 0x400;

class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) { validate(); }

  Stimulus generate() {
    Stimulus out;
    std::vector<isa::Instruction> body;
    while (body.size() < cfg_.count) {
      const size_t remaining = cfg_.count - body.size();
      auto block = make_block(remaining);
      if (block.size() > remaining) block.assign(remaining, isa::ops::nop());
      body.insert(body.end(), block.begin(), block.end());
    }
    body.push_back(isa::ops::bkpt());
    for (const auto& i : body) push_inst(out, i, kMainSection);

    if (cfg_.irq_lines > 0 && cfg_.irq_rate > 0) {
      for (uint32_t line = 0; line < cfg_.irq_lines; ++line) {
        const uint32_t n = 1 + static_cast<uint32_t>(rng_.below(4));
        for (uint32_t k = 0; k < n; ++k) push_inst(out, alu(pick_alu(), 3), static_cast<int>(line));
        push_inst(out, isa::ops::bx(14), static_cast<int>(line));
      }
      for (const auto& e : irq_events()) {
        StimulusItem it;
        it.kind = ItemKind::kIrq;
        it.seq_id = next_id_++;
        it.irq = e;
        out.push_back(it);
      }
    }
    return out;
  }

 private:
  void validate() const {
    double usable = 0;
    bool memory_ops = false;
    for (size_t i = 0; i < cfg_.weights.size(); ++i) {
      const double w = cfg_.weights[i];
      if (!(w >= 0) || !std::isfinite(w)) throw InfeasibleConstraint("weights must be finite and nonnegative");
      const auto m = static_cast<isa::Mnemonic>(i);
      if (m == isa::Mnemonic::kBx || m == isa::Mnemonic::kBkpt) continue;
      usable += w;
      if (w > 0 && isa::is_load_store(m)) memory_ops = true;
    }
    if (!(usable > 0))
      throw InfeasibleConstraint("no generatable mnemonic has a positive weight (bx and bkpt are never generated)");
    if (cfg_.reg_max > 7) throw InfeasibleConstraint("register range exceeds r7");
    if (memory_ops) {
      const uint64_t lo = cfg_.window_base, hi = lo + cfg_.window_size;
      const uint64_t sram_lo = isa::kSramBase, sram_hi = uint64_t{isa::kSramBase} + isa::kSramSize - kStackReserve;
      if (cfg_.window_size < 4 || (lo & 3) != 0 || lo < sram_lo || hi > sram_hi)
        throw InfeasibleConstraint("load/store window must be word-aligned, at least 4 bytes, inside SRAM and clear of "
                                   "the stack reserve");
    }
  }

  void push_inst(Stimulus& out, const isa::Instruction& i, int section) {
    StimulusItem it;
    it.kind = ItemKind::kInstruction;
    it.seq_id = next_id_++;
    it.inst = i;
    it.section = section;
    out.push_back(it);
  }

  uint8_t reg() { return static_cast<uint8_t>(rng_.below(cfg_.reg_max + 1u)); }
  uint8_t dest(uint8_t cap) { return static_cast<uint8_t>(rng_.below(std::min<uint32_t>(cap, cfg_.reg_max) + 1u)); }

  uint32_t imm(unsigned width) {
    const uint32_t max = (1u << width) - 1;
    if (rng_.chance(cfg_.corner_bias)) {
      const uint32_t c[] = {0, 1, max};
      return c[rng_.below(3)];
    }
    return static_cast<uint32_t>(rng_.below(max + 1u));
  }

  isa::Mnemonic draw() { return static_cast<isa::Mnemonic>(rng_.weighted(usable_weights())); }

  std::span<const double> usable_weights() {
    if (!usable_) {
      usable_ = cfg_.weights;
      (*usable_)[static_cast<size_t>(isa::Mnemonic::kBx)] = 0;
      (*usable_)[static_cast<size_t>(isa::Mnemonic::kBkpt)] = 0;
    }
    return *usable_;
  }

  static bool is_alu(isa::Mnemonic m) {
    return !isa::is_load_store(m) && !isa::is_branch(m) && m != isa::Mnemonic::kLdrLit &&
           m != isa::Mnemonic::kNop && m != isa::Mnemonic::kBkpt;
  }

  // ALU mnemonic drawn with the configured weights; movs_imm when none has
  // weight.
  isa::Mnemonic pick_alu() {
    if (!alu_weights_) {
      alu_weights_.emplace();
      for (size_t i = 0; i < cfg_.weights.size(); ++i)
        (*alu_weights_)[i] = is_alu(static_cast<isa::Mnemonic>(i)) ? cfg_.weights[i] : 0.0;
      alu_any_ = std::any_of(alu_weights_->begin(), alu_weights_->end(), [](double w) { return w > 0; });
    }
    if (!alu_any_) return isa::Mnemonic::kMovsImm;
    return static_cast<isa::Mnemonic>(rng_.weighted(*alu_weights_));
  }

  // One ALU instruction whose destination is at most r`dest_cap`.
  isa::Instruction alu(isa::Mnemonic m, uint8_t dest_cap = 7) {
    using M = isa::Mnemonic;
    namespace o = isa::ops;
    const uint8_t d = dest(dest_cap);
    switch (m) {
      case M::kMovsImm: return o::movs_imm(d, imm(8));
      case M::kCmpImm: return o::cmp_imm(reg(), imm(8));
      case M::kAddsImm8: return o::adds_imm8(d, imm(8));
      case M::kSubsImm8: return o::subs_imm8(d, imm(8));
      case M::kAddsReg: return o::adds_reg(d, reg(), reg());
      case M::kSubsReg: return o::subs_reg(d, reg(), reg());
      case M::kAddsImm3: return o::adds_imm3(d, reg(), imm(3));
      case M::kSubsImm3: return o::subs_imm3(d, reg(), imm(3));
      case M::kTst:
      case M::kCmpReg:
      case M::kCmn: return o::dp(m, reg(), reg());
      case M::kRsbs: return o::rsbs(d, reg());
      case M::kMuls: return o::muls(d, reg());
      case M::kMvns: return o::mvns(d, reg());
      case M::kLslsImm: return o::lsls_imm(d, reg(), imm(5));
      case M::kLsrsImm: return o::lsrs_imm(d, reg(), imm(5));
      case M::kAsrsImm: return o::asrs_imm(d, reg(), imm(5));
      default: return o::dp(m, d, reg());
    }
  }

  std::vector<isa::Instruction> make_block(size_t remaining) {
    using M = isa::Mnemonic;
    if (rng_.chance(cfg_.corner_block_rate))
      return isa::ProgramBuilder::materialize_sequence(reg(), kCornerValues[rng_.below(kCornerValues.size())]);
    if (rng_.chance(cfg_.branch_density)) return branch_block(rng_.chance(0.5) ? M::kBCond : M::kB, remaining);
    const M m = draw();
    if (isa::is_load_store(m)) return memory_block(m);
    if (m == M::kB || m == M::kBCond) return branch_block(m, remaining);
    if (m == M::kLdrLit) return {isa::ops::ldr_lit(reg(), imm(8))};
    if (m == M::kNop) return {isa::ops::nop()};
    return {alu(m)};
  }

  std::vector<isa::Instruction> memory_block(isa::Mnemonic m) {
    using M = isa::Mnemonic;
    const bool word = m == M::kLdrImm || m == M::kStrImm;
    const uint32_t scale = word ? 4 : 1;
    const uint32_t addr = cfg_.window_base + static_cast<uint32_t>(rng_.below(cfg_.window_size / scale)) * scale;
    const uint32_t off = imm(5);
    const uint8_t base = reg(), rt = reg();
    auto seq = isa::ProgramBuilder::materialize_sequence(base, addr - off * scale);
    isa::Instruction access;
    switch (m) {
      case M::kStrImm: access = isa::ops::str_imm(rt, base, off); break;
      case M::kLdrImm: access = isa::ops::ldr_imm(rt, base, off); break;
      case M::kStrbImm: access = isa::ops::strb_imm(rt, base, off); break;
      default: access = isa::ops::ldrb_imm(rt, base, off); break;
    }
    seq.push_back(access);
    return seq;
  }

  std::vector<isa::Instruction> branch_block(isa::Mnemonic m, size_t remaining) {
    const uint32_t cap = static_cast<uint32_t>(std::min<size_t>(cfg_.max_branch_skip, remaining - 1));
    const uint32_t skip = static_cast<uint32_t>(rng_.below(cap + 1u));
    // Target = branch + 2 + 2 * skip = branch + 4 + 2 * imm.
    const uint32_t field = skip - 1;
    std::vector<isa::Instruction> seq;
    if (m == isa::Mnemonic::kBCond)
      seq.push_back(isa::ops::b_cond(static_cast<isa::Cond>(rng_.below(14)), field & 0xFF));
    else
      seq.push_back(isa::ops::b(field & 0x7FF));
    for (uint32_t k = 0; k < skip; ++k) seq.push_back(alu(pick_alu()));
    return seq;
  }

  std::vector<nvic::IrqEvent> irq_events() {
    std::vector<nvic::IrqEvent> ev;
    for (uint32_t line = 0; line < cfg_.irq_lines; ++line) {
      ev.push_back({0, line, nvic::IrqActionKind::kPriority, static_cast<uint8_t>(0x20 * rng_.below(8))});
      ev.push_back({0, line, nvic::IrqActionKind::kEnable, 0});
    }
    const double expected = cfg_.count * cfg_.irq_rate;
    uint64_t n = static_cast<uint64_t>(expected);
    if (rng_.chance(expected - static_cast<double>(n))) ++n;
    const uint64_t horizon = 2ull * cfg_.count + 16;
    std::vector<nvic::IrqEvent> timed;
    for (uint64_t k = 0; k < n; ++k) {
      nvic::IrqEvent e;
      e.cycle = 1 + rng_.below(horizon);
      e.line = static_cast<uint32_t>(rng_.below(cfg_.irq_lines));
      const double r = rng_.unit();
      if (r < 0.85) {
        e.action = nvic::IrqActionKind::kPend;
      } else if (r < 0.95) {
        e.action = nvic::IrqActionKind::kPriority;
        e.priority = static_cast<uint8_t>(0x20 * rng_.below(8));
      } else {
        e.action = nvic::IrqActionKind::kClear;
      }
      timed.push_back(e);
    }
    std::stable_sort(timed.begin(), timed.end(), [](const auto& a, const auto& b) { return a.cycle < b.cycle; });
    ev.insert(ev.end(), timed.begin(), timed.end());
    return ev;
  }

  GeneratorConfig cfg_;
  util::SplitMix64 rng_;
  uint64_t next_id_ = 0;
  std::optional<std::array<double, isa::kMnemonicCount>> usable_;
  std::optional<std::array<double, isa::kMnemonicCount>> alu_weights_;
  bool alu_any_ = false;
};

inline Stimulus generate(const GeneratorConfig& cfg) { return Generator(cfg).generate(); }

}  // namespace m3lv::tb
