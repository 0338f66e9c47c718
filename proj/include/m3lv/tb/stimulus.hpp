// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/memory.hpp"
#include "m3lv/nvic/stimulus.hpp"

namespace m3lv::tb {

inline constexpr int kMainSection = -1;

enum class ItemKind : uint8_t { kInstruction, kIrq, kConfig };

// One unit of stimulus. Instructions belong to the main program or to the
// handler of an interrupt line (`section`); config items carry key/value
// settings the driver understands (`sp`).
struct StimulusItem {
  ItemKind kind = ItemKind::kInstruction;
  uint64_t seq_id = 0;
  isa::Instruction inst;
  int section = kMainSection;
  nvic::IrqEvent irq;
  std::string key;
  uint32_t value = 0;

  friend bool operator==(const StimulusItem&, const StimulusItem&) = default;
};

using Stimulus = std::vector<StimulusItem>;

class InfeasibleConstraint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GeneratorConfig {
  uint64_t seed = 0;
  uint32_t count = 100;  // main-program instructions before the halt
  std::array<double, isa::kMnemonicCount> weights = default_weights();
  uint8_t reg_max = 7;          // registers r0..reg_max
  double corner_bias = 0.25;    // chance an immediate is 0, 1 or its field maximum
  double corner_block_rate = 0.08;  // chance a block loads a corner value into a register
  uint32_t window_base = isa::kSramBase;
  uint32_t window_size = 0x400;  // load/store window, bytes
  double branch_density = 0.0;   // extra chance per block of a forward branch
  uint32_t max_branch_skip = 4;  // instructions a forward branch may jump over
  double irq_rate = 0.003;       // pend events per main-program instruction
  uint32_t irq_lines = 4;

  static std::array<double, isa::kMnemonicCount> default_weights() {
    std::array<double, isa::kMnemonicCount> w{};
    w.fill(1.0);
    w[static_cast<size_t>(isa::Mnemonic::kBx)] = 0.0;
    w[static_cast<size_t>(isa::Mnemonic::kBkpt)] = 0.0;
    return w;
  }

  static std::array<double, isa::kMnemonicCount> alu_only_weights() {
    std::array<double, isa::kMnemonicCount> w{};
    for (size_t i = 0; i < w.size(); ++i) {
      const auto m = static_cast<isa::Mnemonic>(i);
      w[i] = (isa::is_load_store(m) || isa::is_branch(m) || m == isa::Mnemonic::kLdrLit ||
              m == isa::Mnemonic::kNop || m == isa::Mnemonic::kBkpt)
                 ? 0.0
                 : 1.0;
    }
    return w;
  }
};

}  // namespace m3lv::tb
