// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Translates stimulus into the system's inputs: the program image at the
// code base, the vector table at 0, the initial SP and the interrupt
// timeline. DUT configuration (the vector table and reset values) is handled
// here as well, so there is no separate transactor.
//
// Vector table: word 0 initial SP, word 1 reset handler, word 16 + L the
// handler of interrupt line L. Handlers are placed after the main program.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "m3lv/exception.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/memory.hpp"
#include "m3lv/isa/program_image.hpp"
#include "m3lv/nvic/stimulus.hpp"
#include "m3lv/tb/stimulus.hpp"

namespace m3lv::tb {

inline constexpr uint32_t kCodeStart = 0x100;
inline constexpr uint32_t kDefaultSp = isa::kSramBase + isa::kSramSize;

class ImageOverlap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DrivenProgram {
  isa::ProgramImage image;  // code halfwords by address
  uint32_t entry = kCodeStart;
  uint32_t initial_sp = kDefaultSp;
  std::map<uint32_t, uint32_t> handlers;  // line -> address
  std::vector<nvic::IrqEvent> timeline;   // sorted by cycle
  size_t main_length = 0;                 // halfwords, including the halt
};

// Lays out `items` and writes program, vector table into `mem`.
inline DrivenProgram drive(const Stimulus& items, isa::MemoryImage& mem) {
  DrivenProgram p;
  std::vector<isa::Instruction> main;
  std::map<int, std::vector<isa::Instruction>> handlers;
  for (const auto& it : items) {
    switch (it.kind) {
      case ItemKind::kInstruction:
        if (it.section == kMainSection) main.push_back(it.inst);
        else if (it.section >= 0) handlers[it.section].push_back(it.inst);
        else throw std::invalid_argument("bad section " + std::to_string(it.section));
        break;
      case ItemKind::kIrq:
        p.timeline.push_back(it.irq);
        break;
      case ItemKind::kConfig:
        if (it.key == "sp") p.initial_sp = it.value;
        else throw std::invalid_argument("unknown config key `" + it.key + "`");
        break;
    }
  }
  if (main.empty() || main.back().mnemonic != isa::Mnemonic::kBkpt) main.push_back(isa::ops::bkpt());
  std::stable_sort(p.timeline.begin(), p.timeline.end(), [](const auto& a, const auto& b) { return a.cycle < b.cycle; });

  const isa::Region* code = mem.region_of(kCodeStart, 2);
  if (code == nullptr) throw ImageOverlap("code base is not mapped");
  const uint64_t code_end = uint64_t{code->base} + code->size;
  const uint32_t table_end = 4 * (kFirstExternalException + static_cast<uint32_t>(handlers.empty() ? 0 : handlers.rbegin()->first + 1));
  if (table_end > kCodeStart) throw ImageOverlap("vector table overlaps the code base");

  uint64_t addr = kCodeStart;
  const auto place = [&](const std::vector<isa::Instruction>& seq) {
    if (addr + 2 * seq.size() > code_end)
      throw ImageOverlap("program of " + std::to_string(addr - kCodeStart + 2 * seq.size()) +
                         " bytes exceeds the code region");
    for (const auto& i : seq) {
      p.image[static_cast<uint32_t>(addr)] = isa::encode(i);
      addr += 2;
    }
  };
  place(main);
  p.main_length = main.size();
  for (const auto& [line, seq] : handlers) {
    addr = (addr + 3) & ~uint64_t{3};
    p.handlers[static_cast<uint32_t>(line)] = static_cast<uint32_t>(addr);
    place(seq);
  }

  isa::load_image(mem, p.image);
  mem.write32(0, p.initial_sp);
  mem.write32(4, p.entry | 1);
  for (const auto& [line, at] : p.handlers) mem.write32(4 * (kFirstExternalException + line), at | 1);
  return p;
}

}  // namespace m3lv::tb
