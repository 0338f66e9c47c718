// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "m3lv/bus/signals.hpp"
#include "m3lv/isa/memory.hpp"

namespace m3lv::bus {

// Two-port wait-state memory slave. Each region inserts its configured number
// of HREADY-low cycles before completing a transfer. Unmapped or misaligned
// addresses get the two-cycle ERROR response.
class BusMemory {
 public:
  explicit BusMemory(isa::MemoryImage image) : image_(std::move(image)) {}

  // One cycle on `port`: returns the data-phase response for this cycle, then
  // samples the address phase in `req` if HREADY is high.
  BusReply memory_step(Port port, const BusRequest& req) {
    auto& slot = phase_[static_cast<size_t>(port)];
    BusReply reply;
    if (slot) {
      DataPhase& d = *slot;
      if (d.error) {
        reply.hresp = hresp::kError;
        reply.hready = d.error_cycles_done == 0 ? 0 : 1;
        if (++d.error_cycles_done == 2) slot.reset();
      } else if (d.waits_left > 0) {
        reply.hready = 0;
        --d.waits_left;
      } else {
        const uint32_t word_addr = d.addr & ~3u;
        if (d.write) {
          image_.write(d.addr, d.size, lane_extract(req.hwdata, d.addr, d.size));
        } else {
          reply.hrdata = image_.read(word_addr, AccessSize::kWord).value_or(0);
        }
        slot.reset();
      }
    }
    if (reply.hready == 1 && req.active()) {
      DataPhase d;
      d.addr = req.haddr;
      d.size = static_cast<AccessSize>(req.hsize <= hsize::kWord ? req.hsize : hsize::kWord);
      d.write = req.hwrite != 0;
      const auto* region = image_.region_of(req.haddr, isa::bytes_of(d.size));
      d.error = region == nullptr || req.hsize > hsize::kWord || !isa::aligned(req.haddr, d.size);
      d.waits_left = region != nullptr ? region->wait_states : 0;
      slot = d;
    }
    return reply;
  }

  const isa::MemoryImage& image() const { return image_; }
  isa::MemoryImage& image() { return image_; }

  bool idle(Port port) const { return !phase_[static_cast<size_t>(port)].has_value(); }

 private:
  struct DataPhase {
    uint32_t addr = 0;
    AccessSize size = AccessSize::kWord;
    bool write = false;
    bool error = false;
    int error_cycles_done = 0;
    uint32_t waits_left = 0;
  };

  isa::MemoryImage image_;
  std::array<std::optional<DataPhase>, 2> phase_;
};

}  // namespace m3lv::bus
