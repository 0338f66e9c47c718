// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "m3lv/bus/signals.hpp"

namespace m3lv::dut {

enum class PortUse : uint8_t { kFetch, kData, kStack, kVector };

struct PortOp {
  uint32_t addr = 0;
  isa::AccessSize size = isa::AccessSize::kWord;
  bool write = false;
  uint32_t wdata = 0;  // full bus word, already on its byte lanes
  PortUse use = PortUse::kFetch;
  uint64_t epoch = 0;
  uint32_t aux = 0;  // fetch: first halfword address wanted; stack: frame slot
};

struct PortCompletion {
  PortOp op;
  uint32_t rdata = 0;
  bool error = false;
};

// One AHB-Lite master port: an address-phase slot and a data-phase slot.
// A presented address phase is never withdrawn; it waits for HREADY.
class BusMaster {
 public:
  // Consumes the slave's reply for the current cycle.
  std::optional<PortCompletion> tick(const bus::BusReply& r) {
    if (r.hready == 0) return std::nullopt;
    std::optional<PortCompletion> done;
    if (data_) done = PortCompletion{*data_, r.hrdata, r.hresp == bus::hresp::kError};
    data_ = addr_;
    addr_.reset();
    return done;
  }

  bool can_issue() const { return !addr_; }
  void issue(const PortOp& op) { addr_ = op; }
  bool idle() const { return !addr_ && !data_; }

  bus::BusRequest request() const {
    bus::BusRequest q;
    if (addr_) {
      q.htrans = bus::htrans::kNonseq;
      q.hsize = static_cast<uint8_t>(addr_->size);
      q.hwrite = addr_->write ? 1 : 0;
      q.haddr = addr_->addr;
    }
    if (data_ && data_->write) q.hwdata = data_->wdata;
    return q;
  }

 private:
  std::optional<PortOp> addr_;
  std::optional<PortOp> data_;
};

}  // namespace m3lv::dut
