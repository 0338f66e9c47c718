// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "m3lv/bus/signals.hpp"
#include "m3lv/util.hpp"

namespace m3lv::bus {

class OutOfOrderSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MonitorOutput {
  std::vector<Transfer> transfers;
  std::vector<Violation> violations;
};

// Passive observer: reconstructs transfers from per-cycle samples and reports
// rule violations (see the rule table in signals.hpp). It only reads samples.
class Monitor {
 public:
  MonitorOutput monitor_step(const BusSample& s) {
    MonitorOutput out;
    PortState& ps = ports_[static_cast<size_t>(s.port)];
    if (ps.last_cycle && s.cycle <= *ps.last_cycle)
      throw OutOfOrderSample("cycle " + std::to_string(s.cycle) + " after " + std::to_string(*ps.last_cycle) +
                             " on port " + port_letter(s.port));
    if (!s.widths_ok()) throw std::invalid_argument("sample field exceeds its bit width");

    const auto violate = [&](Rule r, std::string msg) { out.violations.push_back({s.cycle, s.port, r, std::move(msg)}); };

    if (s.hresp > hresp::kError) violate(Rule::kV2, "reserved HRESP " + std::to_string(s.hresp));

    if (ps.prev && ps.prev->cycle + 1 == s.cycle && ps.prev->hready == 0) {
      const BusSample& p = *ps.prev;
      const bool error_first = p.hresp == hresp::kError;
      const bool held_addr = p.htrans != htrans::kIdle && !(error_first && s.htrans == htrans::kIdle);
      const bool addr_changed = p.htrans != s.htrans || p.hsize != s.hsize || p.hwrite != s.hwrite ||
                                p.hburst != s.hburst || p.haddr != s.haddr;
      const bool wdata_changed = ps.data && ps.data->write && ps.data->cycles_seen > 0 && p.hwdata != s.hwdata;
      if (held_addr && addr_changed)
        violate(Rule::kV1, "address phase changed while HREADY low (haddr " + util::hex32(p.haddr) + " -> " +
                               util::hex32(s.haddr) + ")");
      else if (wdata_changed)
        violate(Rule::kV1, "HWDATA changed while HREADY low");
    }

    if (ps.data) {
      DataPhase& d = *ps.data;
      ++d.cycles_seen;
      if (s.hresp == hresp::kError) {
        if (s.hready == 0) {
          if (d.error_first) violate(Rule::kV5, "ERROR held low for more than one cycle");
          d.error_first = true;
        } else {
          if (!d.error_first) violate(Rule::kV5, "ERROR completed without the HREADY-low first cycle");
          complete(out, s, d, Response::kError);
          ps.data.reset();
        }
      } else {
        if (d.error_first) {
          violate(Rule::kV5, "ERROR not held for its second cycle");
          d.error_first = false;
        }
        if (s.hready == 0) {
          ++d.waits;
        } else {
          complete(out, s, d, Response::kOkay);
          ps.data.reset();
        }
      }
    } else if (s.hresp == hresp::kError) {
      violate(Rule::kV5, "ERROR response with no transfer in its data phase");
    }

    if (s.hready == 1 && s.htrans != htrans::kIdle) {
      bool start = true;
      if ((s.htrans == htrans::kBusy || s.htrans == htrans::kSeq) && s.hburst == hburst::kSingle) {
        violate(Rule::kV4, std::string(s.htrans == htrans::kBusy ? "BUSY" : "SEQ") + " inside a SINGLE burst");
        start = s.htrans == htrans::kSeq;
      }
      if (s.hsize > hsize::kWord || s.hburst != hburst::kSingle) {
        violate(Rule::kV2, "reserved encoding (hsize " + std::to_string(s.hsize) + ", hburst " +
                               std::to_string(s.hburst) + ")");
        start = false;
      } else if (!isa::aligned(s.haddr, static_cast<AccessSize>(s.hsize))) {
        violate(Rule::kV3, "address " + util::hex32(s.haddr) + " not aligned to its size");
      }
      if (start && s.htrans != htrans::kBusy)
        ps.data = DataPhase{s.haddr, static_cast<AccessSize>(s.hsize), s.hwrite != 0, 0, 0, false};
    }

    ps.prev = s;
    ps.last_cycle = s.cycle;
    return out;
  }

 private:
  struct DataPhase {
    uint32_t addr;
    AccessSize size;
    bool write;
    uint32_t waits;
    uint32_t cycles_seen;
    bool error_first;
  };

  struct PortState {
    std::optional<uint64_t> last_cycle;
    std::optional<BusSample> prev;
    std::optional<DataPhase> data;
  };

  static void complete(MonitorOutput& out, const BusSample& s, const DataPhase& d, Response resp) {
    Transfer t;
    t.port = s.port;
    t.kind = d.write ? TransferKind::kWrite : TransferKind::kRead;
    t.addr = d.addr;
    t.size = d.size;
    t.data = resp == Response::kOkay ? lane_extract(d.write ? s.hwdata : s.hrdata, d.addr, d.size) : 0;
    t.wait_cycles = d.waits;
    t.response = resp;
    t.complete_cycle = s.cycle;
    out.transfers.push_back(t);
  }

  std::array<PortState, 2> ports_;
};

}  // namespace m3lv::bus
