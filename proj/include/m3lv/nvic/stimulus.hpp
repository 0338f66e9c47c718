// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Interrupt stimulus CSV: header `cycle,line,action`, one event per row,
// action one of pend, clear, enable, disable, prio:<0..255>.

#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "m3lv/nvic/nvic.hpp"
#include "m3lv/util.hpp"

namespace m3lv::nvic {

enum class IrqActionKind : uint8_t { kPend, kClear, kEnable, kDisable, kPriority };

struct IrqEvent {
  uint64_t cycle = 0;
  uint32_t line = 0;
  IrqActionKind action = IrqActionKind::kPend;
  uint8_t priority = 0;  // kPriority only

  friend bool operator==(const IrqEvent&, const IrqEvent&) = default;
};

inline void apply(Nvic& nv, const IrqEvent& e) {
  switch (e.action) {
    case IrqActionKind::kPend: nv.set_pending(e.line); break;
    case IrqActionKind::kClear: nv.clear_pending(e.line); break;
    case IrqActionKind::kEnable: nv.set_enabled(e.line, true); break;
    case IrqActionKind::kDisable: nv.set_enabled(e.line, false); break;
    case IrqActionKind::kPriority: nv.set_priority(e.line, e.priority); break;
  }
}

inline std::string action_text(const IrqEvent& e) {
  switch (e.action) {
    case IrqActionKind::kPend: return "pend";
    case IrqActionKind::kClear: return "clear";
    case IrqActionKind::kEnable: return "enable";
    case IrqActionKind::kDisable: return "disable";
    case IrqActionKind::kPriority: return "prio:" + std::to_string(e.priority);
  }
  return "?";
}

class StimulusParseError : public std::runtime_error {
 public:
  StimulusParseError(size_t l, const std::string& msg)
      : std::runtime_error("stimulus line " + std::to_string(l) + ": " + msg), line(l) {}
  size_t line;
};

inline std::string serialize_irq_events(const std::vector<IrqEvent>& events) {
  std::string out = "cycle,line,action\n";
  for (const auto& e : events) out += std::to_string(e.cycle) + "," + std::to_string(e.line) + "," + action_text(e) + "\n";
  return out;
}

inline std::vector<IrqEvent> parse_irq_events(std::string_view text) {
  std::vector<IrqEvent> events;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t n = 0;
  if (!std::getline(in, line) || util::trim(line) != "cycle,line,action") throw StimulusParseError(1, "bad header");
  ++n;
  while (std::getline(in, line)) {
    ++n;
    std::string_view row = util::trim(line);
    if (row.empty()) continue;
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw StimulusParseError(n, "expected cycle,line,action");
    IrqEvent e;
    try {
      e.cycle = util::parse_dec(util::trim(row.substr(0, c1)));
      e.line = static_cast<uint32_t>(util::parse_dec(util::trim(row.substr(c1 + 1, c2 - c1 - 1))));
    } catch (const std::invalid_argument&) {
      throw StimulusParseError(n, "bad number");
    }
    const auto act = util::trim(row.substr(c2 + 1));
    if (act == "pend") e.action = IrqActionKind::kPend;
    else if (act == "clear") e.action = IrqActionKind::kClear;
    else if (act == "enable") e.action = IrqActionKind::kEnable;
    else if (act == "disable") e.action = IrqActionKind::kDisable;
    else if (act.starts_with("prio:")) {
      e.action = IrqActionKind::kPriority;
      uint64_t p = 0;
      try {
        p = util::parse_dec(act.substr(5));
      } catch (const std::invalid_argument&) {
        throw StimulusParseError(n, "bad priority");
      }
      if (p > 255) throw StimulusParseError(n, "priority exceeds 8 bits");
      e.priority = static_cast<uint8_t>(p);
    } else {
      throw StimulusParseError(n, "unknown action `" + std::string(act) + "`");
    }
    events.push_back(e);
  }
  return events;
}

}  // namespace m3lv::nvic
