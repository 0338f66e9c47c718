// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace m3lv::dut {

// Injectable deviations from the architecture.
//   ALU_CARRY  ADCS ignores the carry flag.
//   FLAG_Z16   Z is computed from the low 16 bits of the result.
//   FWD_MISS   execute misses the operand forwarded from the instruction
//              retiring in the same cycle and reads the stale register.
//   BR_OFF2    taken B / B<cond> targets are 2 bytes too far.
//   LSU_SIZE   STRB writes a whole word at the aligned address.
enum class BugId : uint8_t { kNone, kAluCarry, kFlagZ16, kFwdMiss, kBrOff2, kLsuSize };

inline constexpr std::array<std::string_view, 6> kBugNames = {"NONE",     "ALU_CARRY", "FLAG_Z16",
                                                              "FWD_MISS", "BR_OFF2",   "LSU_SIZE"};

inline constexpr std::array<BugId, 5> kAllBugs = {BugId::kAluCarry, BugId::kFlagZ16, BugId::kFwdMiss, BugId::kBrOff2,
                                                  BugId::kLsuSize};

inline constexpr std::string_view bug_name(BugId b) { return kBugNames[static_cast<size_t>(b)]; }

inline std::optional<BugId> parse_bug(std::string_view s) {
  for (size_t i = 0; i < kBugNames.size(); ++i)
    if (kBugNames[i] == s) return static_cast<BugId>(i);
  return std::nullopt;
}

}  // namespace m3lv::dut
