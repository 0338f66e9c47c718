// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Interrupt-controller to core directive, shared by the NVIC, the pipelined
// core and the reference model.

#pragma once

#include <cstdint>
#include <string>

namespace m3lv {

inline constexpr uint32_t kFirstExternalException = 16;
inline constexpr uint32_t kHardFault = 3;

// EXC_RETURN values loaded into LR on exception entry (main stack only).
inline constexpr uint32_t kExcReturnHandler = 0xFFFFFFF1;
inline constexpr uint32_t kExcReturnThread = 0xFFFFFFF9;

inline constexpr bool is_exc_return(uint32_t v) { return (v & 0xFFFFFFF0u) == 0xFFFFFFF0u; }

enum class DirectiveAction : uint8_t { kNone, kEnter, kTailChain, kReturn };

struct NvicDirective {
  DirectiveAction action = DirectiveAction::kNone;
  uint32_t exception = 0;  // exception number for kEnter and kTailChain

  static NvicDirective none() { return {}; }
  static NvicDirective enter(uint32_t e) { return {DirectiveAction::kEnter, e}; }
  static NvicDirective tail_chain(uint32_t e) { return {DirectiveAction::kTailChain, e}; }
  static NvicDirective exception_return() { return {DirectiveAction::kReturn, 0}; }

  friend bool operator==(const NvicDirective&, const NvicDirective&) = default;
};

inline std::string to_string(const NvicDirective& d) {
  switch (d.action) {
    case DirectiveAction::kNone: return "none";
    case DirectiveAction::kEnter: return "enter(" + std::to_string(d.exception) + ")";
    case DirectiveAction::kTailChain: return "tail_chain(" + std::to_string(d.exception) + ")";
    case DirectiveAction::kReturn: return "return";
  }
  return "?";
}

}  // namespace m3lv
