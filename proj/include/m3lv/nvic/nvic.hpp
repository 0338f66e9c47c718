// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Nested vectored interrupt controller.
//
// The register and sequencing semantics are a reconstruction along the lines
// of the Cortex-M3 TRM, reduced to:
//   * external lines only, line L is exception number 16 + L;
//   * 8-bit priorities, lower value = more urgent, no sub-priority grouping;
//   * an enabled pending line preempts when its priority value is strictly
//     below that of the running context (thread level counts as 256);
//   * tail-chaining on exception return; no late-arrival optimisation.
//
// decide() proposes a directive every cycle; the core acts on it at its next
// retirement boundary and reports the directive it took, which is then
// applied with acknowledge().

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "m3lv/exception.hpp"

namespace m3lv::nvic {

inline constexpr uint32_t kThreadPriority = 256;

class LineOutOfRange : public std::out_of_range {
 public:
  explicit LineOutOfRange(uint32_t line) : std::out_of_range("interrupt line " + std::to_string(line) + " out of range") {}
};

struct ActiveEntry {
  uint32_t line = 0;
  uint32_t priority = 0;  // priority when it was entered
  friend bool operator==(const ActiveEntry&, const ActiveEntry&) = default;
};

struct PendingLine {
  uint32_t line = 0;
  uint32_t priority = 0;
  friend bool operator==(const PendingLine&, const PendingLine&) = default;
};

inline constexpr uint32_t exception_of(uint32_t line) { return kFirstExternalException + line; }
inline constexpr uint32_t line_of(uint32_t exception) { return exception - kFirstExternalException; }

class Nvic {
 public:
  explicit Nvic(uint32_t n_lines = 16)
      : n_lines_(n_lines), enabled_(n_lines, false), pending_(n_lines, false), priority_(n_lines, 0) {}

  uint32_t n_lines() const { return n_lines_; }

  void set_pending(uint32_t line) { pending_[check(line)] = true; }
  void clear_pending(uint32_t line) { pending_[check(line)] = false; }
  void set_enabled(uint32_t line, bool on) { enabled_[check(line)] = on; }
  void set_priority(uint32_t line, uint8_t prio) { priority_[check(line)] = prio; }

  bool pending(uint32_t line) const { return pending_[check(line)]; }
  bool enabled(uint32_t line) const { return enabled_[check(line)]; }
  uint8_t priority(uint32_t line) const { return priority_[check(line)]; }
  bool active(uint32_t line) const {
    check(line);
    for (const auto& e : active_stack_)
      if (e.line == line) return true;
    return false;
  }

  const std::vector<ActiveEntry>& active_stack() const { return active_stack_; }

  // Priority of the running context.
  uint32_t current_priority() const { return active_stack_.empty() ? kThreadPriority : active_stack_.back().priority; }

  // Priority the core returns to when the top entry exits.
  uint32_t restored_priority() const {
    return active_stack_.size() < 2 ? kThreadPriority : active_stack_[active_stack_.size() - 2].priority;
  }

  // Enabled pending line with the lowest priority value; ties go to the lowest
  // line number.
  std::optional<PendingLine> highest_pending() const {
    std::optional<PendingLine> best;
    for (uint32_t l = 0; l < n_lines_; ++l) {
      if (!pending_[l] || !enabled_[l]) continue;
      if (!best || priority_[l] < best->priority) best = PendingLine{l, priority_[l]};
    }
    return best;
  }

  // `core_returning` is set while the core holds an exception return that
  // waits for the controller's verdict.
  NvicDirective decide(bool core_returning) const {
    const auto best = highest_pending();
    if (core_returning) {
      if (active_stack_.empty()) throw std::logic_error("exception return with no active exception");
      if (best && best->priority < restored_priority()) return NvicDirective::tail_chain(exception_of(best->line));
      return NvicDirective::exception_return();
    }
    if (best && best->priority < current_priority()) return NvicDirective::enter(exception_of(best->line));
    return NvicDirective::none();
  }

  // Commits a directive the core has taken.
  void acknowledge(const NvicDirective& d) {
    switch (d.action) {
      case DirectiveAction::kNone:
        return;
      case DirectiveAction::kEnter: {
        const uint32_t line = check(line_of(d.exception));
        pending_[line] = false;
        active_stack_.push_back({line, priority_[line]});
        return;
      }
      case DirectiveAction::kTailChain: {
        if (active_stack_.empty()) throw std::logic_error("tail-chain with no active exception");
        const uint32_t line = check(line_of(d.exception));
        active_stack_.pop_back();
        pending_[line] = false;
        active_stack_.push_back({line, priority_[line]});
        return;
      }
      case DirectiveAction::kReturn:
        if (active_stack_.empty()) throw std::logic_error("return with no active exception");
        active_stack_.pop_back();
        return;
    }
  }

 private:
  uint32_t check(uint32_t line) const {
    if (line >= n_lines_) throw LineOutOfRange(line);
    return line;
  }

  uint32_t n_lines_;
  std::vector<bool> enabled_;
  std::vector<bool> pending_;
  std::vector<uint8_t> priority_;
  std::vector<ActiveEntry> active_stack_;
};

// Per-cycle checker for preemption soundness and stack discipline. Feed it
// the directive decide() produced and every directive the core acknowledged.
class InvariantMonitor {
 public:
  // Returns a description of the first broken invariant, if any.
  std::optional<std::string> check_cycle(const Nvic& nv, const NvicDirective& issued) const {
    const auto& stack = nv.active_stack();
    for (size_t i = 1; i < stack.size(); ++i)
      if (stack[i].priority >= stack[i - 1].priority) return "active stack priorities not strictly decreasing";
    const uint32_t top = nv.current_priority();
    for (uint32_t l = 0; l < nv.n_lines(); ++l) {
      if (nv.pending(l) && nv.enabled(l) && nv.priority(l) < top && issued.action != DirectiveAction::kEnter &&
          issued.action != DirectiveAction::kTailChain)
        return "line " + std::to_string(l) + " should preempt but no entry was issued";
    }
    if (shadow_.size() != stack.size()) return "active stack depth diverged from entry/return history";
    for (size_t i = 0; i < stack.size(); ++i)
      if (stack[i].line != shadow_[i]) return "active stack diverged from entry/return history";
    return std::nullopt;
  }

  // Mirrors the LIFO history independently of the controller; returns an
  // error when the acknowledged directive breaks it.
  std::optional<std::string> on_acknowledge(const Nvic& after, const NvicDirective& d) {
    switch (d.action) {
      case DirectiveAction::kNone:
        break;
      case DirectiveAction::kEnter:
        shadow_.push_back(line_of(d.exception));
        break;
      case DirectiveAction::kTailChain:
        if (shadow_.empty()) return "tail-chain with empty history";
        shadow_.back() = line_of(d.exception);
        break;
      case DirectiveAction::kReturn:
        if (shadow_.empty()) return "return with empty history";
        shadow_.pop_back();
        break;
    }
    if (d.action == DirectiveAction::kEnter || d.action == DirectiveAction::kTailChain) {
      const uint32_t line = line_of(d.exception);
      if (after.pending(line)) return "line " + std::to_string(line) + " still pending after entry";
    }
    return std::nullopt;
  }

 private:
  std::vector<uint32_t> shadow_;
};

}  // namespace m3lv::nvic
