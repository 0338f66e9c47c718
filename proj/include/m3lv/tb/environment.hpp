// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Build, connect, run, report. Each cycle:
//   1. apply interrupt events due this cycle
//   2. ask the controller for a directive and check its invariants
//   3. step the memory on both ports and sample the bus
//   4. clock the core; commit any directive it took
//   5. on retirement: step the reference model (mirroring the exception the
//      core committed), unpack against the bus, compare, sample coverage
// until the core halts and its ports drain, or the cycle budget runs out.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "m3lv/bus/memory.hpp"
#include "m3lv/bus/monitor.hpp"
#include "m3lv/bus/trace.hpp"
#include "m3lv/dut/core.hpp"
#include "m3lv/isa/reference.hpp"
#include "m3lv/nvic/nvic.hpp"
#include "m3lv/tb/checker.hpp"
#include "m3lv/tb/coverage.hpp"
#include "m3lv/tb/driver.hpp"
#include "m3lv/tb/stimulus.hpp"

namespace m3lv::tb {

struct EnvironmentConfig {
  std::string test = "random";
  uint64_t seed = 0;
  Stimulus stimulus;
  dut::BugId bug = dut::BugId::kNone;
  uint8_t code_wait = 0;
  uint8_t sram_wait = 0;
  uint64_t cycle_budget = 0;  // 0: derived from the program size
  uint32_t irq_lines = 16;
  bool checking = true;
  bool coverage = true;
  bool stop_on_mismatch = true;
  bool record = false;  // keep per-cycle retirements and directives
  std::ostream* trace = nullptr;
};

// Architectural rule broken outside the retire stream (SP alignment at
// exception entry, controller invariants).
struct ArchViolation {
  uint64_t cycle = 0;
  std::string rule;
  std::string message;
  friend bool operator==(const ArchViolation&, const ArchViolation&) = default;
};

struct Timed {
  uint64_t cycle = 0;
  isa::RetireEvent event;
};

struct TimedDirective {
  uint64_t cycle = 0;
  NvicDirective directive;
};

struct CampaignResult {
  std::string test;
  uint64_t seed = 0;
  dut::BugId bug = dut::BugId::kNone;
  uint8_t code_wait = 0;
  uint8_t sram_wait = 0;
  uint64_t cycles = 0;
  uint64_t retired = 0;
  bool halted = false;
  bool faulted = false;
  bool budget_exceeded = false;
  std::vector<Mismatch> mismatches;
  std::vector<bus::Violation> violations;
  std::vector<ArchViolation> arch_violations;
  CoverageModel coverage;

  std::vector<Timed> retirements;
  std::vector<TimedDirective> directives;
  std::vector<uint64_t> irq_applied;  // cycle of each applied timeline event

  size_t violation_count() const { return violations.size() + arch_violations.size(); }
  bool passed() const { return mismatches.empty() && violation_count() == 0 && !budget_exceeded; }
};

inline uint64_t default_budget(const Stimulus& s) {
  uint64_t n = 0;
  for (const auto& it : s) n += it.kind == ItemKind::kInstruction ? 1 : 0;
  return 2000 + 64 * n;
}

inline CampaignResult run_environment(const EnvironmentConfig& cfg) {
  CampaignResult r;
  r.test = cfg.test;
  r.seed = cfg.seed;
  r.bug = cfg.bug;
  r.code_wait = cfg.code_wait;
  r.sram_wait = cfg.sram_wait;

  // Build.
  auto image = isa::MemoryImage::standard(cfg.code_wait, cfg.sram_wait);
  const DrivenProgram prog = drive(cfg.stimulus, image);
  isa::ReferenceModel ref(isa::reset_state(image), image);
  bus::BusMemory memory(std::move(image));
  dut::Core core(memory.image());
  core.inject_bug(cfg.bug);
  nvic::Nvic nv(cfg.irq_lines);
  nvic::InvariantMonitor invariants;
  bus::Monitor monitor;
  Scoreboard scoreboard;
  std::optional<bus::TraceWriter> trace;
  if (cfg.trace) trace.emplace(*cfg.trace);

  // Connect: the monitor taps both ports whenever anything consumes it.
  const bool observe = cfg.checking || cfg.coverage;
  std::vector<bus::Transfer> window;
  NvicDirective mirror = NvicDirective::none();  // exception the core committed, for the reference
  size_t next_irq = 0;
  const uint64_t budget = cfg.cycle_budget != 0 ? cfg.cycle_budget : default_budget(cfg.stimulus);

  // Run.
  uint64_t c = 0;
  for (;; ++c) {
    if (c >= budget) {
      r.budget_exceeded = true;
      break;
    }
    while (next_irq < prog.timeline.size() && prog.timeline[next_irq].cycle <= c) {
      nvic::apply(nv, prog.timeline[next_irq++]);
      if (cfg.record) r.irq_applied.push_back(c);
    }
    const NvicDirective directive = nv.decide(core.exception_return_pending());
    if (cfg.checking)
      if (auto err = invariants.check_cycle(nv, directive)) r.arch_violations.push_back({c, "NVIC", *err});

    const bus::BusRequest qi = core.icode_request(), qd = core.dcode_request();
    const bus::BusReply ri = memory.memory_step(bus::Port::kIcode, qi);
    const bus::BusReply rd = memory.memory_step(bus::Port::kDcode, qd);
    const auto si = bus::BusSample::of(c, bus::Port::kIcode, qi, ri);
    const auto sd = bus::BusSample::of(c, bus::Port::kDcode, qd, rd);
    if (trace) {
      trace->write(si);
      trace->write(sd);
    }
    if (observe) {
      auto oi = monitor.monitor_step(si);
      auto od = monitor.monitor_step(sd);
      if (cfg.checking) {
        r.violations.insert(r.violations.end(), oi.violations.begin(), oi.violations.end());
        r.violations.insert(r.violations.end(), od.violations.begin(), od.violations.end());
      }
      window.insert(window.end(), od.transfers.begin(), od.transfers.end());
    }

    const dut::ClockOutput out = core.clock(ri, rd, directive);

    if (out.retired) {
      const isa::RetireEvent& ev = *out.retired;
      ++r.retired;
      if (ev.exception && ev.exception->kind == isa::ExceptionKind::kFault) r.faulted = true;
      if (cfg.record) r.retirements.push_back({c, ev});
      ArchTransaction txn{ev, {}, std::nullopt};
      if (cfg.checking) {
        if (!ref.halted())
          scoreboard.expect(ref.step(mirror.action == DirectiveAction::kNone ? std::nullopt : std::optional(mirror)));
        mirror = NvicDirective::none();
        try {
          txn = check_unpack(ev, window);
        } catch (const InconsistentEvent& e) {
          r.mismatches.push_back({ev.seq, "unpack", "bus traffic matching the retirement", e.what(), Family::kMemory,
                                  scope_of(ev)});
          txn.transfers = window;
        }
        try {
          if (auto m = scoreboard.compare(txn)) r.mismatches.push_back(*m);
        } catch (const ExpectedUnderflow& e) {
          r.mismatches.push_back({ev.seq, "underflow", "no retirement", isa::to_string(ev), Family::kFetch,
                                  scope_of(ev)});
        }
      } else {
        txn.transfers = window;
      }
      if (cfg.coverage) r.coverage.sample(txn);
      window.clear();
    }

    if (out.accepted) {
      nv.acknowledge(*out.accepted);
      if (cfg.record) r.directives.push_back({c, *out.accepted});
      if (out.accepted->action == DirectiveAction::kEnter || out.accepted->action == DirectiveAction::kTailChain)
        mirror = *out.accepted;
      if (cfg.checking) {
        if (auto err = invariants.on_acknowledge(nv, *out.accepted)) r.arch_violations.push_back({c, "NVIC", *err});
        if (out.accepted->action == DirectiveAction::kEnter && !isa::aligned(core.arch().sp(), isa::AccessSize::kWord))
          r.arch_violations.push_back(
              {c, "SP_ALIGN", "SP " + util::hex32(core.arch().sp()) + " not word-aligned at exception entry"});
      }
    }

    if (cfg.stop_on_mismatch && !r.mismatches.empty()) {
      ++c;
      break;
    }
    if (core.quiescent()) {
      r.halted = true;
      ++c;
      break;
    }
  }
  r.cycles = c;
  return r;
}

}  // namespace m3lv::tb
