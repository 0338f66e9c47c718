// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "m3lv/nvic/nvic.hpp"
#include "m3lv/nvic/stimulus.hpp"
#include "m3lv/util.hpp"
#include "nvic_walk.hpp"
#include "oracles.hpp"

namespace {

using namespace m3lv;
using namespace m3lv::nvic;

TEST(Nvic, HighestPendingMatchesScan) {
  util::SplitMix64 rng(21);
  for (int k = 0; k < 20000; ++k) {
    const uint32_t n = 1 + static_cast<uint32_t>(rng.below(32));
    Nvic nv(n);
    std::vector<bool> pend(n), en(n);
    std::vector<uint8_t> prio(n);
    for (uint32_t l = 0; l < n; ++l) {
      pend[l] = rng.chance(0.4);
      en[l] = rng.chance(0.6);
      prio[l] = static_cast<uint8_t>(rng.below(4) * 64);
      if (pend[l]) nv.set_pending(l);
      nv.set_enabled(l, en[l]);
      nv.set_priority(l, prio[l]);
    }
    const auto want = oracle::scan_pending(pend, en, prio);
    const auto got = nv.highest_pending();
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) {
      EXPECT_EQ(got->line, want->first);
      EXPECT_EQ(got->priority, want->second);
    }
  }
}

TEST(Nvic, PreemptsOnlyOnStrictlyHigherPriority) {
  Nvic nv(4);
  nv.set_priority(0, 0x40);
  nv.set_enabled(0, true);
  nv.set_pending(0);
  EXPECT_EQ(nv.decide(false), NvicDirective::enter(16));
  nv.acknowledge(NvicDirective::enter(16));
  EXPECT_FALSE(nv.pending(0));
  EXPECT_TRUE(nv.active(0));

  nv.set_priority(1, 0x40);
  nv.set_enabled(1, true);
  nv.set_pending(1);
  EXPECT_EQ(nv.decide(false), NvicDirective::none());  // equal priority waits
  EXPECT_EQ(nv.decide(true), NvicDirective::tail_chain(17));

  nv.set_priority(2, 0x20);
  nv.set_enabled(2, true);
  nv.set_pending(2);
  EXPECT_EQ(nv.decide(false), NvicDirective::enter(18));
}

TEST(Nvic, ReturnWithNothingPending) {
  Nvic nv(2);
  nv.set_enabled(0, true);
  nv.set_pending(0);
  nv.acknowledge(nv.decide(false));
  EXPECT_EQ(nv.decide(true), NvicDirective::exception_return());
  nv.acknowledge(NvicDirective::exception_return());
  EXPECT_TRUE(nv.active_stack().empty());
  EXPECT_THROW(nv.decide(true), std::logic_error);
}

TEST(Nvic, DisabledLineNeverEnters) {
  Nvic nv(2);
  nv.set_pending(1);
  EXPECT_EQ(nv.decide(false), NvicDirective::none());
  EXPECT_THROW(nv.set_pending(2), LineOutOfRange);
}

TEST(Invariants, RandomSequencesHold) {
  for (uint64_t seed = 0; seed < 2000; ++seed) {
    const auto err = walk::nvic_sequence(seed, 200);
    ASSERT_FALSE(err) << "seed " << seed << ": " << *err;
  }
}

TEST(Invariants, CatchesMissedPreemption) {
  Nvic nv(2);
  nv.set_enabled(0, true);
  nv.set_pending(0);
  InvariantMonitor mon;
  EXPECT_TRUE(mon.check_cycle(nv, NvicDirective::none()).has_value());
  EXPECT_FALSE(mon.check_cycle(nv, NvicDirective::enter(16)).has_value());
}

TEST(Invariants, CatchesStackDivergence) {
  Nvic nv(2);
  nv.set_enabled(0, true);
  nv.set_pending(0);
  nv.acknowledge(NvicDirective::enter(16));
  InvariantMonitor mon;  // never told about the entry
  EXPECT_TRUE(mon.check_cycle(nv, NvicDirective::none()).has_value());
  EXPECT_TRUE(mon.on_acknowledge(nv, NvicDirective::exception_return()).has_value());
}

TEST(IrqFile, RoundTrip) {
  const std::vector<IrqEvent> ev = {{0, 1, IrqActionKind::kPriority, 0x80},
                                    {0, 1, IrqActionKind::kEnable, 0},
                                    {12, 1, IrqActionKind::kPend, 0},
                                    {30, 1, IrqActionKind::kClear, 0},
                                    {31, 1, IrqActionKind::kDisable, 0}};
  const std::string text = serialize_irq_events(ev);
  EXPECT_EQ(parse_irq_events(text), ev);
  EXPECT_EQ(serialize_irq_events(parse_irq_events(text)), text);
}

TEST(IrqFile, Errors) {
  EXPECT_THROW(parse_irq_events("when,line,action\n"), StimulusParseError);
  try {
    parse_irq_events("cycle,line,action\n1,0,pend\n2,0,explode\n");
    FAIL();
  } catch (const StimulusParseError& e) {
    EXPECT_EQ(e.line, 3u);
  }
  EXPECT_THROW(parse_irq_events("cycle,line,action\n1,0,prio:256\n"), StimulusParseError);
  EXPECT_THROW(parse_irq_events("cycle,line,action\nx,0,pend\n"), StimulusParseError);
}

}  // namespace
