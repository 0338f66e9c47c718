// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "m3lv/tb/campaign.hpp"
#include "m3lv/vplan/plan.hpp"

namespace m3lv::vplan {

// One run request per stimulus entry; `suite` expands to every directed test.
// Random entries use the entry's wait states, directed ones their own unless
// `wait_override` is set.
inline std::vector<tb::RunRequest> plan_requests(const VPlan& plan, dut::BugId bug = dut::BugId::kNone,
                                                 uint64_t cycle_budget = 0,
                                                 std::optional<uint8_t> wait_override = std::nullopt) {
  std::vector<tb::RunRequest> reqs;
  for (const auto& s : plan.stimulus) {
    if (s.test == "suite") {
      for (auto r : tb::suite_requests(bug)) {
        r.cycle_budget = cycle_budget;
        reqs.push_back(r);
      }
      continue;
    }
    tb::RunRequest r;
    r.test = s.test;
    r.seed = s.seed;
    r.count = s.count;
    r.bug = bug;
    r.cycle_budget = cycle_budget;
    r.weights = parse_weights(s.weights);
    r.wait_states = s.test == "random" ? std::optional<uint8_t>(s.wait_states) : wait_override;
    reqs.push_back(r);
  }
  return reqs;
}

}  // namespace m3lv::vplan
