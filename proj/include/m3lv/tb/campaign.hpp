// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Turns a test selector into environment configurations and runs them,
// optionally on several threads. Results always come back in request order.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "m3lv/dut/bugs.hpp"
#include "m3lv/tb/directed.hpp"
#include "m3lv/tb/environment.hpp"
#include "m3lv/tb/generator.hpp"
#include "m3lv/util.hpp"

namespace m3lv::tb {

struct RunRequest {
  std::string test = "random";  // directed test name or random
  uint64_t seed = 0;
  uint32_t count = 1000;
  dut::BugId bug = dut::BugId::kNone;
  std::optional<uint8_t> wait_states;  // both ports; random runs sample 0..3 from the seed otherwise
  std::array<double, isa::kMnemonicCount> weights = GeneratorConfig::default_weights();
  uint64_t cycle_budget = 0;
  bool stop_on_mismatch = true;
};

class UnknownTest : public std::invalid_argument {
 public:
  explicit UnknownTest(const std::string& name) : std::invalid_argument("unknown test `" + name + "`") {}
};

// Wait states for a random run: code and SRAM drawn independently from 0..3.
inline std::pair<uint8_t, uint8_t> sampled_wait_states(uint64_t seed) {
  util::SplitMix64 r(seed ^ 0x5741495453544154ull);
  const auto code = static_cast<uint8_t>(r.below(4));
  const auto sram = static_cast<uint8_t>(r.below(4));
  return {code, sram};
}

inline EnvironmentConfig make_config(const RunRequest& req) {
  EnvironmentConfig cfg;
  cfg.test = req.test;
  cfg.seed = req.seed;
  cfg.bug = req.bug;
  cfg.cycle_budget = req.cycle_budget;
  cfg.stop_on_mismatch = req.stop_on_mismatch;
  if (req.test == "random") {
    GeneratorConfig g;
    g.seed = req.seed;
    g.count = req.count;
    g.weights = req.weights;
    cfg.stimulus = generate(g);
    std::tie(cfg.code_wait, cfg.sram_wait) = sampled_wait_states(req.seed);
  } else {
    const DirectedTest* t = find_directed(req.test);
    if (t == nullptr) throw UnknownTest(req.test);
    cfg.stimulus = t->build();
    cfg.code_wait = t->code_wait;
    cfg.sram_wait = t->sram_wait;
  }
  if (req.wait_states) cfg.code_wait = cfg.sram_wait = *req.wait_states;
  return cfg;
}

inline CampaignResult run_request(const RunRequest& req) { return run_environment(make_config(req)); }

// Runs every request; `jobs` worker threads (0 = hardware concurrency).
inline std::vector<CampaignResult> run_all(const std::vector<RunRequest>& reqs, unsigned jobs = 1) {
  std::vector<CampaignResult> out(reqs.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<size_t>(reqs.size(), 1)));
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(reqs.size());
  const auto worker = [&] {
    for (size_t i = next++; i < reqs.size(); i = next++) {
      try {
        out[i] = run_request(reqs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Every directed test, each with its own wait states.
inline std::vector<RunRequest> suite_requests(dut::BugId bug = dut::BugId::kNone) {
  std::vector<RunRequest> reqs;
  for (const auto& t : directed_tests()) {
    RunRequest r;
    r.test = t.name;
    r.bug = bug;
    reqs.push_back(r);
  }
  return reqs;
}

}  // namespace m3lv::tb
