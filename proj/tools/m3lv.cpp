// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// m3lv run | check-trace | list-tests | lint-plan
// Exit status: 0 pass, 1 mismatch / violation / failing feature, 2 usage or
// configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "m3lv/bus/monitor.hpp"
#include "m3lv/bus/trace.hpp"
#include "m3lv/nvic/stimulus.hpp"
#include "m3lv/report.hpp"
#include "m3lv/tb/campaign.hpp"
#include "m3lv/util.hpp"
#include "m3lv/vplan/plan.hpp"
#include "m3lv/vplan/requests.hpp"

namespace {

using namespace m3lv;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct RunOptions {
  std::string plan;
  std::string test = "random";
  uint64_t seed = 0;
  uint32_t count = 1000;
  std::string bug = "NONE";
  std::string trace;
  std::string report;
  uint64_t cycle_budget = 0;
  int wait_states = -1;
  std::string seeds;
  unsigned jobs = 1;
  std::string irq_file;
};

std::pair<uint64_t, uint64_t> parse_range(const std::string& s) {
  const size_t dash = s.find('-');
  try {
    if (dash == std::string::npos) {
      const uint64_t v = util::parse_dec(s);
      return {v, v};
    }
    const uint64_t a = util::parse_dec(s.substr(0, dash)), b = util::parse_dec(s.substr(dash + 1));
    if (b < a) throw UsageError("empty seed range " + s);
    return {a, b};
  } catch (const std::invalid_argument&) {
    throw UsageError("bad seed range `" + s + "`");
  }
}

tb::RunRequest base_request(const RunOptions& o, dut::BugId bug) {
  tb::RunRequest r;
  r.test = o.test;
  r.seed = o.seed;
  r.count = o.count;
  r.bug = bug;
  r.cycle_budget = o.cycle_budget;
  if (o.wait_states >= 0) r.wait_states = static_cast<uint8_t>(o.wait_states);
  return r;
}

int cmd_run(const RunOptions& o) {
  const auto bug = dut::parse_bug(o.bug);
  if (!bug) throw UsageError("unknown bug `" + o.bug + "`");
  if (o.count == 0) throw UsageError("--count must be at least 1");
  if (o.cycle_budget != 0 && o.cycle_budget < o.count) throw UsageError("--cycle-budget must be at least --count");
  if (o.wait_states > 15) throw UsageError("--wait-states must be 0..15");

  std::optional<vplan::VPlan> plan;
  if (!o.plan.empty()) {
    plan = vplan::parse_plan(read_file(o.plan));
    if (const auto bad = vplan::unknown_bins(*plan, tb::CoverageModel{}); !bad.empty())
      throw vplan::UnknownCoverageRef(bad.front());
  }

  std::optional<std::vector<nvic::IrqEvent>> irq;
  if (!o.irq_file.empty()) irq = nvic::parse_irq_events(read_file(o.irq_file));

  std::vector<tb::RunRequest> reqs;
  if (o.test == "plan") {
    if (!plan) throw UsageError("--test plan needs --plan");
    reqs = vplan::plan_requests(*plan, *bug, o.cycle_budget,
                                o.wait_states >= 0 ? std::optional<uint8_t>(o.wait_states) : std::nullopt);
  } else if (o.test == "suite") {
    reqs = tb::suite_requests(*bug);
    for (auto& r : reqs) r.cycle_budget = o.cycle_budget;
  } else {
    if (o.test != "random" && tb::find_directed(o.test) == nullptr) throw UsageError("unknown test `" + o.test + "`");
    if (!o.seeds.empty()) {
      const auto [a, b] = parse_range(o.seeds);
      for (uint64_t s = a;; ++s) {
        auto r = base_request(o, *bug);
        r.seed = s;
        reqs.push_back(r);
        if (s == b) break;
      }
    } else {
      reqs.push_back(base_request(o, *bug));
    }
  }
  if (!o.trace.empty() && reqs.size() != 1) throw UsageError("--trace needs a single run");

  std::vector<tb::CampaignResult> results;
  if (reqs.size() == 1 && (!o.trace.empty() || irq)) {
    auto cfg = tb::make_config(reqs.front());
    if (irq) {
      std::erase_if(cfg.stimulus, [](const tb::StimulusItem& it) { return it.kind == tb::ItemKind::kIrq; });
      for (const auto& e : *irq) {
        tb::StimulusItem it;
        it.kind = tb::ItemKind::kIrq;
        it.irq = e;
        cfg.stimulus.push_back(it);
      }
    }
    std::ofstream trace_out;
    if (!o.trace.empty()) {
      trace_out.open(o.trace, std::ios::binary);
      if (!trace_out) throw UsageError("cannot write " + o.trace);
      cfg.trace = &trace_out;
    }
    results.push_back(tb::run_environment(cfg));
  } else {
    if (irq) throw UsageError("--irq-file needs a single run");
    results = tb::run_all(reqs, o.jobs);
  }

  std::optional<vplan::FeatureReport> features;
  if (plan) features = vplan::trace_report(*plan, results);
  const std::string text = report_text(results, features);
  if (o.report.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(o.report, std::ios::binary);
    if (!out) throw UsageError("cannot write " + o.report);
    out << text;
    std::cout << summary_line(summarize(results, features)) << '\n';
  }
  util::Log::info("ran " + std::to_string(results.size()) + " campaign(s)");
  return summarize(results, features).pass ? kPass : kFail;
}

int cmd_check_trace(const std::string& path) {
  const auto samples = bus::read_trace(read_file(path));
  bus::Monitor mon;
  size_t n = 0, transfers = 0;
  for (const auto& s : samples) {
    const auto out = mon.monitor_step(s);
    transfers += out.transfers.size();
    for (const auto& v : out.violations) {
      std::cout << "cycle=" << v.cycle << " port=" << bus::port_letter(v.port) << " rule=" << bus::rule_id(v.rule)
                << ' ' << v.message << '\n';
      ++n;
    }
  }
  std::cout << "samples=" << samples.size() << " transfers=" << transfers << " violations=" << n << '\n';
  return n == 0 ? kPass : kFail;
}

int cmd_list_tests() {
  std::cout << "random  constrained-random program (--seed, --count)\n";
  std::cout << "suite  every directed test\n";
  std::cout << "plan  every stimulus entry of --plan\n";
  for (const auto& t : tb::directed_tests()) {
    std::cout << t.name << "  " << t.description;
    if (t.witness != dut::BugId::kNone) std::cout << " [witness " << dut::bug_name(t.witness) << ']';
    std::cout << '\n';
  }
  return kPass;
}

int cmd_lint_plan(const std::string& path) {
  const auto plan = vplan::parse_plan(read_file(path));
  if (const auto bad = vplan::unknown_bins(plan, tb::CoverageModel{}); !bad.empty())
    throw vplan::UnknownCoverageRef(bad.front());
  for (const auto& s : plan.stimulus)
    if (s.test != "random" && s.test != "suite" && tb::find_directed(s.test) == nullptr)
      throw UsageError("stimulus " + s.id + " names unknown test `" + s.test + "`");
  for (const auto& w : plan.warnings) std::cerr << "m3lv: warning: " << w << '\n';
  std::cout << "features=" << plan.features.size() << " stimulus=" << plan.stimulus.size()
            << " checkers=" << plan.checkers.size() << " coverage=" << plan.coverage.size() << '\n';
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"M3-lite verification framework"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run = app.add_subcommand("run", "run a directed test, random campaign, suite or plan");
  run->add_option("--plan", ro.plan, "verification plan file");
  run->add_option("--test", ro.test, "directed test name, random, suite or plan");
  run->add_option("--seed", ro.seed, "generator seed");
  run->add_option("--count", ro.count, "main-program instructions for random runs");
  run->add_option("--inject-bug", ro.bug, "NONE, ALU_CARRY, FLAG_Z16, FWD_MISS, BR_OFF2 or LSU_SIZE");
  run->add_option("--trace", ro.trace, "write the bus trace CSV here");
  run->add_option("--report", ro.report, "write the report here instead of stdout");
  run->add_option("--cycle-budget", ro.cycle_budget, "cycles before a run is abandoned (0 = automatic)");
  run->add_option("--wait-states", ro.wait_states, "wait states on both ports");
  run->add_option("--seeds", ro.seeds, "seed range a-b for random campaigns");
  run->add_option("--jobs", ro.jobs, "worker threads (0 = all cores)");
  run->add_option("--irq-file", ro.irq_file, "interrupt timeline CSV replacing the generated one");

  std::string trace_path, plan_path;
  auto* check = app.add_subcommand("check-trace", "run the bus protocol monitor over a trace CSV");
  check->add_option("trace", trace_path, "trace file")->required();
  auto* list = app.add_subcommand("list-tests", "list directed tests");
  auto* lint = app.add_subcommand("lint-plan", "parse a plan and check its references");
  lint->add_option("plan", plan_path, "plan file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsage;
  }

  try {
    if (*run) return cmd_run(ro);
    if (*check) return cmd_check_trace(trace_path);
    if (*list) return cmd_list_tests();
    if (*lint) return cmd_lint_plan(plan_path);
  } catch (const std::exception& e) {
    std::cerr << "m3lv: error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
