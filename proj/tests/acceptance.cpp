// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "m3lv/bus/trace.hpp"
#include "m3lv/isa/alu.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/report.hpp"
#include "m3lv/tb/campaign.hpp"
#include "m3lv/util.hpp"
#include "m3lv/vplan/plan.hpp"
#include "m3lv/vplan/requests.hpp"
#include "nvic_walk.hpp"
#include "oracles.hpp"

namespace {

using namespace m3lv;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string traced(const std::string& test, uint64_t seed = 0, uint32_t count = 1000) {
  auto cfg = tb::make_config(tb::RunRequest{.test = test, .seed = seed, .count = count});
  std::ostringstream out;
  cfg.trace = &out;
  tb::run_environment(cfg);
  return out.str();
}

// ADDS r1, r2, r3 fetched as a single word read with an OKAY response, and
// the fetch port parks in IDLE once the core halts.
Verdict add_fetch_signals() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto samples = bus::read_trace(traced("add_directed"));
  const uint32_t add_pc = tb::kCodeStart + 4;
  const uint16_t add_hw = isa::encode(isa::ops::adds_reg(1, 2, 3));
  std::vector<bus::BusSample> icode;
  for (const auto& s : samples)
    if (s.port == bus::Port::kIcode) icode.push_back(s);
  bool found = false;
  size_t idle = 0;
  for (size_t k = 0; k < icode.size(); ++k) {
    const auto& s = icode[k];
    if (s.htrans == bus::htrans::kIdle) ++idle;
    if (found || s.htrans != bus::htrans::kNonseq || s.haddr != (add_pc & ~3u)) continue;
    found = true;
    if (s.hsize != bus::hsize::kWord) v.fail("HSIZE " + std::to_string(s.hsize));
    if (s.hwrite != 0) v.fail("HWRITE set on a fetch");
    if (s.hburst != bus::hburst::kSingle) v.fail("HBURST " + std::to_string(s.hburst));
    size_t d = k + 1;
    while (d < icode.size() && icode[d].hready == 0) ++d;
    if (d == icode.size()) {
      v.fail("fetch never completed");
      continue;
    }
    if (icode[d].hresp != bus::hresp::kOkay) v.fail("HRESP ERROR on the fetch");
    const uint32_t lane = (add_pc & 2) ? icode[d].hrdata >> 16 : icode[d].hrdata & 0xFFFF;
    if (lane != add_hw) v.fail("fetched halfword " + util::hex32(lane));
  }
  if (!found) v.fail("no fetch of " + util::hex32(add_pc));
  if (idle == 0) v.fail("no IDLE cycles on the fetch port");
  const double s = seconds_since(t0);
  if (s >= 1.0) v.fail("took " + std::to_string(s) + " s");
  if (v.pass) v.detail = "word read at " + util::hex32(add_pc & ~3u) + ", " + std::to_string(idle) + " IDLE cycles";
  return v;
}

// 100 seeds x 10k instructions, wait states sampled per seed.
Verdict random_regression() {
  Verdict v;
  const auto t0 = Clock::now();
  std::vector<tb::RunRequest> reqs;
  for (uint64_t s = 0; s < 100; ++s) reqs.push_back(tb::RunRequest{.seed = s, .count = 10000});
  const auto runs = tb::run_all(reqs, jobs());
  size_t mism = 0, viol = 0, budget = 0;
  std::set<std::pair<int, int>> waits;
  for (const auto& r : runs) {
    mism += r.mismatches.size();
    viol += r.violation_count();
    budget += r.budget_exceeded ? 1 : 0;
    waits.insert({r.code_wait, r.sram_wait});
  }
  const double s = seconds_since(t0);
  if (mism != 0 || viol != 0 || budget != 0)
    v.fail(std::to_string(mism) + " mismatches, " + std::to_string(viol) + " violations, " + std::to_string(budget) +
           " budget overruns");
  if (s >= 60.0) v.fail("took " + std::to_string(s) + " s");
  if (v.pass)
    v.detail = "0 mismatches, 0 violations, " + std::to_string(waits.size()) + " wait-state pairs, " +
               std::to_string(s).substr(0, 5) + " s";
  return v;
}

// Each injected bug is caught on at least 9 of 10 random seeds and by its
// witness program.
Verdict bug_detection() {
  Verdict v;
  std::vector<tb::RunRequest> reqs;
  for (auto bug : dut::kAllBugs)
    for (uint64_t s = 0; s < 10; ++s) reqs.push_back(tb::RunRequest{.seed = s, .count = 10000, .bug = bug});
  const auto runs = tb::run_all(reqs, jobs());
  std::string summary;
  for (size_t b = 0; b < dut::kAllBugs.size(); ++b) {
    const auto bug = dut::kAllBugs[b];
    int caught = 0;
    for (size_t s = 0; s < 10; ++s) caught += runs[b * 10 + s].mismatches.empty() ? 0 : 1;
    const auto w = tb::run_request(tb::RunRequest{.test = tb::witness_for(bug).name, .bug = bug});
    const bool witnessed = !w.mismatches.empty();
    summary += std::string(summary.empty() ? "" : ", ") + std::string(dut::bug_name(bug)) + " " +
               std::to_string(caught) + "/10" + (witnessed ? "+w" : "");
    if (caught < 9) v.fail(std::string(dut::bug_name(bug)) + " caught on " + std::to_string(caught) + "/10 seeds");
    if (!witnessed) v.fail(std::string(dut::bug_name(bug)) + " missed by its witness");
  }
  if (v.pass) v.detail = summary;
  return v;
}

// Every halfword decodes or is rejected; every encodable instruction
// round-trips to a unique encoding.
Verdict decode_totality() {
  Verdict v;
  const auto t0 = Clock::now();
  size_t defined = 0;
  for (uint32_t hw = 0; hw < 0x10000; ++hw) {
    const auto h = static_cast<uint16_t>(hw);
    try {
      const auto i = isa::decode(h);
      ++defined;
      if (isa::decode(isa::encode(i)) != i) v.fail("re-decode differs at " + util::hex32(hw));
    } catch (const isa::UndefinedError&) {
      if (isa::try_decode(h)) v.fail("try_decode disagrees at " + util::hex32(hw));
    }
  }
  const auto all = oracle::all_instructions();
  std::set<uint16_t> codes;
  for (const auto& i : all) {
    const uint16_t hw = isa::encode(i);
    if (isa::decode(hw) != i) v.fail("round trip fails for " + isa::to_string(i));
    codes.insert(hw);
  }
  if (codes.size() != all.size()) v.fail("encodings are not unique");
  const double s = seconds_since(t0);
  if (s >= 10.0) v.fail("took " + std::to_string(s) + " s");
  if (v.pass)
    v.detail = std::to_string(defined) + " defined halfwords, " + std::to_string(all.size()) + " instructions round-trip";
  return v;
}

// ALU and shifter against bit-level oracles.
Verdict alu_shifter() {
  Verdict v;
  constexpr uint32_t kCorners[] = {0u, 1u, 0x7FFFFFFFu, 0x80000000u, 0xFFFFFFFFu};
  const isa::ShiftKind kinds[] = {isa::ShiftKind::kLsl, isa::ShiftKind::kLsr, isa::ShiftKind::kAsr, isa::ShiftKind::kRor};
  const oracle::Shift okinds[] = {oracle::Shift::kLsl, oracle::Shift::kLsr, oracle::Shift::kAsr, oracle::Shift::kRor};
  size_t checked = 0;
  const auto arith = [&](uint32_t a, uint32_t b, bool cin) {
    const auto r = isa::alu_eval(isa::AluOp::kAdd, a, b, cin);
    const auto w = oracle::ripple_add(a, b, cin);
    if (r.value != w.value || r.n != w.n || r.z != w.z || r.c != w.c || r.v != w.v)
      v.fail("add " + util::hex32(a) + "+" + util::hex32(b));
    const auto rs = isa::alu_eval(isa::AluOp::kSub, a, b, cin);
    const auto ws = oracle::ripple_sub(a, b, cin);
    if (rs.value != ws.value || rs.n != ws.n || rs.z != ws.z || rs.c != ws.c || rs.v != ws.v)
      v.fail("sub " + util::hex32(a) + "-" + util::hex32(b));
    if (isa::alu_eval(isa::AluOp::kMul, a, b, cin).value != oracle::shift_add_mul(a, b))
      v.fail("mul " + util::hex32(a) + "*" + util::hex32(b));
    ++checked;
  };
  const auto shift = [&](int k, uint32_t a, uint32_t amount, bool cin) {
    const auto r = isa::shifter_eval(kinds[k], a, amount, cin);
    const auto [value, carry] = oracle::step_shift(okinds[k], a, amount & 0xFF, cin);
    if (r.value != value || r.carry_out != carry)
      v.fail("shift kind " + std::to_string(k) + " " + util::hex32(a) + " by " + std::to_string(amount));
    ++checked;
  };
  for (uint32_t a : kCorners)
    for (uint32_t b : kCorners)
      for (bool c : {false, true}) arith(a, b, c);
  for (int k = 0; k < 4; ++k)
    for (uint32_t a : kCorners)
      for (uint32_t amount = 0; amount < 256; ++amount)
        for (bool c : {false, true}) shift(k, a, amount, c);
  util::SplitMix64 rng(0xA1);
  for (int n = 0; n < 1000000 && v.pass; ++n) {
    arith(rng.next_u32(), rng.next_u32(), rng.chance(0.5));
    const uint32_t amount = rng.chance(0.5) ? static_cast<uint32_t>(rng.below(40)) : rng.next_u32();
    shift(static_cast<int>(rng.below(4)), rng.next_u32(), amount, rng.chance(0.5));
  }
  if (v.pass) v.detail = std::to_string(checked) + " vectors";
  return v;
}

struct Latency {
  uint64_t entry = 0;
  uint64_t tail = 0;
};

// K_entry: pend to first handler retirement (irq_entry). K_tail: BX entering
// execute to first retirement of the chained handler (irq_tail_chain). BX
// enters execute the cycle after the preceding retirement.
std::optional<Latency> measure_latency() {
  const auto run = [](const char* test) {
    auto cfg = tb::make_config(tb::RunRequest{.test = test});
    cfg.record = true;
    return tb::run_environment(cfg);
  };
  const auto first_after = [](const tb::CampaignResult& r, isa::ExceptionKind kind) -> std::optional<size_t> {
    for (size_t k = 0; k < r.retirements.size(); ++k) {
      const auto& e = r.retirements[k].event;
      if (e.exception && e.exception->kind == kind) return k;
    }
    return std::nullopt;
  };
  Latency l;
  const auto a = run("irq_entry");
  const auto ea = first_after(a, isa::ExceptionKind::kEntry);
  if (!a.passed() || !ea || a.irq_applied.empty() || *ea + 1 >= a.retirements.size()) return std::nullopt;
  l.entry = a.retirements[*ea + 1].cycle - a.irq_applied.back();

  const auto b = run("irq_tail_chain");
  const auto eb = first_after(b, isa::ExceptionKind::kTailChain);
  if (!b.passed() || !eb || *eb == 0 || *eb + 1 >= b.retirements.size()) return std::nullopt;
  const uint64_t bx_exec = b.retirements[*eb - 1].cycle + 1;
  l.tail = b.retirements[*eb + 1].cycle - bx_exec;
  return l;
}

Verdict nvic_checks() {
  Verdict v;
  for (uint64_t seed = 0; seed < 100000 && v.pass; ++seed)
    if (const auto err = walk::nvic_sequence(seed, 64)) v.fail("sequence " + std::to_string(seed) + ": " + *err);

  util::SplitMix64 rng(0xB2);
  for (int k = 0; k < 100000 && v.pass; ++k) {
    const uint32_t n = 1 + static_cast<uint32_t>(rng.below(32));
    nvic::Nvic nv(n);
    std::vector<bool> pend(n), en(n);
    std::vector<uint8_t> prio(n);
    for (uint32_t l = 0; l < n; ++l) {
      pend[l] = rng.chance(0.4);
      en[l] = rng.chance(0.6);
      prio[l] = static_cast<uint8_t>(rng.chance(0.5) ? rng.below(4) * 64 : rng.below(256));
      if (pend[l]) nv.set_pending(l);
      nv.set_enabled(l, en[l]);
      nv.set_priority(l, prio[l]);
    }
    const auto want = oracle::scan_pending(pend, en, prio);
    const auto got = nv.highest_pending();
    if (got.has_value() != want.has_value() || (got && (got->line != want->first || got->priority != want->second)))
      v.fail("highest_pending disagrees with the scan on state " + std::to_string(k));
  }

  const auto l1 = measure_latency(), l2 = measure_latency();
  if (!l1 || !l2) {
    v.fail("latency programs did not run cleanly");
  } else {
    if (l1->entry != l2->entry || l1->tail != l2->tail) v.fail("latency differs between reruns");
    if (!(l1->tail < l1->entry))
      v.fail("K_tail " + std::to_string(l1->tail) + " not below K_entry " + std::to_string(l1->entry));
    if (v.pass)
      v.detail = "1e5 sequences, 1e5 states, K_entry=" + std::to_string(l1->entry) +
                 " K_tail=" + std::to_string(l1->tail);
  }
  return v;
}

// Suite plus the plan's 10k random run: opcode coverage complete, cross
// coverage at least 95%, every feature of the full plan passing.
Verdict closure() {
  Verdict v;
  const auto plan = vplan::parse_plan(read_file(std::string(M3LV_PLAN_DIR) + "/m3lite.vplan"));
  const auto runs = tb::run_all(vplan::plan_requests(plan), jobs());
  tb::CoverageModel cov;
  for (const auto& r : runs)
    if (r.test != "random" || r.seed == 1) cov.merge(r.coverage);
  const auto& op = cov.group("opcode");
  const auto& cx = cov.group("opcode_x_flag");
  if (op.hit_bins() != op.bins.size())
    v.fail("opcode " + std::to_string(op.hit_bins()) + "/" + std::to_string(op.bins.size()));
  if (cx.percent() < 95.0) v.fail("opcode_x_flag " + format_percent(cx.percent()) + "%");
  const auto rep = vplan::trace_report(plan, runs);
  for (const auto& f : rep.features)
    if (f.status != vplan::Status::kPass)
      v.fail(f.id + " " + std::string(vplan::status_name(f.status)) + (f.detail.empty() ? "" : ": " + f.detail));
  if (v.pass)
    v.detail = "opcode " + format_percent(op.percent()) + "%, opcode_x_flag " + format_percent(cx.percent()) + "%, " +
               std::to_string(rep.features.size()) + " features PASS";
  return v;
}

// Reports and traces hash identically across repeated runs, serial or
// threaded.
Verdict reproducibility() {
  Verdict v;
  const auto plan = vplan::parse_plan(read_file(std::string(M3LV_PLAN_DIR) + "/m3lite.vplan"));
  const auto report_hash = [&](unsigned j) {
    const auto runs = tb::run_all(vplan::plan_requests(plan), j);
    return std::hash<std::string>{}(report_text(runs, vplan::trace_report(plan, runs)));
  };
  const size_t r1 = report_hash(jobs()), r2 = report_hash(jobs()), r3 = report_hash(1);
  if (r1 != r2 || r1 != r3) v.fail("report hash differs between runs");
  for (const char* t : {"irq_nested", "lsu_wait", "random"}) {
    const auto a = std::hash<std::string>{}(traced(t, 3, 5000));
    const auto b = std::hash<std::string>{}(traced(t, 3, 5000));
    if (a != b) v.fail(std::string("trace hash differs for ") + t);
  }
  if (v.pass) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016zx", r1);
    v.detail = std::string("report hash ") + buf + " stable over 3 runs, 3 traces stable";
  }
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"ADD fetch signals", add_fetch_signals},
      {"random regression, 100 seeds x 10k", random_regression},
      {"injected bug detection", bug_detection},
      {"decode totality and round trip", decode_totality},
      {"ALU and shifter against oracles", alu_shifter},
      {"interrupt controller", nvic_checks},
      {"coverage and plan closure", closure},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    char secs[16];
    std::snprintf(secs, sizeof secs, "%.2f", seconds_since(t0));
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << n << "  " << name << "  (" << v.detail << ") [" << secs
              << " s]\n"
              << std::flush;
    failed += v.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
