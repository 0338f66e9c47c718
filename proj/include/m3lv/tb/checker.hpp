// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "m3lv/bus/signals.hpp"
#include "m3lv/isa/retire_event.hpp"

namespace m3lv::tb {

// Checker families a plan can attach to features.
enum class Family : uint8_t { kFetch, kDecode, kResult, kMemory, kException, kProtocol };

inline constexpr std::array<std::string_view, 6> kFamilyNames = {"fetch",  "decode",    "result",
                                                                 "memory", "exception", "protocol"};

inline std::string_view family_name(Family f) { return kFamilyNames[static_cast<size_t>(f)]; }

inline std::optional<Family> parse_family(std::string_view s) {
  for (size_t i = 0; i < kFamilyNames.size(); ++i)
    if (kFamilyNames[i] == s) return static_cast<Family>(i);
  return std::nullopt;
}

// A retirement fused with the bus traffic that produced it.
struct ArchTransaction {
  isa::RetireEvent event;
  std::vector<bus::Transfer> transfers;  // DCODE transfers in the retirement's window
  std::optional<isa::MemEffect> observed;
};

class InconsistentEvent : public std::runtime_error {
 public:
  InconsistentEvent(uint64_t s, const std::string& msg)
      : std::runtime_error("seq " + std::to_string(s) + ": " + msg), seq(s) {}
  uint64_t seq;
};

namespace detail {

inline std::string describe(const bus::Transfer& t) {
  return std::string(t.kind == bus::TransferKind::kRead ? "read " : "write ") + isa::to_string(t.size) + " [" +
         util::hex32(t.addr) + "]=" + util::hex32(t.data);
}

}  // namespace detail

// `transfers` are the DCODE transfers completed since the previous
// retirement. An ERROR-terminated transfer is only legal on a fault event.
inline ArchTransaction check_unpack(const isa::RetireEvent& retire, std::vector<bus::Transfer> transfers) {
  ArchTransaction txn{retire, std::move(transfers), std::nullopt};
  const auto& ts = txn.transfers;
  const auto fail = [&](const std::string& m) { throw InconsistentEvent(retire.seq, m); };
  const auto& exc = retire.exception;

  if (exc && exc->kind == isa::ExceptionKind::kFault) return txn;
  for (const auto& t : ts)
    if (t.response != bus::Response::kOkay) fail("ERROR response on " + detail::describe(t) + " without a fault");

  if (exc && (exc->kind == isa::ExceptionKind::kEntry || exc->kind == isa::ExceptionKind::kReturn)) {
    const bool entry = exc->kind == isa::ExceptionKind::kEntry;
    if (ts.size() != 8) fail("expected 8 stack transfers, saw " + std::to_string(ts.size()));
    // Entry stacks below the new SP; return unstacks below the restored one.
    const uint32_t frame = entry ? exc->sp : exc->sp - 32;
    for (size_t k = 0; k < ts.size(); ++k) {
      const auto& t = ts[k];
      const bool ok = t.kind == (entry ? bus::TransferKind::kWrite : bus::TransferKind::kRead) &&
                      t.size == isa::AccessSize::kWord && t.addr == frame + 4 * k;
      if (!ok) fail("stack transfer " + std::to_string(k) + " is " + detail::describe(t));
    }
    return txn;
  }
  if (exc && exc->kind == isa::ExceptionKind::kTailChain) {
    if (!ts.empty()) fail("tail-chain with " + std::to_string(ts.size()) + " data transfers");
    return txn;
  }

  if (!retire.mem) {
    if (!ts.empty()) fail("unexpected " + detail::describe(ts.front()));
    return txn;
  }
  if (ts.size() != 1)
    fail("memory effect " + isa::to_string(retire.mem) + " with " + std::to_string(ts.size()) + " transfers");
  const auto& t = ts.front();
  txn.observed = isa::MemEffect{t.kind == bus::TransferKind::kRead ? isa::MemKind::kRead : isa::MemKind::kWrite, t.addr,
                                t.size, t.data};
  if (*txn.observed != *retire.mem)
    fail("retired " + isa::to_string(retire.mem) + " but bus carried " + detail::describe(t));
  return txn;
}

struct Mismatch {
  uint64_t seq = 0;
  std::string field;  // pc, inst, wb, flags, mem, exception, underflow, unpack
  std::string expected;
  std::string actual;
  Family family = Family::kResult;
  std::string mnemonic;  // of the expected event, "exception" for entries

  friend bool operator==(const Mismatch&, const Mismatch&) = default;
};

class ExpectedUnderflow : public std::runtime_error {
 public:
  explicit ExpectedUnderflow(uint64_t seq)
      : std::runtime_error("retirement " + std::to_string(seq) + " has no expected event") {}
};

inline std::string scope_of(const isa::RetireEvent& e) {
  if (e.inst) return std::string(isa::name(e.inst->mnemonic));
  return "exception";
}

// In-order lockstep comparison against events produced by the reference
// model.
class Scoreboard {
 public:
  void expect(isa::RetireEvent e) { expected_.push_back(std::move(e)); }
  size_t pending() const { return expected_.size(); }
  const std::vector<Mismatch>& mismatches() const { return mismatches_; }

  std::optional<Mismatch> compare(const ArchTransaction& actual) {
    if (expected_.empty()) throw ExpectedUnderflow(actual.event.seq);
    const isa::RetireEvent exp = std::move(expected_.front());
    expected_.pop_front();
    const isa::RetireEvent& act = actual.event;
    std::optional<Mismatch> m;
    const auto diff = [&](const char* field, Family fam, const std::string& e, const std::string& a) {
      if (!m) m = Mismatch{act.seq, field, e, a, fam, scope_of(exp)};
    };
    if (exp.pc != act.pc) diff("pc", Family::kFetch, util::hex32(exp.pc), util::hex32(act.pc));
    if (exp.inst != act.inst) diff("inst", Family::kDecode, isa::to_string(exp.inst), isa::to_string(act.inst));
    if (exp.exception != act.exception)
      diff("exception", Family::kException, isa::to_string(exp.exception), isa::to_string(act.exception));
    if (exp.wb != act.wb) diff("wb", Family::kResult, isa::to_string(exp.wb), isa::to_string(act.wb));
    if (exp.flags_after != act.flags_after)
      diff("flags", Family::kResult, isa::to_string(exp.flags_after), isa::to_string(act.flags_after));
    if (exp.mem != act.mem) diff("mem", Family::kMemory, isa::to_string(exp.mem), isa::to_string(act.mem));
    if (m) mismatches_.push_back(*m);
    return m;
  }

 private:
  std::deque<isa::RetireEvent> expected_;
  std::vector<Mismatch> mismatches_;
};

}  // namespace m3lv::tb
