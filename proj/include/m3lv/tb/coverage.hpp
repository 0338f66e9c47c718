// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Functional coverage.
//
//   opcode         one bin per mnemonic
//   flag           N/Z/C/V x set/clear, sampled only for flags the
//                  instruction writes
//   operand        imm.zero, imm.one, imm.max (field maximum), regs.equal
//                  (two source operands name the same register)
//   bus            {byte, word} x {read, write} x {unwaited, waited} over
//                  DCODE transfers; the core never issues halfword accesses
//   irq            entry, tail_chain, return
//   opcode_x_flag  cross of opcode and flag outcome, restricted to the flags
//                  each mnemonic writes; movs_imm N.set and lsrs_imm N.set
//                  are unreachable and left out
//
// Bins are addressed as `group.bin`, e.g. `opcode_x_flag.adcs.C.set`.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "m3lv/bus/signals.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/retire_event.hpp"
#include "m3lv/tb/checker.hpp"

namespace m3lv::tb {

struct Bin {
  std::string name;
  uint64_t hits = 0;
  friend bool operator==(const Bin&, const Bin&) = default;
};

struct CoverageGroup {
  std::string name;
  std::vector<Bin> bins;

  size_t hit_bins() const {
    size_t n = 0;
    for (const auto& b : bins) n += b.hits > 0 ? 1 : 0;
    return n;
  }
  double percent() const { return bins.empty() ? 0.0 : 100.0 * static_cast<double>(hit_bins()) / bins.size(); }

  friend bool operator==(const CoverageGroup&, const CoverageGroup&) = default;
};

inline constexpr std::string_view kFlagLetters = "NZCV";

class CoverageModel {
 public:
  CoverageModel() {
    auto& op = add_group("opcode");
    for (auto n : isa::kMnemonicNames) op.bins.push_back({std::string(n), 0});
    auto& fl = add_group("flag");
    for (char f : kFlagLetters)
      for (const char* s : {"set", "clear"}) fl.bins.push_back({std::string(1, f) + "." + s, 0});
    auto& od = add_group("operand");
    for (const char* b : {"imm.zero", "imm.one", "imm.max", "regs.equal"}) od.bins.push_back({b, 0});
    auto& bs = add_group("bus");
    for (const char* size : {"byte", "word"})
      for (const char* dir : {"read", "write"})
        for (const char* wait : {"unwaited", "waited"})
          bs.bins.push_back({std::string(size) + "." + dir + "." + wait, 0});
    auto& iq = add_group("irq");
    for (const char* b : {"entry", "tail_chain", "return"}) iq.bins.push_back({b, 0});
    auto& cx = add_group("opcode_x_flag");
    for (size_t i = 0; i < isa::kMnemonicCount; ++i) {
      const auto m = static_cast<isa::Mnemonic>(i);
      const unsigned mask = isa::flags_written(m);
      for (int f = 0; f < 4; ++f) {
        if ((mask & (8u >> f)) == 0) continue;
        for (const char* s : {"set", "clear"}) {
          if (excluded(m, kFlagLetters[f], s)) continue;
          cx.bins.push_back({std::string(isa::name(m)) + "." + kFlagLetters[f] + "." + s, 0});
        }
      }
    }
    reindex();
  }

  CoverageModel(const CoverageModel& o) : groups_(o.groups_) { reindex(); }
  CoverageModel& operator=(const CoverageModel& o) {
    groups_ = o.groups_;
    reindex();
    return *this;
  }

  static bool excluded(isa::Mnemonic m, char flag, std::string_view outcome) {
    return flag == 'N' && outcome == "set" && (m == isa::Mnemonic::kMovsImm || m == isa::Mnemonic::kLsrsImm);
  }

  const std::vector<CoverageGroup>& groups() const { return groups_; }

  const CoverageGroup& group(std::string_view name) const {
    for (const auto& g : groups_)
      if (g.name == name) return g;
    throw std::out_of_range("no coverage group " + std::string(name));
  }

  bool has_bin(std::string_view ref) const { return index_.count(std::string(ref)) != 0; }

  uint64_t hits(std::string_view ref) const {
    auto it = index_.find(std::string(ref));
    if (it == index_.end()) throw std::out_of_range("no coverage bin " + std::string(ref));
    return groups_[it->second.first].bins[it->second.second].hits;
  }

  size_t total_bins() const {
    size_t n = 0;
    for (const auto& g : groups_) n += g.bins.size();
    return n;
  }
  size_t hit_bins() const {
    size_t n = 0;
    for (const auto& g : groups_) n += g.hit_bins();
    return n;
  }
  double percent() const { return 100.0 * static_cast<double>(hit_bins()) / static_cast<double>(total_bins()); }

  void merge(const CoverageModel& o) {
    for (size_t g = 0; g < groups_.size(); ++g)
      for (size_t b = 0; b < groups_[g].bins.size(); ++b) groups_[g].bins[b].hits += o.groups_[g].bins[b].hits;
  }

  void sample(const ArchTransaction& txn) {
    const auto& e = txn.event;
    if (e.exception) {
      switch (e.exception->kind) {
        case isa::ExceptionKind::kEntry: hit("irq.entry"); break;
        case isa::ExceptionKind::kTailChain: hit("irq.tail_chain"); break;
        case isa::ExceptionKind::kReturn: hit("irq.return"); break;
        case isa::ExceptionKind::kFault: break;
      }
    }
    for (const auto& t : txn.transfers) {
      if (t.response != bus::Response::kOkay || t.size == isa::AccessSize::kHalf) continue;
      std::string b = t.size == isa::AccessSize::kByte ? "bus.byte." : "bus.word.";
      b += t.kind == bus::TransferKind::kRead ? "read." : "write.";
      b += t.wait_cycles > 0 ? "waited" : "unwaited";
      hit(b);
    }
    if (!e.inst || (e.exception && e.exception->kind == isa::ExceptionKind::kFault)) return;
    const isa::Instruction& i = *e.inst;
    const std::string m(isa::name(i.mnemonic));
    hit("opcode." + m);

    const unsigned mask = isa::flags_written(i.mnemonic);
    const bool value[4] = {e.flags_after.n, e.flags_after.z, e.flags_after.c, e.flags_after.v};
    for (int f = 0; f < 4; ++f) {
      if ((mask & (8u >> f)) == 0) continue;
      const std::string outcome = std::string(1, kFlagLetters[f]) + (value[f] ? ".set" : ".clear");
      hit("flag." + outcome);
      const std::string cross = "opcode_x_flag." + m + "." + outcome;
      if (has_bin(cross)) hit(cross);
    }

    if (const auto max = imm_max(i.mnemonic)) {
      if (i.imm == 0) hit("operand.imm.zero");
      if (i.imm == 1) hit("operand.imm.one");
      if (i.imm == *max) hit("operand.imm.max");
    }
    const auto src = isa::source_registers(i);
    if (src[0] >= 0 && src[1] >= 0 && src[0] == src[1]) hit("operand.regs.equal");
  }

  static std::optional<uint32_t> imm_max(isa::Mnemonic m) {
    using M = isa::Mnemonic;
    switch (m) {
      case M::kMovsImm: case M::kCmpImm: case M::kAddsImm8: case M::kSubsImm8: case M::kLdrLit: case M::kBCond:
      case M::kBkpt:
        return 0xFF;
      case M::kAddsImm3: case M::kSubsImm3:
        return 7;
      case M::kLslsImm: case M::kLsrsImm: case M::kAsrsImm: case M::kStrImm: case M::kLdrImm: case M::kStrbImm:
      case M::kLdrbImm:
        return 31;
      case M::kB:
        return 0x7FF;
      default:
        return std::nullopt;
    }
  }

  friend bool operator==(const CoverageModel& a, const CoverageModel& b) { return a.groups_ == b.groups_; }

 private:
  CoverageGroup& add_group(std::string name) {
    groups_.push_back({std::move(name), {}});
    return groups_.back();
  }

  void reindex() {
    index_.clear();
    for (size_t g = 0; g < groups_.size(); ++g)
      for (size_t b = 0; b < groups_[g].bins.size(); ++b)
        index_[groups_[g].name + "." + groups_[g].bins[b].name] = {g, b};
  }

  void hit(const std::string& ref) {
    const auto& [g, b] = index_.at(ref);
    ++groups_[g].bins[b].hits;
  }

  std::vector<CoverageGroup> groups_;
  std::map<std::string, std::pair<size_t, size_t>> index_;
};

}  // namespace m3lv::tb
