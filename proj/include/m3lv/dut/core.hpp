// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Cycle-stepped 3-stage core: fetch (word reads on ICODE into a 3-halfword
// prefetch buffer), decode, execute (ALU, shifter, branch resolution, LSU on
// DCODE, exception sequencing).
//
// Timing with zero wait states:
//   ALU / branch / nop     1 execute cycle
//   load / store          3 execute cycles: address, address phase, data phase
//   taken branch          flushes decode and the buffer; 3 bubbles
//   exception entry       8 pipelined stack writes on DCODE with the vector
//                         read on ICODE alongside; retires as its own event
//   exception return      BX waits one cycle for the controller's verdict,
//                         then 8 stack reads (return) or a vector read
//                         (tail-chain); the BX retires when the sequence ends
//
// Each clock() consumes the replies for the current cycle and produces the
// requests for the next one.

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "m3lv/bus/signals.hpp"
#include "m3lv/dut/bugs.hpp"
#include "m3lv/dut/bus_master.hpp"
#include "m3lv/dut/datapath.hpp"
#include "m3lv/exception.hpp"
#include "m3lv/isa/instruction.hpp"
#include "m3lv/isa/memory.hpp"
#include "m3lv/isa/reference.hpp"
#include "m3lv/isa/retire_event.hpp"

namespace m3lv::dut {

inline constexpr size_t kPrefetchDepth = 3;

struct ClockOutput {
  bus::BusRequest icode;
  bus::BusRequest dcode;
  std::optional<isa::RetireEvent> retired;
  // Controller directive the core took this cycle.
  std::optional<NvicDirective> accepted;
};

struct FetchRecord {
  uint32_t addr = 0;
  uint32_t data = 0;
};

struct DecodeRecord {
  uint32_t pc = 0;
  uint16_t halfword = 0;
};

class Core {
 public:
  explicit Core(const isa::MemoryImage& mem, uint32_t vtor = 0) {
    arch_.vtor = vtor;
    arch_.r[13] = mem.read32(vtor);
    arch_.r[15] = mem.read32(vtor + 4) & ~1u;
    fetch_pc_ = arch_.r[15];
    try_issue_fetch();
  }

  void inject_bug(BugId b) {
    if (cycle_ != 0) throw std::logic_error("inject_bug after the first clock");
    bug_ = b;
  }
  BugId bug() const { return bug_; }

  bus::BusRequest icode_request() const { return icode_.request(); }
  bus::BusRequest dcode_request() const { return dcode_.request(); }

  bool exception_return_pending() const {
    return exec_ && exec_->phase == Phase::kReturnWait;
  }
  bool halted() const { return halted_; }
  bool quiescent() const { return halted_ && icode_.idle() && dcode_.idle(); }
  const isa::ArchState& arch() const { return arch_; }
  uint64_t cycle() const { return cycle_; }

  const std::vector<FetchRecord>& icode_log() const { return icode_log_; }
  const std::vector<DecodeRecord>& decode_log() const { return decode_log_; }

  ClockOutput clock(const bus::BusReply& icode_rsp, const bus::BusReply& dcode_rsp, const NvicDirective& directive) {
    ++cycle_;
    ClockOutput out;
    ic_ = icode_.tick(icode_rsp);
    dc_ = dcode_.tick(dcode_rsp);
    if (ic_) icode_log_.push_back({ic_->op.addr, ic_->rdata});

    std::optional<PortCompletion> fetched;
    if (ic_ && ic_->op.use == PortUse::kFetch) {
      if (ic_->op.epoch == epoch_) {
        inflight_ -= yield_of(ic_->op.aux);
        fetched = ic_;
      }
      ic_.reset();
    }

    const std::array<uint32_t, 16> before = arch_.r;
    if (exec_) step_execute(directive, out);

    if (!exec_ && !halted_ && directive.action == DirectiveAction::kEnter) begin_entry(directive, out);

    if (!exec_ && decode_ && !halted_) {
      const auto& src = bug_ == BugId::kFwdMiss ? before : arch_.r;
      exec_ = ExecEntry{};
      exec_->pc = decode_->pc;
      exec_->inst = decode_->inst;
      exec_->fetch_error = decode_->fetch_error;
      exec_->ops = src;
      decode_.reset();
    }

    if (fetched && fetched->op.epoch == epoch_) {
      const uint32_t base = fetched->op.addr;
      for (uint32_t a = fetched->op.aux; a < base + 4; a += 2)
        buffer_.push_back({a, static_cast<uint16_t>(fetched->rdata >> (8 * (a & 2))), fetched->error});
    }

    if (!decode_ && !buffer_.empty() && !halted_) {
      const Slot s = buffer_.front();
      buffer_.pop_front();
      decode_ = DecodeEntry{s.pc, s.fetch_error ? std::nullopt : isa::try_decode(s.hw), s.fetch_error};
      decode_log_.push_back({s.pc, s.hw});
    }

    if (fetch_enabled_ && !halted_) try_issue_fetch();
    out.icode = icode_.request();
    out.dcode = dcode_.request();
    return out;
  }

 private:
  enum class Phase : uint8_t { kStart, kMemory, kReturnWait, kSequence };
  enum class SeqKind : uint8_t { kEntry, kReturn, kTailChain };

  struct Slot {
    uint32_t pc;
    uint16_t hw;
    bool fetch_error;
  };

  struct DecodeEntry {
    uint32_t pc;
    std::optional<isa::Instruction> inst;
    bool fetch_error;
  };

  struct Sequence {
    SeqKind kind = SeqKind::kEntry;
    uint32_t exception = 0;  // entered or chained-to
    uint32_t frame = 0;
    uint32_t exc_return = 0;
    std::array<uint32_t, 8> words{};
    uint32_t issued = 0;
    uint32_t done = 0;
    bool need_vector = false;
    bool vector_issued = false;
    bool vector_done = false;
    uint32_t vector = 0;
    bool error = false;
  };

  struct ExecEntry {
    uint32_t pc = 0;
    std::optional<isa::Instruction> inst;  // empty for exception entry and undefined encodings
    bool fetch_error = false;
    bool is_entry = false;
    std::array<uint32_t, 16> ops{};
    Phase phase = Phase::kStart;
    uint32_t addr = 0;
    isa::AccessSize size = isa::AccessSize::kWord;
    bool load = false;
    uint32_t store_value = 0;
    Sequence seq;
  };

  static uint32_t yield_of(uint32_t first) { return (first & 2) != 0 ? 1 : 2; }

  void try_issue_fetch() {
    if (!icode_.can_issue()) return;
    const uint32_t y = yield_of(fetch_pc_);
    if (buffer_.size() + inflight_ + y > kPrefetchDepth) return;
    PortOp op;
    op.addr = fetch_pc_ & ~3u;
    op.use = PortUse::kFetch;
    op.epoch = epoch_;
    op.aux = fetch_pc_;
    icode_.issue(op);
    inflight_ += y;
    fetch_pc_ = op.addr + 4;
  }

  void flush() {
    ++epoch_;
    buffer_.clear();
    decode_.reset();
    inflight_ = 0;
  }

  void redirect(uint32_t target) {
    flush();
    fetch_pc_ = target;
    fetch_enabled_ = true;
  }

  uint32_t operand(const ExecEntry& e, unsigned r) const { return r == 15 ? e.pc + 4 : e.ops[r]; }

  isa::RetireEvent make_event(const ExecEntry& e) {
    isa::RetireEvent ev;
    ev.pc = e.pc;
    ev.inst = e.inst;
    return ev;
  }

  void retire(isa::RetireEvent ev, ClockOutput& out) {
    ev.seq = seq_++;
    ev.flags_after = arch_.apsr;
    out.retired = ev;
    exec_.reset();
  }

  void fault(ClockOutput& out, bool with_inst = true) {
    auto ev = make_event(*exec_);
    if (!with_inst) ev.inst.reset();
    ev.exception = isa::ExceptionEffect{isa::ExceptionKind::kFault, kHardFault, arch_.r[13], arch_.r[14]};
    halted_ = true;
    fetch_enabled_ = false;
    flush();
    retire(ev, out);
  }

  void write_reg(isa::RetireEvent& ev, uint8_t r, uint32_t v) {
    arch_.r[r] = v;
    ev.wb = isa::Writeback{r, v};
  }

  void step_execute(const NvicDirective& directive, ClockOutput& out) {
    ExecEntry& e = *exec_;
    switch (e.phase) {
      case Phase::kStart:
        if (e.is_entry) return step_sequence(out);
        if (e.fetch_error || !e.inst) return fault(out, false);
        return start_instruction(out);
      case Phase::kMemory:
        return finish_memory(out);
      case Phase::kReturnWait:
        if (directive.action == DirectiveAction::kReturn || directive.action == DirectiveAction::kTailChain) {
          out.accepted = directive;
          e.seq = Sequence{};
          e.seq.exc_return = operand(e, e.inst->rm);
          if (directive.action == DirectiveAction::kReturn) {
            e.seq.kind = SeqKind::kReturn;
            e.seq.frame = arch_.r[13];
            e.seq.error = !isa::aligned(e.seq.frame, isa::AccessSize::kWord);
          } else {
            e.seq.kind = SeqKind::kTailChain;
            e.seq.exception = directive.exception;
            e.seq.need_vector = true;
          }
          e.phase = Phase::kSequence;
          fetch_enabled_ = false;
          flush();
          issue_sequence();
        }
        return;
      case Phase::kSequence:
        return step_sequence(out);
    }
  }

  void start_instruction(ClockOutput& out) {
    using M = isa::Mnemonic;
    ExecEntry& e = *exec_;
    const isa::Instruction& i = *e.inst;
    const auto rd = [&](unsigned r) { return operand(e, r); };
    auto ev = make_event(e);
    uint32_t next = e.pc + 2;

    if (is_alu(i.mnemonic)) {
      const auto o = execute_alu(i, rd, arch_.apsr, bug_);
      if (o.rd) write_reg(ev, *o.rd, o.value);
      arch_.apsr = o.flags;
      arch_.r[15] = next;
      return retire(ev, out);
    }

    switch (i.mnemonic) {
      case M::kB:
      case M::kBCond:
        if (i.mnemonic == M::kB || cond_holds(i.cond, arch_.apsr)) {
          next = e.pc + 4 + static_cast<uint32_t>(isa::branch_offset(i));
          if (bug_ == BugId::kBrOff2) next += 2;
          ev.wb = isa::Writeback{15, next};
          redirect(next);
        }
        arch_.r[15] = next;
        return retire(ev, out);
      case M::kBx: {
        const uint32_t target = rd(i.rm);
        if (arch_.ipsr != 0 && is_exc_return(target)) {
          if (target != kExcReturnHandler && target != kExcReturnThread) return fault(out);
          e.phase = Phase::kReturnWait;
          return;
        }
        if ((target & 1) == 0) return fault(out);
        next = target & ~1u;
        ev.wb = isa::Writeback{15, next};
        redirect(next);
        arch_.r[15] = next;
        return retire(ev, out);
      }
      case M::kNop:
        arch_.r[15] = next;
        return retire(ev, out);
      case M::kBkpt:
        arch_.r[15] = next;
        halted_ = true;
        fetch_enabled_ = false;
        flush();
        return retire(ev, out);
      default:
        break;
    }

    // Load/store: effective address this cycle, bus address phase next cycle.
    switch (i.mnemonic) {
      case M::kStrImm: e.addr = rd(i.rn) + i.imm * 4; e.size = isa::AccessSize::kWord; e.load = false; break;
      case M::kLdrImm: e.addr = rd(i.rn) + i.imm * 4; e.size = isa::AccessSize::kWord; e.load = true; break;
      case M::kStrbImm: e.addr = rd(i.rn) + i.imm; e.size = isa::AccessSize::kByte; e.load = false; break;
      case M::kLdrbImm: e.addr = rd(i.rn) + i.imm; e.size = isa::AccessSize::kByte; e.load = true; break;
      case M::kLdrLit: e.addr = ((e.pc + 4) & ~3u) + i.imm * 4; e.size = isa::AccessSize::kWord; e.load = true; break;
      default: throw std::logic_error("unhandled mnemonic in execute");
    }
    if (!isa::aligned(e.addr, e.size)) return fault(out);
    e.store_value = e.load ? 0 : rd(i.rd);
    PortOp op;
    op.use = PortUse::kData;
    op.write = !e.load;
    if (!e.load && e.size == isa::AccessSize::kByte && bug_ == BugId::kLsuSize) {
      op.addr = e.addr & ~3u;
      op.size = isa::AccessSize::kWord;
      op.wdata = e.store_value;
    } else {
      op.addr = e.addr;
      op.size = e.size;
      op.wdata = e.load ? 0 : bus::lane_place(e.store_value, e.addr, e.size);
    }
    dcode_.issue(op);
    e.phase = Phase::kMemory;
  }

  void finish_memory(ClockOutput& out) {
    if (!dc_ || dc_->op.use != PortUse::kData) return;
    ExecEntry& e = *exec_;
    if (dc_->error) return fault(out);
    auto ev = make_event(e);
    if (e.load) {
      const uint32_t v = bus::lane_extract(dc_->rdata, e.addr, e.size);
      write_reg(ev, e.inst->rd, v);
      ev.mem = isa::MemEffect{isa::MemKind::kRead, e.addr, e.size, v};
    } else {
      const uint32_t v = e.size == isa::AccessSize::kByte ? e.store_value & 0xFF : e.store_value;
      ev.mem = isa::MemEffect{isa::MemKind::kWrite, e.addr, e.size, v};
    }
    arch_.r[15] = e.pc + 2;
    retire(ev, out);
  }

  void begin_entry(const NvicDirective& d, ClockOutput& out) {
    out.accepted = d;
    exec_ = ExecEntry{};
    exec_->is_entry = true;
    exec_->pc = arch_.r[15];
    Sequence& s = exec_->seq;
    s.kind = SeqKind::kEntry;
    s.exception = d.exception;
    s.frame = arch_.r[13] - 32;
    s.need_vector = true;
    s.words = {arch_.r[0], arch_.r[1], arch_.r[2], arch_.r[3], arch_.r[12], arch_.r[14], arch_.r[15],
               isa::pack_xpsr(arch_.apsr, arch_.ipsr)};
    s.error = !isa::aligned(s.frame, isa::AccessSize::kWord);
    fetch_enabled_ = false;
    flush();
    issue_sequence();
  }

  uint32_t frame_transfers(const Sequence& s) const { return s.kind == SeqKind::kTailChain ? 0 : 8; }

  void issue_sequence() {
    Sequence& s = exec_->seq;
    if (s.error) return;
    if (s.issued < frame_transfers(s) && dcode_.can_issue()) {
      PortOp op;
      op.use = PortUse::kStack;
      op.addr = s.frame + 4 * s.issued;
      op.write = s.kind == SeqKind::kEntry;
      op.wdata = op.write ? s.words[s.issued] : 0;
      op.aux = s.issued;
      dcode_.issue(op);
      ++s.issued;
    }
    if (s.need_vector && !s.vector_issued && icode_.can_issue()) {
      PortOp op;
      op.use = PortUse::kVector;
      op.addr = arch_.vtor + 4 * s.exception;
      op.epoch = epoch_;
      icode_.issue(op);
      s.vector_issued = true;
    }
  }

  void step_sequence(ClockOutput& out) {
    Sequence& s = exec_->seq;
    if (dc_ && dc_->op.use == PortUse::kStack) {
      s.error = s.error || dc_->error;
      if (!dc_->op.write) s.words[dc_->op.aux] = dc_->rdata;
      ++s.done;
    }
    if (ic_ && ic_->op.use == PortUse::kVector) {
      s.error = s.error || ic_->error;
      s.vector = ic_->rdata;
      s.vector_done = true;
    }
    // Drain what is already on the bus before reporting a fault.
    if (s.error) {
      if (s.done == s.issued && (!s.vector_issued || s.vector_done)) fault(out, !exec_->is_entry);
      return;
    }
    if (s.done < frame_transfers(s) || (s.need_vector && !s.vector_done)) return issue_sequence();

    auto ev = make_event(*exec_);
    switch (s.kind) {
      case SeqKind::kEntry:
        arch_.r[14] = arch_.ipsr == 0 ? kExcReturnThread : kExcReturnHandler;
        arch_.r[13] = s.frame;
        arch_.ipsr = s.exception;
        arch_.r[15] = s.vector & ~1u;
        ev.exception = isa::ExceptionEffect{isa::ExceptionKind::kEntry, s.exception, arch_.r[13], arch_.r[14]};
        break;
      case SeqKind::kTailChain:
        arch_.ipsr = s.exception;
        arch_.r[15] = s.vector & ~1u;
        ev.exception = isa::ExceptionEffect{isa::ExceptionKind::kTailChain, s.exception, arch_.r[13], arch_.r[14]};
        break;
      case SeqKind::kReturn: {
        const uint32_t restored_ipsr = s.words[7] & 0x1FF;
        if ((s.exc_return == kExcReturnThread) != (restored_ipsr == 0)) return fault(out);
        const uint32_t leaving = arch_.ipsr;
        arch_.r[0] = s.words[0];
        arch_.r[1] = s.words[1];
        arch_.r[2] = s.words[2];
        arch_.r[3] = s.words[3];
        arch_.r[12] = s.words[4];
        arch_.r[14] = s.words[5];
        arch_.r[15] = s.words[6] & ~1u;
        arch_.apsr = isa::Flags::from_bits(s.words[7] >> 28);
        arch_.ipsr = restored_ipsr;
        arch_.r[13] = s.frame + 32;
        ev.exception = isa::ExceptionEffect{isa::ExceptionKind::kReturn, leaving, arch_.r[13], arch_.r[14]};
        break;
      }
    }
    ev.wb = isa::Writeback{15, arch_.r[15]};
    redirect(arch_.r[15]);
    retire(ev, out);
  }

  isa::ArchState arch_;
  BugId bug_ = BugId::kNone;
  uint64_t cycle_ = 0;
  uint64_t seq_ = 0;
  bool halted_ = false;

  BusMaster icode_;
  BusMaster dcode_;
  std::optional<PortCompletion> ic_;
  std::optional<PortCompletion> dc_;

  uint32_t fetch_pc_ = 0;
  bool fetch_enabled_ = true;
  uint64_t epoch_ = 0;
  uint32_t inflight_ = 0;  // halfwords promised by live (current-epoch) fetches
  std::deque<Slot> buffer_;
  std::optional<DecodeEntry> decode_;
  std::optional<ExecEntry> exec_;

  std::vector<FetchRecord> icode_log_;
  std::vector<DecodeRecord> decode_log_;
};

}  // namespace m3lv::dut
