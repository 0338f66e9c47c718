// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// AHB-Lite style signal records for the ICODE and DCODE ports.
//
// Encodings (AHB-Lite value assignments; only the subset below is legal in
// this system):
//
//   HTRANS[1:0]  00 IDLE   01 BUSY   10 NONSEQ   11 SEQ
//   HSIZE[2:0]   000 byte  001 half  010 word    (011 and above reserved)
//   HWRITE       0 READ    1 WRITE
//   HBURST[2:0]  000 SINGLE                      (others reserved here)
//   HREADY       0 EXTEND  1 COMPLETE
//   HRESP[1:0]   00 OKAY   01 ERROR              (10, 11 reserved)
//
// Each cycle a port carries the master's address phase (HTRANS, HSIZE,
// HWRITE, HBURST, HADDR), the write data of the transfer in its data phase
// (HWDATA) and the slave's data-phase response (HREADY, HRESP, HRDATA). An
// address phase is accepted in a cycle with HREADY high; its data phase
// occupies the following cycles up to and including the next HREADY high.
// ERROR takes two cycles: HREADY low then high, HRESP ERROR in both.
//
// Data travels on byte lanes: the byte at address A sits in bits
// 8*(A%4)+7 .. 8*(A%4).

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "m3lv/isa/memory.hpp"

namespace m3lv::bus {

using isa::AccessSize;

namespace htrans {
inline constexpr uint8_t kIdle = 0b00, kBusy = 0b01, kNonseq = 0b10, kSeq = 0b11;
}
namespace hsize {
inline constexpr uint8_t kByte = 0b000, kHalf = 0b001, kWord = 0b010;
}
namespace hburst {
inline constexpr uint8_t kSingle = 0b000;
}
namespace hresp {
inline constexpr uint8_t kOkay = 0b00, kError = 0b01;
}

enum class Port : uint8_t { kIcode, kDcode };

inline char port_letter(Port p) { return p == Port::kIcode ? 'I' : 'D'; }

// Master-driven signals.
struct BusRequest {
  uint8_t htrans = htrans::kIdle;
  uint8_t hsize = hsize::kWord;
  uint8_t hwrite = 0;
  uint8_t hburst = hburst::kSingle;
  uint32_t haddr = 0;
  uint32_t hwdata = 0;

  static BusRequest idle() { return {}; }
  bool active() const { return htrans == htrans::kNonseq || htrans == htrans::kSeq; }
  friend bool operator==(const BusRequest&, const BusRequest&) = default;
};

// Slave-driven signals.
struct BusReply {
  uint8_t hready = 1;
  uint8_t hresp = hresp::kOkay;
  uint32_t hrdata = 0;

  friend bool operator==(const BusReply&, const BusReply&) = default;
};

struct BusSample {
  uint64_t cycle = 0;
  Port port = Port::kIcode;
  uint8_t htrans = 0;  // 2 bits
  uint8_t hsize = 0;   // 3 bits
  uint8_t hwrite = 0;  // 1 bit
  uint8_t hburst = 0;  // 3 bits
  uint32_t haddr = 0;
  uint32_t hwdata = 0;
  uint32_t hrdata = 0;
  uint8_t hready = 0;  // 1 bit
  uint8_t hresp = 0;   // 2 bits

  static BusSample of(uint64_t cycle, Port port, const BusRequest& q, const BusReply& r) {
    return {cycle, port, q.htrans, q.hsize, q.hwrite, q.hburst, q.haddr, q.hwdata, r.hrdata, r.hready, r.hresp};
  }

  bool widths_ok() const { return htrans < 4 && hsize < 8 && hwrite < 2 && hburst < 8 && hready < 2 && hresp < 4; }

  friend bool operator==(const BusSample&, const BusSample&) = default;
};

enum class TransferKind : uint8_t { kRead, kWrite };
enum class Response : uint8_t { kOkay, kError };

struct Transfer {
  Port port = Port::kIcode;
  TransferKind kind = TransferKind::kRead;
  uint32_t addr = 0;
  AccessSize size = AccessSize::kWord;
  uint32_t data = 0;  // lane-extracted, zero-extended
  uint32_t wait_cycles = 0;
  Response response = Response::kOkay;
  uint64_t complete_cycle = 0;

  friend bool operator==(const Transfer&, const Transfer&) = default;
};

// Monitor rule table.
//   V1  address/control or write data changed while HREADY held the phase
//   V2  reserved encoding (HSIZE >= 011, HBURST != SINGLE on an active
//       transfer, HRESP 10/11)
//   V3  transfer address not aligned to HSIZE
//   V4  BUSY or SEQ issued inside a SINGLE burst
//   V5  ERROR response not held for exactly two cycles (low then high HREADY)
enum class Rule : uint8_t { kV1 = 1, kV2, kV3, kV4, kV5 };

inline std::string rule_id(Rule r) { return "V" + std::to_string(static_cast<int>(r)); }

struct Violation {
  uint64_t cycle = 0;
  Port port = Port::kIcode;
  Rule rule = Rule::kV1;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

class UnknownEncoding : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TransLabel : uint8_t { kIdle, kBusy, kNonseq, kSeq };
enum class SizeLabel : uint8_t { kByte, kHalf, kWord };
enum class DirLabel : uint8_t { kRead, kWrite };
enum class BurstLabel : uint8_t { kSingle };
enum class ReadyLabel : uint8_t { kExtend, kComplete };
enum class RespLabel : uint8_t { kOkay, kError };

struct Classification {
  TransLabel trans;
  SizeLabel size;
  DirLabel dir;
  BurstLabel burst;
  ReadyLabel ready;
  RespLabel resp;

  friend bool operator==(const Classification&, const Classification&) = default;
};

inline Classification classify_sample(const BusSample& s) {
  if (!s.widths_ok()) throw UnknownEncoding("field exceeds its bit width");
  if (s.hsize > hsize::kWord) throw UnknownEncoding("reserved HSIZE " + std::to_string(s.hsize));
  if (s.hburst != hburst::kSingle) throw UnknownEncoding("reserved HBURST " + std::to_string(s.hburst));
  if (s.hresp > hresp::kError) throw UnknownEncoding("reserved HRESP " + std::to_string(s.hresp));
  return {static_cast<TransLabel>(s.htrans), static_cast<SizeLabel>(s.hsize), static_cast<DirLabel>(s.hwrite),
          BurstLabel::kSingle, static_cast<ReadyLabel>(s.hready), static_cast<RespLabel>(s.hresp)};
}

inline const char* label(TransLabel l) {
  static constexpr const char* k[] = {"IDLE", "BUSY", "NONSEQ", "SEQ"};
  return k[static_cast<int>(l)];
}
inline const char* label(SizeLabel l) {
  static constexpr const char* k[] = {"BYTE", "HALF", "WORD"};
  return k[static_cast<int>(l)];
}
inline const char* label(DirLabel l) { return l == DirLabel::kRead ? "READ" : "WRITE"; }
inline const char* label(BurstLabel) { return "SINGLE"; }
inline const char* label(ReadyLabel l) { return l == ReadyLabel::kExtend ? "EXTEND" : "COMPLETE"; }
inline const char* label(RespLabel l) { return l == RespLabel::kOkay ? "OKAY" : "ERROR"; }

// Byte-lane helpers.
inline uint32_t lane_extract(uint32_t bus_word, uint32_t addr, AccessSize size) {
  const uint32_t shift = 8 * (addr & 3);
  switch (size) {
    case AccessSize::kByte: return (bus_word >> shift) & 0xFF;
    case AccessSize::kHalf: return (bus_word >> shift) & 0xFFFF;
    case AccessSize::kWord: return bus_word;
  }
  return bus_word;
}

inline uint32_t lane_place(uint32_t value, uint32_t addr, AccessSize size) {
  const uint32_t shift = 8 * (addr & 3);
  switch (size) {
    case AccessSize::kByte: return (value & 0xFF) << shift;
    case AccessSize::kHalf: return (value & 0xFFFF) << shift;
    case AccessSize::kWord: return value;
  }
  return value;
}

}  // namespace m3lv::bus
