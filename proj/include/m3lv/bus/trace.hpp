// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Trace CSV:
//   cycle,port,htrans,hsize,hwrite,hburst,haddr,hwdata,hrdata,hready,hresp
// cycle is decimal, port is I or D, everything else is lowercase hex padded
// to its bit width (1 digit for the control fields, 8 for address and data).

#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "m3lv/bus/signals.hpp"
#include "m3lv/util.hpp"

namespace m3lv::bus {

inline constexpr std::string_view kTraceHeader = "cycle,port,htrans,hsize,hwrite,hburst,haddr,hwdata,hrdata,hready,hresp";

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(size_t l, const std::string& msg)
      : std::runtime_error("trace line " + std::to_string(l) + ": " + msg), line(l) {}
  size_t line;
};

inline std::string format_sample(const BusSample& s) {
  std::string row = std::to_string(s.cycle);
  row += ',';
  row += port_letter(s.port);
  for (uint32_t v : {uint32_t{s.htrans}, uint32_t{s.hsize}, uint32_t{s.hwrite}, uint32_t{s.hburst}}) {
    row += ',';
    row += util::hex(v, 1);
  }
  for (uint32_t v : {s.haddr, s.hwdata, s.hrdata}) {
    row += ',';
    row += util::hex(v, 8);
  }
  row += ',';
  row += util::hex(s.hready, 1);
  row += ',';
  row += util::hex(s.hresp, 1);
  return row;
}

class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(out) { out_ << kTraceHeader << '\n'; }
  void write(const BusSample& s) { out_ << format_sample(s) << '\n'; }

 private:
  std::ostream& out_;
};

inline BusSample parse_sample(std::string_view row, size_t line_no) {
  std::vector<std::string_view> f;
  size_t start = 0;
  while (true) {
    const size_t comma = row.find(',', start);
    f.push_back(util::trim(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (f.size() != 11) throw TraceParseError(line_no, "expected 11 fields, got " + std::to_string(f.size()));
  BusSample s;
  try {
    s.cycle = util::parse_dec(f[0]);
    if (f[1] == "I") s.port = Port::kIcode;
    else if (f[1] == "D") s.port = Port::kDcode;
    else throw TraceParseError(line_no, "port must be I or D");
    const auto narrow = [&](std::string_view v, uint32_t max, const char* what) {
      const uint64_t x = util::parse_hex(v);
      if (x > max) throw TraceParseError(line_no, std::string(what) + " exceeds its bit width");
      return static_cast<uint32_t>(x);
    };
    s.htrans = static_cast<uint8_t>(narrow(f[2], 0x3, "htrans"));
    s.hsize = static_cast<uint8_t>(narrow(f[3], 0x7, "hsize"));
    s.hwrite = static_cast<uint8_t>(narrow(f[4], 0x1, "hwrite"));
    s.hburst = static_cast<uint8_t>(narrow(f[5], 0x7, "hburst"));
    s.haddr = narrow(f[6], 0xFFFFFFFF, "haddr");
    s.hwdata = narrow(f[7], 0xFFFFFFFF, "hwdata");
    s.hrdata = narrow(f[8], 0xFFFFFFFF, "hrdata");
    s.hready = static_cast<uint8_t>(narrow(f[9], 0x1, "hready"));
    s.hresp = static_cast<uint8_t>(narrow(f[10], 0x3, "hresp"));
  } catch (const std::invalid_argument& e) {
    throw TraceParseError(line_no, e.what());
  }
  return s;
}

inline std::vector<BusSample> read_trace(std::istream& in) {
  std::vector<BusSample> samples;
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) throw TraceParseError(1, "empty trace");
  ++line_no;
  if (util::trim(line) != kTraceHeader) throw TraceParseError(1, "bad header");
  while (std::getline(in, line)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    samples.push_back(parse_sample(line, line_no));
  }
  return samples;
}

inline std::vector<BusSample> read_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_trace(in);
}

}  // namespace m3lv::bus
