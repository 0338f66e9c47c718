// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Program image text format: one `ADDR: HALFWORD` record per line, both in
// lowercase hex (`00000000: 18d1`), halfword-aligned addresses, `#` starts a
// comment.

#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "m3lv/isa/memory.hpp"
#include "m3lv/util.hpp"

namespace m3lv::isa {

class ImageParseError : public std::runtime_error {
 public:
  ImageParseError(size_t l, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
  size_t line;
};

// Halfwords keyed by address.
using ProgramImage = std::map<uint32_t, uint16_t>;

inline std::string serialize_image(const ProgramImage& image) {
  std::string out;
  for (const auto& [addr, hw] : image) out += util::hex(addr, 8) + ": " + util::hex(hw, 4) + "\n";
  return out;
}

inline ProgramImage parse_image(std::string_view text) {
  ProgramImage image;
  size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = util::trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ImageParseError(line_no, "expected `ADDR: HALFWORD`");
    const auto addr_s = util::trim(line.substr(0, colon));
    const auto hw_s = util::trim(line.substr(colon + 1));
    if (addr_s.size() != 8 || hw_s.size() != 4) throw ImageParseError(line_no, "expected 8 and 4 hex digits");
    uint64_t addr = 0, hw = 0;
    try {
      addr = util::parse_hex(addr_s);
      hw = util::parse_hex(hw_s);
    } catch (const std::invalid_argument&) {
      throw ImageParseError(line_no, "bad hex digit");
    }
    if (addr & 1) throw ImageParseError(line_no, "address is not halfword-aligned");
    if (!image.emplace(static_cast<uint32_t>(addr), static_cast<uint16_t>(hw)).second)
      throw ImageParseError(line_no, "duplicate address");
  }
  return image;
}

inline void load_image(MemoryImage& mem, const ProgramImage& image) {
  for (const auto& [addr, hw] : image) mem.write16(addr, hw);
}

}  // namespace m3lv::isa
