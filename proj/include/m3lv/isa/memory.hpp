// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace m3lv::isa {

enum class AccessSize : uint8_t { kByte = 0, kHalf = 1, kWord = 2 };

inline constexpr uint32_t bytes_of(AccessSize s) { return 1u << static_cast<unsigned>(s); }

inline constexpr bool aligned(uint32_t addr, AccessSize s) { return (addr & (bytes_of(s) - 1)) == 0; }

class MemoryFault : public std::runtime_error {
 public:
  MemoryFault(uint32_t a, const std::string& what) : std::runtime_error(what), addr(a) {}
  uint32_t addr;
};

struct Region {
  std::string name;
  uint32_t base = 0;
  uint32_t size = 0;
  uint8_t wait_states = 0;  // honoured by the bus slave, ignored by backdoor access

  bool contains(uint32_t addr, uint32_t len) const {
    return addr >= base && static_cast<uint64_t>(addr) + len <= static_cast<uint64_t>(base) + size;
  }
};

inline constexpr uint32_t kCodeBase = 0x00000000;
inline constexpr uint32_t kCodeSize = 0x00010000;
inline constexpr uint32_t kSramBase = 0x20000000;
inline constexpr uint32_t kSramSize = 0x00010000;

// Byte-addressed little-endian storage over a fixed set of regions.
class MemoryImage {
 public:
  MemoryImage() = default;
  explicit MemoryImage(std::vector<Region> regions) : regions_(std::move(regions)) {
    for (const auto& r : regions_) bytes_.emplace_back(r.size, uint8_t{0});
  }

  // 64 KiB code at 0x0 and 64 KiB SRAM at 0x20000000.
  static MemoryImage standard(uint8_t code_wait = 0, uint8_t sram_wait = 0) {
    return MemoryImage({{"code", kCodeBase, kCodeSize, code_wait}, {"sram", kSramBase, kSramSize, sram_wait}});
  }

  const std::vector<Region>& regions() const { return regions_; }
  std::vector<Region>& regions() { return regions_; }

  const Region* region_of(uint32_t addr, uint32_t len = 1) const {
    for (const auto& r : regions_)
      if (r.contains(addr, len)) return &r;
    return nullptr;
  }

  bool mapped(uint32_t addr, uint32_t len) const { return region_of(addr, len) != nullptr; }

  std::optional<uint32_t> read(uint32_t addr, AccessSize size) const {
    const uint32_t n = bytes_of(size);
    const int idx = index_of(addr, n);
    if (idx < 0) return std::nullopt;
    const auto& mem = bytes_[static_cast<size_t>(idx)];
    const uint32_t off = addr - regions_[static_cast<size_t>(idx)].base;
    uint32_t v = 0;
    for (uint32_t i = 0; i < n; ++i) v |= static_cast<uint32_t>(mem[off + i]) << (8 * i);
    return v;
  }

  bool write(uint32_t addr, AccessSize size, uint32_t value) {
    const uint32_t n = bytes_of(size);
    const int idx = index_of(addr, n);
    if (idx < 0) return false;
    auto& mem = bytes_[static_cast<size_t>(idx)];
    const uint32_t off = addr - regions_[static_cast<size_t>(idx)].base;
    for (uint32_t i = 0; i < n; ++i) mem[off + i] = static_cast<uint8_t>(value >> (8 * i));
    return true;
  }

  uint32_t read32(uint32_t addr) const {
    if (auto v = read(addr, AccessSize::kWord)) return *v;
    throw MemoryFault(addr, "unmapped read");
  }

  void write32(uint32_t addr, uint32_t value) {
    if (!write(addr, AccessSize::kWord, value)) throw MemoryFault(addr, "unmapped write");
  }

  void write16(uint32_t addr, uint16_t value) {
    if (!write(addr, AccessSize::kHalf, value)) throw MemoryFault(addr, "unmapped write");
  }

  friend bool operator==(const MemoryImage& a, const MemoryImage& b) { return a.bytes_ == b.bytes_; }

 private:
  int index_of(uint32_t addr, uint32_t len) const {
    for (size_t i = 0; i < regions_.size(); ++i)
      if (regions_[i].contains(addr, len)) return static_cast<int>(i);
    return -1;
  }

  std::vector<Region> regions_;
  std::vector<std::vector<uint8_t>> bytes_;
};

}  // namespace m3lv::isa
