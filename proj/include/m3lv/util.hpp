// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for every testbench component: the seeded PRNG, hex
// formatting and a levelled logger.

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace m3lv::util {

// SplitMix64. Streams are reproducible in any language:
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// below(n) maps a draw onto [0, n) with the high half of the 128-bit
// product draw * n; chance(p) compares the top 53 bits against p.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next() >> 32); }

  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("SplitMix64::below(0)");
    __extension__ using u128 = unsigned __int128;
    return static_cast<uint64_t>((static_cast<u128>(next()) * n) >> 64);
  }

  // Inclusive range.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // Index drawn proportionally to weights. Weights must be nonnegative with a
  // positive sum.
  size_t weighted(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0)) throw std::invalid_argument("weighted: no positive weight");
    double x = unit() * total;
    size_t last_positive = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0) continue;
      last_positive = i;
      if (x < weights[i]) return i;
      x -= weights[i];
    }
    return last_positive;
  }

 private:
  uint64_t state_;
};

inline std::string hex(uint64_t v, int digits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(static_cast<size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    s[static_cast<size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return s;
}

inline std::string hex32(uint32_t v) { return "0x" + hex(v, 8); }

// Parses an unsigned hex literal with or without a 0x prefix.
inline uint64_t parse_hex(std::string_view s) {
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  if (s.empty() || s.size() > 16) throw std::invalid_argument("bad hex literal");
  uint64_t v = 0;
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw std::invalid_argument("bad hex literal");
    v = (v << 4) | static_cast<uint64_t>(d);
  }
  return v;
}

inline uint64_t parse_dec(std::string_view s) {
  if (s.empty() || s.size() > 19) throw std::invalid_argument("bad decimal literal");
  uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad decimal literal");
    v = v * 10 + static_cast<uint64_t>(c - '0');
  }
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

// Verbosity comes from M3LV_LOG (quiet | info | debug); default info.
class Log {
 public:
  static LogLevel level() {
    static const LogLevel lvl = [] {
      const char* env = std::getenv("M3LV_LOG");
      if (env == nullptr) return LogLevel::kInfo;
      std::string_view v(env);
      if (v == "quiet") return LogLevel::kQuiet;
      if (v == "debug") return LogLevel::kDebug;
      return LogLevel::kInfo;
    }();
    return lvl;
  }

  static void info(std::string_view msg) { emit(LogLevel::kInfo, "info", msg); }
  static void debug(std::string_view msg) { emit(LogLevel::kDebug, "debug", msg); }

 private:
  static void emit(LogLevel at, const char* tag, std::string_view msg) {
    if (level() < at) return;
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::fprintf(stderr, "[m3lv %s] %.*s\n", tag, static_cast<int>(msg.size()), msg.data());
  }
};

}  // namespace m3lv::util
