// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Verification plan files.
//
//   plan     := { line }
//   line     := blank | comment | header | field
//   comment  := ws "#" any                  (whole-line only)
//   header   := "[" section "]"
//   section  := "overview" | "feature" | "stimulus" | "checker" | "coverage"
//   field    := key ":" value               (split at the first colon)
//
// Every header except [overview] opens a new record. Keys per record:
//
//   [overview]  any key; kept in order as free text
//   [feature]   id, description, expected, priority (high|medium|low),
//               stimulus, checkers, coverage      (lists are comma-separated)
//   [stimulus]  id, test (directed test name | random | suite), seed, count,
//               weights (default | alu_only | name=w,...), wait_states
//   [checker]   id, feature, family (fetch|decode|result|memory|exception|
//               protocol), scope (mnemonic names, all, exception), description
//   [coverage]  id, bins (group.bin, ...)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "m3lv/tb/checker.hpp"
#include "m3lv/tb/coverage.hpp"
#include "m3lv/tb/environment.hpp"
#include "m3lv/util.hpp"

namespace m3lv::vplan {

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t l, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
  size_t line;
};

class UnknownCoverageRef : public std::runtime_error {
 public:
  explicit UnknownCoverageRef(const std::string& ref)
      : std::runtime_error("coverage bin " + ref + " is not in the coverage model"), ref(ref) {}
  std::string ref;
};

enum class Priority : uint8_t { kHigh, kMedium, kLow };

inline std::string_view priority_name(Priority p) {
  switch (p) {
    case Priority::kHigh: return "high";
    case Priority::kMedium: return "medium";
    case Priority::kLow: return "low";
  }
  return "medium";
}

struct Feature {
  std::string id;
  std::string description;
  std::string expected;
  Priority priority = Priority::kMedium;
  std::vector<std::string> stimulus;
  std::vector<std::string> checkers;
  std::vector<std::string> coverage;
  friend bool operator==(const Feature&, const Feature&) = default;
};

struct StimulusEntry {
  std::string id;
  std::string test = "random";
  uint64_t seed = 0;
  uint32_t count = 1000;
  std::string weights = "default";
  uint8_t wait_states = 0;
  friend bool operator==(const StimulusEntry&, const StimulusEntry&) = default;
};

struct CheckerEntry {
  std::string id;
  std::string feature;
  tb::Family family = tb::Family::kResult;
  std::vector<std::string> scope = {"all"};
  std::string description;
  friend bool operator==(const CheckerEntry&, const CheckerEntry&) = default;
};

struct CoverageEntry {
  std::string id;
  std::vector<std::string> bins;
  friend bool operator==(const CoverageEntry&, const CoverageEntry&) = default;
};

struct VPlan {
  std::vector<std::pair<std::string, std::string>> overview;
  std::vector<Feature> features;
  std::vector<StimulusEntry> stimulus;
  std::vector<CheckerEntry> checkers;
  std::vector<CoverageEntry> coverage;
  std::vector<std::string> warnings;  // not part of equality

  const StimulusEntry* find_stimulus(std::string_view id) const { return find(stimulus, id); }
  const CheckerEntry* find_checker(std::string_view id) const { return find(checkers, id); }
  const CoverageEntry* find_coverage(std::string_view id) const { return find(coverage, id); }
  const Feature* find_feature(std::string_view id) const { return find(features, id); }

  friend bool operator==(const VPlan& a, const VPlan& b) {
    return a.overview == b.overview && a.features == b.features && a.stimulus == b.stimulus &&
           a.checkers == b.checkers && a.coverage == b.coverage;
  }

 private:
  template <class T>
  static const T* find(const std::vector<T>& v, std::string_view id) {
    for (const auto& x : v)
      if (x.id == id) return &x;
    return nullptr;
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    const size_t comma = v.find(',', start);
    const auto item = util::trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

}  // namespace detail

// Mnemonic weights for a stimulus entry.
inline std::array<double, isa::kMnemonicCount> parse_weights(std::string_view spec) {
  if (spec == "default") return tb::GeneratorConfig::default_weights();
  if (spec == "alu_only") return tb::GeneratorConfig::alu_only_weights();
  auto w = tb::GeneratorConfig::default_weights();
  for (const auto& item : detail::split_list(spec)) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("weight `" + item + "` is not name=value");
    const auto name = util::trim(std::string_view(item).substr(0, eq));
    const auto m = isa::parse_mnemonic(name);
    if (!m) throw std::invalid_argument("unknown mnemonic `" + std::string(name) + "` in weights");
    const std::string value(util::trim(std::string_view(item).substr(eq + 1)));
    size_t used = 0;
    double x = 0;
    try {
      x = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || !std::isfinite(x) || x < 0)
      throw std::invalid_argument("bad weight `" + value + "`");
    w[static_cast<size_t>(*m)] = x;
  }
  return w;
}

inline VPlan parse_plan(std::string_view text) {
  VPlan p;
  enum class Sec { kNone, kOverview, kFeature, kStimulus, kChecker, kCoverage } sec = Sec::kNone;
  std::map<std::string, size_t> defined_at;  // "kind:id" -> line
  size_t record_line = 0;
  std::set<std::string> keys;

  const auto close_record = [&](size_t) {
    const auto require_id = [&](const std::string& id, const char* kind) {
      if (id.empty()) throw ParseError(record_line, std::string(kind) + " record has no id");
      const std::string key = std::string(kind) + ":" + id;
      if (auto [it, fresh] = defined_at.emplace(key, record_line); !fresh)
        throw ParseError(record_line,
                         "duplicate " + std::string(kind) + " id `" + id + "` (first at line " + std::to_string(it->second) + ")");
    };
    switch (sec) {
      case Sec::kFeature: require_id(p.features.back().id, "feature"); break;
      case Sec::kStimulus: require_id(p.stimulus.back().id, "stimulus"); break;
      case Sec::kChecker: require_id(p.checkers.back().id, "checker"); break;
      case Sec::kCoverage: require_id(p.coverage.back().id, "coverage"); break;
      default: break;
    }
    keys.clear();
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const auto line = util::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(n, "unterminated section header");
      close_record(n);
      const auto name = util::trim(line.substr(1, line.size() - 2));
      record_line = n;
      if (name == "overview") sec = Sec::kOverview;
      else if (name == "feature") sec = Sec::kFeature, p.features.emplace_back();
      else if (name == "stimulus") sec = Sec::kStimulus, p.stimulus.emplace_back();
      else if (name == "checker") sec = Sec::kChecker, p.checkers.emplace_back();
      else if (name == "coverage") sec = Sec::kCoverage, p.coverage.emplace_back();
      else throw ParseError(n, "unknown section [" + std::string(name) + "]");
      continue;
    }
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(n, "expected `key: value`");
    const std::string key(util::trim(line.substr(0, colon)));
    const std::string value(util::trim(line.substr(colon + 1)));
    if (key.empty()) throw ParseError(n, "empty key");
    if (sec == Sec::kNone) throw ParseError(n, "`" + key + "` outside any section");
    if (sec != Sec::kOverview && !keys.insert(key).second) throw ParseError(n, "repeated key `" + key + "`");
    const auto bad_key = [&] { return ParseError(n, "unknown key `" + key + "`"); };
    const auto number = [&](uint64_t max) -> uint64_t {
      uint64_t x = 0;
      try {
        x = util::parse_dec(value);
      } catch (const std::invalid_argument&) {
        throw ParseError(n, "`" + key + "` must be a decimal number");
      }
      if (x > max) throw ParseError(n, "`" + key + "` out of range");
      return x;
    };

    switch (sec) {
      case Sec::kOverview:
        p.overview.emplace_back(key, value);
        break;
      case Sec::kFeature: {
        auto& f = p.features.back();
        if (key == "id") f.id = value;
        else if (key == "description") f.description = value;
        else if (key == "expected") f.expected = value;
        else if (key == "priority") {
          if (value == "high") f.priority = Priority::kHigh;
          else if (value == "medium") f.priority = Priority::kMedium;
          else if (value == "low") f.priority = Priority::kLow;
          else throw ParseError(n, "priority must be high, medium or low");
        } else if (key == "stimulus") f.stimulus = detail::split_list(value);
        else if (key == "checkers") f.checkers = detail::split_list(value);
        else if (key == "coverage") f.coverage = detail::split_list(value);
        else throw bad_key();
        break;
      }
      case Sec::kStimulus: {
        auto& s = p.stimulus.back();
        if (key == "id") s.id = value;
        else if (key == "test") s.test = value;
        else if (key == "seed") s.seed = number(UINT64_MAX);
        else if (key == "count") {
          s.count = static_cast<uint32_t>(number(UINT32_MAX));
          if (s.count == 0) throw ParseError(n, "count must be at least 1");
        } else if (key == "weights") {
          try {
            parse_weights(value);
          } catch (const std::invalid_argument& e) {
            throw ParseError(n, e.what());
          }
          s.weights = value;
        } else if (key == "wait_states") s.wait_states = static_cast<uint8_t>(number(15));
        else throw bad_key();
        break;
      }
      case Sec::kChecker: {
        auto& c = p.checkers.back();
        if (key == "id") c.id = value;
        else if (key == "feature") c.feature = value;
        else if (key == "family") {
          const auto f = tb::parse_family(value);
          if (!f) throw ParseError(n, "unknown checker family `" + value + "`");
          c.family = *f;
        } else if (key == "scope") {
          c.scope = detail::split_list(value);
          for (const auto& m : c.scope)
            if (m != "all" && m != "exception" && !isa::parse_mnemonic(m))
              throw ParseError(n, "scope entry `" + m + "` is not a mnemonic, all or exception");
        } else if (key == "description") c.description = value;
        else throw bad_key();
        break;
      }
      case Sec::kCoverage: {
        auto& c = p.coverage.back();
        if (key == "id") c.id = value;
        else if (key == "bins") {
          c.bins = detail::split_list(value);
          for (const auto& b : c.bins)
            if (b.find('.') == std::string::npos || b.front() == '.' || b.back() == '.')
              throw ParseError(n, "coverage ref `" + b + "` is not group.bin");
        } else throw bad_key();
        break;
      }
      case Sec::kNone: break;
    }
  }
  close_record(n);

  // Referential integrity.
  const auto line_of = [&](const char* kind, const std::string& id) { return defined_at.at(std::string(kind) + ":" + id); };
  for (const auto& f : p.features) {
    for (const auto& s : f.stimulus)
      if (!p.find_stimulus(s)) throw ParseError(line_of("feature", f.id), "feature " + f.id + " references unknown stimulus `" + s + "`");
    for (const auto& c : f.checkers) {
      const auto* ce = p.find_checker(c);
      if (!ce) throw ParseError(line_of("feature", f.id), "feature " + f.id + " references unknown checker `" + c + "`");
      if (ce->feature != f.id)
        throw ParseError(line_of("feature", f.id), "checker " + c + " belongs to feature `" + ce->feature + "`, not " + f.id);
    }
    for (const auto& c : f.coverage)
      if (!p.find_coverage(c)) throw ParseError(line_of("feature", f.id), "feature " + f.id + " references unknown coverage `" + c + "`");
  }
  for (const auto& c : p.checkers)
    if (!p.find_feature(c.feature))
      throw ParseError(line_of("checker", c.id), "checker " + c.id + " names unknown feature `" + c.feature + "`");

  if (p.features.empty()) p.warnings.push_back("plan defines no features");
  std::set<std::string> used_stim, used_cov;
  for (const auto& f : p.features) {
    used_stim.insert(f.stimulus.begin(), f.stimulus.end());
    used_cov.insert(f.coverage.begin(), f.coverage.end());
    if (f.checkers.empty()) p.warnings.push_back("feature " + f.id + " has no checkers");
  }
  for (const auto& s : p.stimulus)
    if (!used_stim.count(s.id)) p.warnings.push_back("stimulus " + s.id + " is not used by any feature");
  for (const auto& c : p.coverage)
    if (!used_cov.count(c.id)) p.warnings.push_back("coverage " + c.id + " is not used by any feature");
  return p;
}

inline std::string serialize(const VPlan& p) {
  std::ostringstream o;
  bool first = true;
  const auto header = [&](const char* name) {
    if (!first) o << '\n';
    first = false;
    o << '[' << name << "]\n";
  };
  if (!p.overview.empty()) {
    header("overview");
    for (const auto& [k, v] : p.overview) o << k << ": " << v << '\n';
  }
  for (const auto& f : p.features) {
    header("feature");
    o << "id: " << f.id << '\n';
    if (!f.description.empty()) o << "description: " << f.description << '\n';
    if (!f.expected.empty()) o << "expected: " << f.expected << '\n';
    o << "priority: " << priority_name(f.priority) << '\n';
    if (!f.stimulus.empty()) o << "stimulus: " << detail::join(f.stimulus) << '\n';
    if (!f.checkers.empty()) o << "checkers: " << detail::join(f.checkers) << '\n';
    if (!f.coverage.empty()) o << "coverage: " << detail::join(f.coverage) << '\n';
  }
  for (const auto& s : p.stimulus) {
    header("stimulus");
    o << "id: " << s.id << "\ntest: " << s.test << "\nseed: " << s.seed << "\ncount: " << s.count
      << "\nweights: " << s.weights << "\nwait_states: " << int{s.wait_states} << '\n';
  }
  for (const auto& c : p.checkers) {
    header("checker");
    o << "id: " << c.id << "\nfeature: " << c.feature << "\nfamily: " << tb::family_name(c.family)
      << "\nscope: " << detail::join(c.scope) << '\n';
    if (!c.description.empty()) o << "description: " << c.description << '\n';
  }
  for (const auto& c : p.coverage) {
    header("coverage");
    o << "id: " << c.id << "\nbins: " << detail::join(c.bins) << '\n';
  }
  return o.str();
}

// Coverage refs absent from `model`.
inline std::vector<std::string> unknown_bins(const VPlan& p, const tb::CoverageModel& model) {
  std::vector<std::string> out;
  for (const auto& c : p.coverage)
    for (const auto& b : c.bins)
      if (!model.has_bin(b)) out.push_back(b);
  return out;
}

enum class Status : uint8_t { kPass, kFail, kUntested };

inline std::string_view status_name(Status s) {
  switch (s) {
    case Status::kPass: return "PASS";
    case Status::kFail: return "FAIL";
    case Status::kUntested: return "UNTESTED";
  }
  return "UNTESTED";
}

struct FeatureResult {
  std::string id;
  Status status = Status::kUntested;
  std::string detail;
  friend bool operator==(const FeatureResult&, const FeatureResult&) = default;
};

struct FeatureReport {
  std::vector<FeatureResult> features;

  size_t count(Status s) const {
    return static_cast<size_t>(std::count_if(features.begin(), features.end(), [&](const auto& f) { return f.status == s; }));
  }
  double percent_pass() const {
    return features.empty() ? 100.0 : 100.0 * static_cast<double>(count(Status::kPass)) / features.size();
  }
  bool any_fail() const { return count(Status::kFail) != 0; }
};

inline bool in_scope(const CheckerEntry& c, const std::string& mnemonic) {
  for (const auto& s : c.scope)
    if (s == "all" || s == mnemonic) return true;
  return false;
}

// Checker findings over all runs. Protocol checkers see bus violations,
// exception checkers additionally see controller and SP alignment failures.
inline std::optional<std::string> checker_finding(const CheckerEntry& c, const std::vector<tb::CampaignResult>& runs) {
  for (const auto& r : runs) {
    for (const auto& m : r.mismatches)
      if (m.family == c.family && in_scope(c, m.mnemonic))
        return c.id + ": " + m.field + " mismatch at seq " + std::to_string(m.seq) + " in " + r.test;
    if (c.family == tb::Family::kProtocol && !r.violations.empty())
      return c.id + ": " + bus::rule_id(r.violations.front().rule) + " in " + r.test;
    if (c.family == tb::Family::kException && !r.arch_violations.empty())
      return c.id + ": " + r.arch_violations.front().rule + " in " + r.test;
  }
  return std::nullopt;
}

inline FeatureReport trace_report(const VPlan& p, const std::vector<tb::CampaignResult>& runs) {
  tb::CoverageModel cov;
  for (const auto& r : runs) cov.merge(r.coverage);
  if (const auto bad = unknown_bins(p, cov); !bad.empty()) throw UnknownCoverageRef(bad.front());

  FeatureReport rep;
  for (const auto& f : p.features) {
    FeatureResult fr{f.id, Status::kPass, ""};
    for (const auto& cid : f.checkers) {
      if (auto finding = checker_finding(*p.find_checker(cid), runs)) {
        fr.status = Status::kFail;
        fr.detail = *finding;
        break;
      }
    }
    if (fr.status == Status::kPass) {
      for (const auto& cid : f.coverage) {
        for (const auto& b : p.find_coverage(cid)->bins)
          if (cov.hits(b) == 0) {
            fr.status = Status::kUntested;
            fr.detail = b + " not hit";
            break;
          }
        if (fr.status != Status::kPass) break;
      }
    }
    rep.features.push_back(std::move(fr));
  }
  return rep;
}

inline FeatureReport trace_report(const VPlan& p, const tb::CampaignResult& run) {
  return trace_report(p, std::vector<tb::CampaignResult>{run});
}

}  // namespace m3lv::vplan
