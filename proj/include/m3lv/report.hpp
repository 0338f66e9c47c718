// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Plain-text campaign report. Sections RESULT, MISMATCHES, VIOLATIONS,
// COVERAGE and FEATURES, then one machine-readable line:
//
//   result=<pass|fail> mismatches=<n> violations=<n> coverage=<pct>

#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "m3lv/tb/environment.hpp"
#include "m3lv/vplan/plan.hpp"

namespace m3lv {

struct ReportSummary {
  bool pass = true;
  size_t mismatches = 0;
  size_t violations = 0;
  double coverage = 0;
};

inline std::string format_percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", p);
  return buf;
}

inline ReportSummary summarize(const std::vector<tb::CampaignResult>& runs, const std::optional<vplan::FeatureReport>& features) {
  ReportSummary s;
  tb::CoverageModel cov;
  for (const auto& r : runs) {
    s.mismatches += r.mismatches.size();
    s.violations += r.violation_count();
    if (r.budget_exceeded) s.pass = false;
    cov.merge(r.coverage);
  }
  s.coverage = cov.percent();
  if (s.mismatches != 0 || s.violations != 0) s.pass = false;
  if (features && features->any_fail()) s.pass = false;
  return s;
}

inline std::string summary_line(const ReportSummary& s) {
  return std::string("result=") + (s.pass ? "pass" : "fail") + " mismatches=" + std::to_string(s.mismatches) +
         " violations=" + std::to_string(s.violations) + " coverage=" + format_percent(s.coverage);
}

inline void write_report(std::ostream& o, const std::vector<tb::CampaignResult>& runs,
                         const std::optional<vplan::FeatureReport>& features = std::nullopt) {
  const ReportSummary sum = summarize(runs, features);
  tb::CoverageModel cov;
  for (const auto& r : runs) cov.merge(r.coverage);

  o << "RESULT\n";
  o << "  status: " << (sum.pass ? "pass" : "fail") << '\n';
  o << "  runs: " << runs.size() << '\n';
  for (const auto& r : runs) {
    o << "  run test=" << r.test << " seed=" << r.seed << " bug=" << dut::bug_name(r.bug)
      << " wait=" << int{r.code_wait} << '/' << int{r.sram_wait} << " cycles=" << r.cycles << " retired=" << r.retired
      << " end=" << (r.budget_exceeded ? "budget_exceeded" : r.halted ? "halted" : "stopped")
      << (r.faulted ? " fault" : "") << '\n';
  }

  o << "\nMISMATCHES\n";
  for (const auto& r : runs)
    for (const auto& m : r.mismatches)
      o << "  " << r.test << " seed=" << r.seed << " seq=" << m.seq << " field=" << m.field
        << " family=" << tb::family_name(m.family) << " scope=" << m.mnemonic << " expected=" << m.expected
        << " actual=" << m.actual << '\n';

  o << "\nVIOLATIONS\n";
  for (const auto& r : runs) {
    for (const auto& v : r.violations)
      o << "  " << r.test << " seed=" << r.seed << " cycle=" << v.cycle << " port=" << bus::port_letter(v.port)
        << " rule=" << bus::rule_id(v.rule) << ' ' << v.message << '\n';
    for (const auto& v : r.arch_violations)
      o << "  " << r.test << " seed=" << r.seed << " cycle=" << v.cycle << " rule=" << v.rule << ' ' << v.message
        << '\n';
  }

  o << "\nCOVERAGE\n";
  for (const auto& g : cov.groups())
    o << "  " << g.name << ' ' << g.hit_bins() << '/' << g.bins.size() << ' ' << format_percent(g.percent()) << "%\n";
  o << "  total " << cov.hit_bins() << '/' << cov.total_bins() << ' ' << format_percent(cov.percent()) << "%\n";

  o << "\nFEATURES\n";
  if (features) {
    for (const auto& f : features->features) {
      o << "  " << f.id << ' ' << vplan::status_name(f.status);
      if (!f.detail.empty()) o << " (" << f.detail << ')';
      o << '\n';
    }
    o << "  pass " << format_percent(features->percent_pass()) << "%\n";
  }

  o << '\n' << summary_line(sum) << '\n';
}

inline std::string report_text(const std::vector<tb::CampaignResult>& runs,
                               const std::optional<vplan::FeatureReport>& features = std::nullopt) {
  std::ostringstream o;
  write_report(o, runs, features);
  return o.str();
}

}  // namespace m3lv
