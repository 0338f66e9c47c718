// Copyright m3lv contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

// Writes clean.csv plus one mutated trace per monitor rule (mutated_v1.csv ..
// mutated_v5.csv) into the given directory. The clean trace is the
// irq_entry directed test with two wait states on both ports, so stacking
// holds address phases under HREADY low.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "m3lv/bus/trace.hpp"
#include "m3lv/tb/campaign.hpp"

namespace {

using namespace m3lv;
using bus::BusSample;

std::vector<BusSample> clean_trace() {
  tb::RunRequest req;
  req.test = "irq_entry";
  req.wait_states = 2;
  auto cfg = tb::make_config(req);
  std::ostringstream out;
  cfg.trace = &out;
  const auto r = tb::run_environment(cfg);
  if (!r.passed()) throw std::runtime_error("clean run did not pass");
  return bus::read_trace(out.str());
}

// First sample matching `pred`; aborts if there is none.
size_t find(const std::vector<BusSample>& t, const std::function<bool(size_t)>& pred) {
  for (size_t i = 0; i < t.size(); ++i)
    if (pred(i)) return i;
  throw std::runtime_error("no sample to mutate");
}

// Next sample on the same port.
size_t next_on_port(const std::vector<BusSample>& t, size_t i) {
  for (size_t k = i + 1; k < t.size(); ++k)
    if (t[k].port == t[i].port) return k;
  throw std::runtime_error("no following sample");
}

void write(const std::filesystem::path& p, const std::vector<BusSample>& t) {
  std::ofstream out(p, std::ios::binary);
  bus::TraceWriter w(out);
  for (const auto& s : t) w.write(s);
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_corpus <dir>\n";
    return 2;
  }
  try {
    const std::filesystem::path dir(argv[1]);
    std::filesystem::create_directories(dir);
    const auto clean = clean_trace();
    write(dir / "clean.csv", clean);

    const auto active_word = [&](size_t i) {
      return clean[i].port == bus::Port::kDcode && clean[i].htrans == bus::htrans::kNonseq &&
             clean[i].hsize == bus::hsize::kWord;
    };

    // V1: address moves while the previous cycle held HREADY low.
    {
      auto t = clean;
      const size_t i = find(t, [&](size_t k) { return active_word(k) && t[k].hready == 0; });
      t[next_on_port(t, i)].haddr += 4;
      write(dir / "mutated_v1.csv", t);
    }
    // V2: reserved HSIZE.
    {
      auto t = clean;
      t[find(t, active_word)].hsize = 0b011;
      write(dir / "mutated_v2.csv", t);
    }
    // V3: misaligned word address.
    {
      auto t = clean;
      const size_t i = find(t, [&](size_t k) { return active_word(k) && t[k].hready == 1; });
      t[i].haddr |= 2;
      write(dir / "mutated_v3.csv", t);
    }
    // V4: SEQ inside a SINGLE burst.
    {
      auto t = clean;
      const size_t i = find(t, [&](size_t k) { return active_word(k) && t[k].hready == 1; });
      t[i].htrans = bus::htrans::kSeq;
      write(dir / "mutated_v4.csv", t);
    }
    // V5: ERROR on the completing cycle of a waited data phase, without the
    // HREADY-low first cycle.
    {
      auto t = clean;
      const size_t i = find(t, [&](size_t k) {
        return k >= 2 && t[k].port == bus::Port::kDcode && t[k].hready == 1 && t[k - 2].port == bus::Port::kDcode &&
               t[k - 2].hready == 0;
      });
      t[i].hresp = bus::hresp::kError;
      write(dir / "mutated_v5.csv", t);
    }
  } catch (const std::exception& e) {
    std::cerr << "make_corpus: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
