#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "simulator.hpp"

namespace mosto {

// A simulation run described by a key = value file. Lists are comma separated,
// one value per hop in data direction (server first).
struct Scenario {
  std::vector<HopSpec> hops;
  std::uint64_t size = 0;
  SimConfig sim;
  OffloadConfig offload;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

// Human-readable "key: value" lines.
std::string format_summary(const SimResult& r);

}  // namespace mosto
