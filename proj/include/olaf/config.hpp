#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "olaf/sim.hpp"

namespace olaf::config {

struct Variant {
    std::string name;
    Discipline discipline = Discipline::Olaf;
    bool tx_control = false;
};

// alpha = capacity(scaled) / capacity(reference).
struct AlphaSweep {
    std::string scaled;
    std::string reference;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    sim::Scenario scenario;
    std::vector<Variant> variants;  // empty: run the topology as written
    std::optional<AlphaSweep> alpha;
    std::uint64_t speedup_updates = 0;  // >0: report T_FIFO / T_Olaf for this many updates per worker
};

// Throws ConfigError with "line L, column C" or a dotted field path.
ScenarioConfig parse(const std::string& json_text, const std::string& base_dir = ".");
ScenarioConfig load(const std::string& path);
std::string serialize(const ScenarioConfig& c);

// Numeric keys accepted by set_parameter, e.g. topology.switches.SW1.capacity_bps.
std::vector<std::string> sweepable_keys(const ScenarioConfig& c);
ScenarioConfig set_parameter(const ScenarioConfig& c, const std::string& key, double value);

}  // namespace olaf::config
