#pragma once

#include <string>
#include <vector>

#include "qtwtt/scenario.hpp"

namespace qtwtt {

// Reference values a preset is calibrated against, used to annotate reports.
struct ExpectedValue {
    std::string label;
    double value = 0.0;
    std::string units;
};

struct Preset {
    std::string name;
    std::string description;
    std::string scenario_text;
    std::vector<ExpectedValue> expected;
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

// Parses the preset's embedded scenario text. Throws ConfigError for an
// unknown preset name.
ScenarioConfig preset_scenario(const std::string& name);

} // namespace qtwtt
