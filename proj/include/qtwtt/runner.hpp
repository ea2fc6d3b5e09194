#pragma once

#include <string>

#include "qtwtt/budget.hpp"
#include "qtwtt/scenario.hpp"
#include "qtwtt/stability.hpp"
#include "qtwtt/twoway.hpp"

namespace qtwtt {

struct RunOptions {
    std::string out_dir;
    std::string budget_path;    // empty: stock budget spec
    std::string preset_name;    // set when the scenario came from a preset
    bool survey_only = false;   // noise scan instead of a transfer run
    bool dump_tags = false;     // event mode: write the binary/text tag streams
    bool dump_histograms = false; // write block 0's two fine histograms
    unsigned threads = 1;
};

struct RunArtifacts {
    OffsetSeries series;
    TdevCurve tdev;
    UncertaintyBudget budget;
};

// Executes the configured run and writes offsets.txt, tdev.txt, budget.txt,
// budget_kv.txt, summary.txt and manifest.txt (plus survey.txt / tag dumps
// when requested) under out_dir. The manifest echoes the complete resolved
// configuration and can itself be loaded as a scenario file.
RunArtifacts run_scenario(const ScenarioConfig& cfg, const RunOptions& opts);

const char* version_string();

} // namespace qtwtt
