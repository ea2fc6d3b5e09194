#pragma once

#include <array>
#include <cstdint>

#include "qtwtt/photonics.hpp"
#include "qtwtt/scenario.hpp"
#include "qtwtt/time_tag.hpp"
#include "qtwtt/twoway.hpp"

namespace qtwtt {

// Tag chunks of one accumulation block, absolute picoseconds.
struct BlockTags {
    std::array<TagStream, 4> streams; // D1..D4
};

// Event-level synthesis of one block. Pair generation, the 50/50 branch
// split and the per-path losses are realized as independently thinned
// Poisson streams (coincident / signal-only / idler-only), which is
// distribution-identical to generating every pair and thinning it and keeps
// the per-block cost proportional to detected events. Detection draws run
// with pre-applied efficiency so the thinning is not applied twice.
BlockTags simulate_block(const ScenarioConfig& cfg, const SlowTables& slow,
                         std::size_t block_index);

// Expected generated events (tags incl. noise) per block, for the run guard.
double estimated_events_per_block(const ScenarioConfig& cfg);

struct EventRunResult {
    OffsetSeries series;
    std::array<TagStream, 4> tags; // populated only when keep_tags was set
};

// Full event-mode run: slow-process tables, acquisition on block 0, then
// block-parallel simulate/histogram/fit with deterministically predicted
// histogram centers. Identical output for any worker count.
EventRunResult run_event_mode(const ScenarioConfig& cfg, std::size_t n_blocks,
                              unsigned threads, bool keep_tags = false);

} // namespace qtwtt
