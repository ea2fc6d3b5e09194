#pragma once

#include <cstdint>
#include <vector>

#include "qtwtt/correlator.hpp"
#include "qtwtt/photonics.hpp"
#include "qtwtt/scenario.hpp"
#include "qtwtt/time_tag.hpp"

namespace qtwtt {

struct OffsetBlock {
    double epoch_s = 0.0;
    double d13_ps = 0.0; // fitted t1-t3 peak
    double d24_ps = 0.0; // fitted t2-t4 peak
    double t0_ps = 0.0;  // (d13 - d24)/2, exact on the stored values
    double n13 = 0.0;    // background-subtracted coincidences in the peak window
    double n24 = 0.0;
    double w13_ps = 0.0;
    double w24_ps = 0.0;
    bool valid = false;
};

struct OffsetSeries {
    double block_seconds = 10.0;
    std::vector<OffsetBlock> blocks;

    std::size_t valid_count() const;
    std::vector<double> valid_t0() const;
    // t0 of the longest contiguous run of valid blocks (what tdev accepts)
    std::vector<double> longest_valid_run_t0() const;
    // t0 for stability analysis; throws AnalysisError when invalid blocks sit
    // inside the span (gaps must be split by the caller, not bridged)
    std::vector<double> contiguous_valid_t0() const;
};

// Per-block scatter model of the two-way offset:
//   sqrt( (w1/2.3548)^2/n1 + (w2/2.3548)^2/n2 ) / sqrt(2)
// with FWHM widths and per-block coincidence counts of the two one-way
// measurements.
double theoretical_sd(double w1_fwhm_ps, double n1, double w2_fwhm_ps, double n2);

// Shared per-block analysis: two fine histograms around the given centers,
// fits, and the assembled OffsetBlock.
OffsetBlock process_block(std::span<const std::int64_t> d1, std::span<const std::int64_t> d3,
                          std::span<const std::int64_t> d2, std::span<const std::int64_t> d4,
                          double center13_ps, double center24_ps, double epoch_s,
                          const AnalysisSpec& analysis);

// Analysis of four externally supplied full-run streams: acquisition on the
// leading block, then per-block histogram/fit with center tracking. Blocks
// whose fits fail are marked invalid and skipped by downstream statistics.
// Throws AnalysisError when fewer than 2 blocks are valid.
OffsetSeries block_offsets(const TagStream& d1, const TagStream& d2, const TagStream& d3,
                           const TagStream& d4, const ScenarioConfig& cfg);

// Fast statistical surrogate for long runs: per block, Poisson event counts
// around the configured means and Gaussian-fit centers drawn around the truth
// plus the slow non-reciprocal processes (PMD, source-wavelength wander).
// Symmetric drift cancels exactly and is excluded by construction.
OffsetSeries block_mode_series(const ScenarioConfig& cfg, std::size_t n_blocks,
                               std::uint64_t seed);

} // namespace qtwtt
