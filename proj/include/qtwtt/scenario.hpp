#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qtwtt/errors.hpp"
#include "qtwtt/time_tag.hpp"

namespace qtwtt {

struct SourceSpec {
    double pair_rate_hz = 3.0e5;        // total pairs/s before the 50/50 split
    double lambda_center_nm = 1561.0;
    double signal_fwhm_nm = 1.84;
    double pump_equiv_fwhm_nm = 0.0;    // pump spectral width mapped into the signal band
    double correlation_jitter_ps = 0.0; // intrinsic biphoton correlation width (RMS)
    double lambda_wander_sd_pm = 0.0;   // slow inter-source center-wavelength wander (OU)
    double lambda_wander_tau_s = 28800.0;
};

enum class DriftKind { None, Sinusoid, SinusoidPlusRandomWalk };

struct DriftProfile {
    DriftKind kind = DriftKind::None;
    double peak_to_peak_ps = 12900.0;
    double period_s = 86400.0;
    double randomwalk_ps_per_sqrt_s = 0.0;
};

enum class FadingKind { None, BoundedWalk };

// Bounded random walk on the detection-efficiency multiplier; stands in for
// polarization wander against the SNSPD polarization sensitivity.
struct FadingProfile {
    FadingKind kind = FadingKind::None;
    double mean = 1.0;
    double min = 1.0;
    double max = 1.0;
    double correlation_time_s = 300.0;
};

struct FiberLinkSpec {
    double length_km = 0.0;
    double loss_db = 0.0; // one-way optical loss on the signal path (excl. detector)
    double dispersion_ps_per_nm_km = 17.0;
    double lambda_ref_nm = 1561.0;
    double uncompensated_length_km = 0.0; // residual mismatch vs the DCFM
    double pmd_coeff_ps_per_sqrt_km = 0.05;
    double pmd_correlation_s = 28800.0;
    double sagnac_coeff_ps_per_km = 0.05;
    DriftProfile drift;
    FadingProfile fading;
};

struct DcfmSpec {
    double equivalent_length_km = 100.0; // compensated fiber length (opposite-sign GDD)
    double base_length_km = 12.0;        // physical module length, sets the group delay
    double loss_db = 6.0;
    double dispersion_ps_per_nm_km = 17.0;
    double lambda_ref_nm = 1561.0;
};

struct DetectorSpec {
    double efficiency = 0.8;
    double jitter_rms_ps = 50.0;
    double dark_cps = 60.0;
    double dead_time_ps = 1.67e6; // non-paralyzable; ~600 kcps saturation
    double jitter_rate_slope_ps_per_mcps = 0.0;
    double filter_center_nm = 1560.0;
    double filter_fwhm_nm = 6.5;
};

struct NoisePeak {
    double center_nm = 0.0;
    double fwhm_nm = 1.0;
    double amplitude_cps = 0.0; // expected counts in a 0.5 nm window at the peak center
    bool edfa_sourced = false;
};

struct NoiseSpec {
    double base_floor_cps_per_half_nm = 115.0; // present with EDFAs off
    double edfa_floor_cps_per_half_nm = 0.0;   // added when edfa_on, at the EDFA itself
    bool edfa_on = false;
    double edfa_distance_km = 0.2; // fiber between the EDFA group and the detector
    double atten_db_per_km = 0.2;
    std::vector<NoisePeak> peaks;
};

enum class RunMode { Event, Block };

// Block-mode statistical surrogate parameters (per-block histogram outcomes).
struct BlockModelSpec {
    double n13_mean = 0.0;
    double n24_mean = 0.0;
    double w13_ps = 0.0;
    double w24_ps = 0.0;
};

struct AnalysisSpec {
    double fine_span_ps = 10000.0;
    double fine_bin_ps = 10.0;
    double coarse_span_ps = 2.0e9; // search +-span for acquisition
    double coarse_bin_ps = 1000.0;
};

struct SurveySpec {
    double start_nm = 1525.0;
    double stop_nm = 1600.0;
    double step_nm = 0.5;
    double window_fwhm_nm = 0.5;
    double integration_s = 10.0;
};

struct ScenarioConfig {
    SourceSpec source;
    FiberLinkSpec link;
    DcfmSpec dcfm;
    std::array<DetectorSpec, 4> detectors; // index 0..3 = D1..D4
    NoiseSpec noise;
    double clock_offset_ps = 0.0; // positive: site B's clock reads late
    double block_seconds = 10.0;
    RunMode mode = RunMode::Event;
    std::uint64_t master_seed = 1;
    std::uint64_t run_blocks = 100;
    std::uint64_t run_max_events = 4000000000ULL;
    AnalysisSpec analysis;
    BlockModelSpec block_model;
    SurveySpec survey;

    const DetectorSpec& detector(Channel c) const
    {
        return detectors[static_cast<std::size_t>(c) - 1];
    }
    DetectorSpec& detector(Channel c)
    {
        return detectors[static_cast<std::size_t>(c) - 1];
    }
};

// Flat key/value text format with dotted section keys, e.g.
//   link.length_km = 103
// '#' starts a comment. Unknown keys are hard errors.
ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

// Applies one "key=value" override (the CLI --set form).
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

// Full echo of every key in parse order; parse_scenario_text(scenario_to_text(c))
// reproduces c. Used by the run manifest.
std::string scenario_to_text(const ScenarioConfig& cfg);

// Cross-field invariant checks; throws ConfigError.
void validate_scenario(const ScenarioConfig& cfg);

} // namespace qtwtt
