#include "qtwtt/presets.hpp"

#include "qtwtt/errors.hpp"

namespace qtwtt {

namespace {

// Detector timing jitters derive from the measured no-link pair widths
// (116 and 86 ps FWHM): per-detector RMS = pair RMS / sqrt(2), giving
// 34.8 ps on the D1/D3 path and 25.8 ps on the D2/D4 path. The event-mode
// pair rates and losses are desk-scale: they reproduce the per-block
// coincidence statistics and fitted widths of the reference system, not its
// absolute singles rates.
const char* kCommonDetectors = R"(
det.d1.efficiency = 0.8
det.d1.jitter_rms_ps = 34.8
det.d1.dark_cps = 60
det.d1.dead_time_ps = 1.67e6
det.d1.jitter_rate_slope_ps_per_mcps = 0
det.d1.filter_center_nm = 1560
det.d1.filter_fwhm_nm = 6.5
det.d2.jitter_rms_ps = 25.8
det.d2.dark_cps = 60
det.d2.dead_time_ps = 1.67e6
det.d2.jitter_rate_slope_ps_per_mcps = 0
det.d2.filter_center_nm = 1560
det.d2.filter_fwhm_nm = 6.5
det.d3.efficiency = 0.8
det.d3.jitter_rms_ps = 34.8
det.d3.dark_cps = 60
det.d3.dead_time_ps = 1.67e6
det.d3.jitter_rate_slope_ps_per_mcps = 0
det.d3.filter_center_nm = 1560
det.d3.filter_fwhm_nm = 6.5
det.d4.efficiency = 0.8
det.d4.jitter_rms_ps = 25.8
det.d4.dark_cps = 60
det.d4.dead_time_ps = 1.67e6
det.d4.jitter_rate_slope_ps_per_mcps = 0
det.d4.filter_center_nm = 1560
det.d4.filter_fwhm_nm = 6.5
)";

const char* kCommonSource = R"(
source.lambda_center_nm = 1561
source.signal_fwhm_nm = 1.84
source.correlation_jitter_ps = 0
block_seconds = 10
mode = event
master_seed = 1
run.blocks = 100
)";

std::vector<Preset> build_presets()
{
    std::vector<Preset> out;

    // --- no fiber link: short-cut signal path with an attenuator, module
    // removed; pure detector-jitter widths.
    {
        Preset p;
        p.name = "no_fiber";
        p.description = "back-to-back calibration: attenuated short-cut signal path, "
                        "no fiber link, compensation module removed";
        p.scenario_text = std::string(kCommonSource) + kCommonDetectors + R"(
source.pair_rate_hz = 300000
source.pump_equiv_fwhm_nm = 0
link.length_km = 0
link.loss_db = 25.69
link.uncompensated_length_km = 0
link.lambda_ref_nm = 1561
link.drift.kind = none
link.fading.kind = none
dcfm.equivalent_length_km = 0
dcfm.base_length_km = 0.001
dcfm.loss_db = 6
dcfm.lambda_ref_nm = 1561
det.d2.efficiency = 0.752
noise.base_floor_cps_per_half_nm = 0
noise.edfa_floor_cps_per_half_nm = 0
noise.edfa_on = false
block.n13_mean = 846
block.n24_mean = 796
block.w13_ps = 116
block.w24_ps = 86
)";
        p.expected = {
            {"coincidence width, path 1 (reference)", 116, "ps"},
            {"coincidence width, path 2 (reference)", 86, "ps"},
            {"offset SD per 10 s block (reference theory)", 1.5, "ps"},
            {"offset SD per 10 s block (reference measurement)", 1.6, "ps"},
        };
        out.push_back(std::move(p));
    }

    // --- 103 km coiled spool in the lab: full dispersion physics, gentle
    // polarization fading, no urban background.
    {
        Preset p;
        p.name = "coiled103";
        p.description = "103 km coiled fiber spool, compensation module in the idler arms";
        p.scenario_text = std::string(kCommonSource) + kCommonDetectors + R"(
source.pair_rate_hz = 300000
source.pump_equiv_fwhm_nm = 0.0437
link.length_km = 103
link.loss_db = 24.38
link.uncompensated_length_km = 4.5
link.lambda_ref_nm = 1561
link.drift.kind = none
link.fading.kind = bounded_walk
link.fading.mean = 0.925
link.fading.min = 0.85
link.fading.max = 1.0
link.fading.correlation_time_s = 600
dcfm.equivalent_length_km = 98.5
dcfm.base_length_km = 12
dcfm.loss_db = 6
dcfm.lambda_ref_nm = 1561
det.d2.efficiency = 0.736
noise.base_floor_cps_per_half_nm = 0
noise.edfa_floor_cps_per_half_nm = 0
noise.edfa_on = false
block.n13_mean = 1058
block.n24_mean = 974
block.w13_ps = 198
block.w24_ps = 182
)";
        p.expected = {
            {"coincidence width, path 1 (reference)", 198, "ps"},
            {"coincidence width, path 2 (reference)", 182, "ps"},
            {"offset SD per 10 s block (reference theory)", 2.5, "ps"},
            {"offset SD per 10 s block (reference measurement)", 2.9, "ps"},
        };
        out.push_back(std::move(p));
    }

    // --- 103 km installed urban loop: diurnal drift, strong polarization
    // fading, amplifier and crosstalk background from neighboring fibers.
    {
        Preset p;
        p.name = "urban103";
        p.description = "103 km installed urban fiber loop with diurnal drift, "
                        "polarization fading and neighbor-fiber background";
        p.scenario_text = std::string(kCommonSource) + kCommonDetectors + R"(
source.pair_rate_hz = 600000
source.pump_equiv_fwhm_nm = 0.0437
source.lambda_wander_sd_pm = 0.57
source.lambda_wander_tau_s = 43200
link.length_km = 103
link.loss_db = 27.9
link.uncompensated_length_km = 4.1
link.lambda_ref_nm = 1561
link.drift.kind = sinusoid
link.drift.peak_to_peak_ps = 12900
link.drift.period_s = 86400
link.fading.kind = bounded_walk
link.fading.mean = 0.70
link.fading.min = 0.42
link.fading.max = 0.98
link.fading.correlation_time_s = 100
dcfm.equivalent_length_km = 98.9
dcfm.base_length_km = 12
dcfm.loss_db = 6
dcfm.lambda_ref_nm = 1561
det.d2.efficiency = 0.755
noise.base_floor_cps_per_half_nm = 115
noise.edfa_floor_cps_per_half_nm = 692
noise.edfa_on = true
noise.edfa_distance_km = 0.2
noise.atten_db_per_km = 0.2
noise.peak1.center_nm = 1530
noise.peak1.fwhm_nm = 4.0
noise.peak1.amplitude_cps = 6000
noise.peak1.edfa_sourced = true
noise.peak2.center_nm = 1544
noise.peak2.fwhm_nm = 1.5
noise.peak2.amplitude_cps = 2500
noise.peak2.edfa_sourced = false
noise.peak3.center_nm = 1551
noise.peak3.fwhm_nm = 1.5
noise.peak3.amplitude_cps = 3000
noise.peak3.edfa_sourced = false
block.n13_mean = 436
block.n24_mean = 412
block.w13_ps = 188
block.w24_ps = 175
)";
        p.expected = {
            {"coincidence width, path 1 (reference)", 188, "ps"},
            {"coincidence width, path 2 (reference)", 175, "ps"},
            {"coincidences per block, path 1 (reference)", 436, "events"},
            {"offset SD (reference theory)", 3.7, "ps"},
            {"offset SD (reference measurement)", 4.0, "ps"},
            {"stability at 10 s (reference)", 3.67, "ps"},
            {"stability minimum near 4e4 s (reference)", 0.28, "ps"},
            {"one-way drift peak-to-peak (reference)", 12900, "ps"},
            {"background floor per 0.5 nm window (reference)", 800, "cps"},
        };
        out.push_back(std::move(p));
    }

    return out;
}

} // namespace

const std::vector<Preset>& presets()
{
    static const std::vector<Preset> p = build_presets();
    return p;
}

const Preset* find_preset(const std::string& name)
{
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

ScenarioConfig preset_scenario(const std::string& name)
{
    const Preset* p = find_preset(name);
    if (!p) throw ConfigError("unknown preset: " + name);
    return parse_scenario_text(p->scenario_text);
}

} // namespace qtwtt
