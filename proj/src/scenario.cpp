#include "qtwtt/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace qtwtt {

namespace {

constexpr std::size_t kMaxNoisePeaks = 8;

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t idx = 0;
        const double d = std::stod(v, &idx);
        if (idx != v.size()) throw std::invalid_argument(v);
        if (!std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v)
{
    try {
        std::size_t idx = 0;
        const unsigned long long u = std::stoull(v, &idx);
        if (idx != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean value for " + key + ": '" + v + "'");
}

std::string fmt_double(double d)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

std::string fmt_u64(std::uint64_t u)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(u));
    return buf;
}

struct KeyEntry {
    std::string key;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
    std::function<bool(const ScenarioConfig&)> present; // null = always
};

void add_double(std::vector<KeyEntry>& r, std::string key, double ScenarioConfig::* p)
{
    r.push_back({key,
                 [key, p](ScenarioConfig& c, const std::string& v) { c.*p = parse_double(key, v); },
                 [p](const ScenarioConfig& c) { return fmt_double(c.*p); },
                 nullptr});
}

template <typename Sub>
void add_double(std::vector<KeyEntry>& r, std::string key, Sub ScenarioConfig::* sub,
                double Sub::* p)
{
    r.push_back({key,
                 [key, sub, p](ScenarioConfig& c, const std::string& v) { c.*sub.*p = parse_double(key, v); },
                 [sub, p](const ScenarioConfig& c) { return fmt_double(c.*sub.*p); },
                 nullptr});
}

std::vector<KeyEntry> build_registry()
{
    std::vector<KeyEntry> r;

    add_double(r, "source.pair_rate_hz", &ScenarioConfig::source, &SourceSpec::pair_rate_hz);
    add_double(r, "source.lambda_center_nm", &ScenarioConfig::source, &SourceSpec::lambda_center_nm);
    add_double(r, "source.signal_fwhm_nm", &ScenarioConfig::source, &SourceSpec::signal_fwhm_nm);
    add_double(r, "source.pump_equiv_fwhm_nm", &ScenarioConfig::source, &SourceSpec::pump_equiv_fwhm_nm);
    add_double(r, "source.correlation_jitter_ps", &ScenarioConfig::source, &SourceSpec::correlation_jitter_ps);
    add_double(r, "source.lambda_wander_sd_pm", &ScenarioConfig::source, &SourceSpec::lambda_wander_sd_pm);
    add_double(r, "source.lambda_wander_tau_s", &ScenarioConfig::source, &SourceSpec::lambda_wander_tau_s);

    add_double(r, "link.length_km", &ScenarioConfig::link, &FiberLinkSpec::length_km);
    add_double(r, "link.loss_db", &ScenarioConfig::link, &FiberLinkSpec::loss_db);
    add_double(r, "link.dispersion_ps_per_nm_km", &ScenarioConfig::link, &FiberLinkSpec::dispersion_ps_per_nm_km);
    add_double(r, "link.lambda_ref_nm", &ScenarioConfig::link, &FiberLinkSpec::lambda_ref_nm);
    add_double(r, "link.uncompensated_length_km", &ScenarioConfig::link, &FiberLinkSpec::uncompensated_length_km);
    add_double(r, "link.pmd_coeff_ps_per_sqrt_km", &ScenarioConfig::link, &FiberLinkSpec::pmd_coeff_ps_per_sqrt_km);
    add_double(r, "link.pmd_correlation_s", &ScenarioConfig::link, &FiberLinkSpec::pmd_correlation_s);
    add_double(r, "link.sagnac_coeff_ps_per_km", &ScenarioConfig::link, &FiberLinkSpec::sagnac_coeff_ps_per_km);

    r.push_back({"link.drift.kind",
                 [](ScenarioConfig& c, const std::string& v) {
                     if (v == "none") c.link.drift.kind = DriftKind::None;
                     else if (v == "sinusoid") c.link.drift.kind = DriftKind::Sinusoid;
                     else if (v == "sinusoid_plus_randomwalk") c.link.drift.kind = DriftKind::SinusoidPlusRandomWalk;
                     else throw ConfigError("bad link.drift.kind: '" + v + "'");
                 },
                 [](const ScenarioConfig& c) -> std::string {
                     switch (c.link.drift.kind) {
                     case DriftKind::None: return "none";
                     case DriftKind::Sinusoid: return "sinusoid";
                     case DriftKind::SinusoidPlusRandomWalk: return "sinusoid_plus_randomwalk";
                     }
                     return "none";
                 },
                 nullptr});
    r.push_back({"link.drift.peak_to_peak_ps",
                 [](ScenarioConfig& c, const std::string& v) { c.link.drift.peak_to_peak_ps = parse_double("link.drift.peak_to_peak_ps", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.drift.peak_to_peak_ps); },
                 nullptr});
    r.push_back({"link.drift.period_s",
                 [](ScenarioConfig& c, const std::string& v) { c.link.drift.period_s = parse_double("link.drift.period_s", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.drift.period_s); },
                 nullptr});
    r.push_back({"link.drift.randomwalk_ps_per_sqrt_s",
                 [](ScenarioConfig& c, const std::string& v) { c.link.drift.randomwalk_ps_per_sqrt_s = parse_double("link.drift.randomwalk_ps_per_sqrt_s", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.drift.randomwalk_ps_per_sqrt_s); },
                 nullptr});

    r.push_back({"link.fading.kind",
                 [](ScenarioConfig& c, const std::string& v) {
                     if (v == "none") c.link.fading.kind = FadingKind::None;
                     else if (v == "bounded_walk") c.link.fading.kind = FadingKind::BoundedWalk;
                     else throw ConfigError("bad link.fading.kind: '" + v + "'");
                 },
                 [](const ScenarioConfig& c) -> std::string {
                     return c.link.fading.kind == FadingKind::BoundedWalk ? "bounded_walk" : "none";
                 },
                 nullptr});
    r.push_back({"link.fading.mean",
                 [](ScenarioConfig& c, const std::string& v) { c.link.fading.mean = parse_double("link.fading.mean", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.fading.mean); },
                 nullptr});
    r.push_back({"link.fading.min",
                 [](ScenarioConfig& c, const std::string& v) { c.link.fading.min = parse_double("link.fading.min", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.fading.min); },
                 nullptr});
    r.push_back({"link.fading.max",
                 [](ScenarioConfig& c, const std::string& v) { c.link.fading.max = parse_double("link.fading.max", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.fading.max); },
                 nullptr});
    r.push_back({"link.fading.correlation_time_s",
                 [](ScenarioConfig& c, const std::string& v) { c.link.fading.correlation_time_s = parse_double("link.fading.correlation_time_s", v); },
                 [](const ScenarioConfig& c) { return fmt_double(c.link.fading.correlation_time_s); },
                 nullptr});

    add_double(r, "dcfm.equivalent_length_km", &ScenarioConfig::dcfm, &DcfmSpec::equivalent_length_km);
    add_double(r, "dcfm.base_length_km", &ScenarioConfig::dcfm, &DcfmSpec::base_length_km);
    add_double(r, "dcfm.loss_db", &ScenarioConfig::dcfm, &DcfmSpec::loss_db);
    add_double(r, "dcfm.dispersion_ps_per_nm_km", &ScenarioConfig::dcfm, &DcfmSpec::dispersion_ps_per_nm_km);
    add_double(r, "dcfm.lambda_ref_nm", &ScenarioConfig::dcfm, &DcfmSpec::lambda_ref_nm);

    static const char* det_names[4] = {"d1", "d2", "d3", "d4"};
    struct DetField {
        const char* name;
        double DetectorSpec::* p;
    };
    static const DetField det_fields[] = {
        {"efficiency", &DetectorSpec::efficiency},
        {"jitter_rms_ps", &DetectorSpec::jitter_rms_ps},
        {"dark_cps", &DetectorSpec::dark_cps},
        {"dead_time_ps", &DetectorSpec::dead_time_ps},
        {"jitter_rate_slope_ps_per_mcps", &DetectorSpec::jitter_rate_slope_ps_per_mcps},
        {"filter_center_nm", &DetectorSpec::filter_center_nm},
        {"filter_fwhm_nm", &DetectorSpec::filter_fwhm_nm},
    };
    for (std::size_t d = 0; d < 4; ++d) {
        for (const auto& f : det_fields) {
            std::string key = std::string("det.") + det_names[d] + "." + f.name;
            auto p = f.p;
            r.push_back({key,
                         [key, d, p](ScenarioConfig& c, const std::string& v) { c.detectors[d].*p = parse_double(key, v); },
                         [d, p](const ScenarioConfig& c) { return fmt_double(c.detectors[d].*p); },
                         nullptr});
        }
    }

    add_double(r, "noise.base_floor_cps_per_half_nm", &ScenarioConfig::noise, &NoiseSpec::base_floor_cps_per_half_nm);
    add_double(r, "noise.edfa_floor_cps_per_half_nm", &ScenarioConfig::noise, &NoiseSpec::edfa_floor_cps_per_half_nm);
    r.push_back({"noise.edfa_on",
                 [](ScenarioConfig& c, const std::string& v) { c.noise.edfa_on = parse_bool("noise.edfa_on", v); },
                 [](const ScenarioConfig& c) -> std::string { return c.noise.edfa_on ? "true" : "false"; },
                 nullptr});
    add_double(r, "noise.edfa_distance_km", &ScenarioConfig::noise, &NoiseSpec::edfa_distance_km);
    add_double(r, "noise.atten_db_per_km", &ScenarioConfig::noise, &NoiseSpec::atten_db_per_km);

    for (std::size_t i = 0; i < kMaxNoisePeaks; ++i) {
        const std::string base = "noise.peak" + std::to_string(i + 1) + ".";
        auto ensure = [i](ScenarioConfig& c) -> NoisePeak& {
            if (c.noise.peaks.size() <= i) c.noise.peaks.resize(i + 1);
            return c.noise.peaks[i];
        };
        auto present = [i](const ScenarioConfig& c) { return c.noise.peaks.size() > i; };
        r.push_back({base + "center_nm",
                     [ensure, base](ScenarioConfig& c, const std::string& v) { ensure(c).center_nm = parse_double(base + "center_nm", v); },
                     [i](const ScenarioConfig& c) { return fmt_double(c.noise.peaks[i].center_nm); },
                     present});
        r.push_back({base + "fwhm_nm",
                     [ensure, base](ScenarioConfig& c, const std::string& v) { ensure(c).fwhm_nm = parse_double(base + "fwhm_nm", v); },
                     [i](const ScenarioConfig& c) { return fmt_double(c.noise.peaks[i].fwhm_nm); },
                     present});
        r.push_back({base + "amplitude_cps",
                     [ensure, base](ScenarioConfig& c, const std::string& v) { ensure(c).amplitude_cps = parse_double(base + "amplitude_cps", v); },
                     [i](const ScenarioConfig& c) { return fmt_double(c.noise.peaks[i].amplitude_cps); },
                     present});
        r.push_back({base + "edfa_sourced",
                     [ensure, base](ScenarioConfig& c, const std::string& v) { ensure(c).edfa_sourced = parse_bool(base + "edfa_sourced", v); },
                     [i](const ScenarioConfig& c) -> std::string { return c.noise.peaks[i].edfa_sourced ? "true" : "false"; },
                     present});
    }

    add_double(r, "clock_offset_ps", &ScenarioConfig::clock_offset_ps);
    add_double(r, "block_seconds", &ScenarioConfig::block_seconds);
    r.push_back({"mode",
                 [](ScenarioConfig& c, const std::string& v) {
                     if (v == "event") c.mode = RunMode::Event;
                     else if (v == "block") c.mode = RunMode::Block;
                     else throw ConfigError("bad mode: '" + v + "' (want event|block)");
                 },
                 [](const ScenarioConfig& c) -> std::string { return c.mode == RunMode::Event ? "event" : "block"; },
                 nullptr});
    r.push_back({"master_seed",
                 [](ScenarioConfig& c, const std::string& v) { c.master_seed = parse_u64("master_seed", v); },
                 [](const ScenarioConfig& c) { return fmt_u64(c.master_seed); },
                 nullptr});
    r.push_back({"run.blocks",
                 [](ScenarioConfig& c, const std::string& v) { c.run_blocks = parse_u64("run.blocks", v); },
                 [](const ScenarioConfig& c) { return fmt_u64(c.run_blocks); },
                 nullptr});
    r.push_back({"run.max_events",
                 [](ScenarioConfig& c, const std::string& v) { c.run_max_events = parse_u64("run.max_events", v); },
                 [](const ScenarioConfig& c) { return fmt_u64(c.run_max_events); },
                 nullptr});

    add_double(r, "analysis.fine_span_ps", &ScenarioConfig::analysis, &AnalysisSpec::fine_span_ps);
    add_double(r, "analysis.fine_bin_ps", &ScenarioConfig::analysis, &AnalysisSpec::fine_bin_ps);
    add_double(r, "analysis.coarse_span_ps", &ScenarioConfig::analysis, &AnalysisSpec::coarse_span_ps);
    add_double(r, "analysis.coarse_bin_ps", &ScenarioConfig::analysis, &AnalysisSpec::coarse_bin_ps);

    add_double(r, "block.n13_mean", &ScenarioConfig::block_model, &BlockModelSpec::n13_mean);
    add_double(r, "block.n24_mean", &ScenarioConfig::block_model, &BlockModelSpec::n24_mean);
    add_double(r, "block.w13_ps", &ScenarioConfig::block_model, &BlockModelSpec::w13_ps);
    add_double(r, "block.w24_ps", &ScenarioConfig::block_model, &BlockModelSpec::w24_ps);

    add_double(r, "survey.start_nm", &ScenarioConfig::survey, &SurveySpec::start_nm);
    add_double(r, "survey.stop_nm", &ScenarioConfig::survey, &SurveySpec::stop_nm);
    add_double(r, "survey.step_nm", &ScenarioConfig::survey, &SurveySpec::step_nm);
    add_double(r, "survey.window_fwhm_nm", &ScenarioConfig::survey, &SurveySpec::window_fwhm_nm);
    add_double(r, "survey.integration_s", &ScenarioConfig::survey, &SurveySpec::integration_s);

    return r;
}

const std::vector<KeyEntry>& registry()
{
    static const std::vector<KeyEntry> r = build_registry();
    return r;
}

const KeyEntry* find_key(const std::string& key)
{
    for (const auto& e : registry())
        if (e.key == key) return &e;
    return nullptr;
}

void apply_assignment(ScenarioConfig& cfg, const std::string& key, const std::string& value,
                      int line_no)
{
    const KeyEntry* e = find_key(key);
    if (!e) {
        std::string where = line_no > 0 ? " (line " + std::to_string(line_no) + ")" : "";
        throw ConfigError("unknown scenario key '" + key + "'" + where);
    }
    e->set(cfg, value);
}

} // namespace

ScenarioConfig parse_scenario_text(const std::string& text)
{
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        apply_assignment(cfg, key, value, line_no);
    }
    validate_scenario(cfg);
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scenario_text(ss.str());
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value: '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    apply_assignment(cfg, key, value, 0);
}

std::string scenario_to_text(const ScenarioConfig& cfg)
{
    std::ostringstream out;
    for (const auto& e : registry()) {
        if (e.present && !e.present(cfg)) continue;
        out << e.key << " = " << e.get(cfg) << "\n";
    }
    return out.str();
}

void validate_scenario(const ScenarioConfig& cfg)
{
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(cfg.block_seconds > 0, "block_seconds must be > 0");
    require(cfg.source.pair_rate_hz >= 0, "source.pair_rate_hz must be >= 0");
    require(cfg.source.signal_fwhm_nm >= 0 && cfg.source.pump_equiv_fwhm_nm >= 0 &&
                cfg.source.correlation_jitter_ps >= 0,
            "source widths must be >= 0");
    require(cfg.link.length_km >= 0, "link.length_km must be >= 0");
    require(cfg.link.loss_db >= 0 && cfg.dcfm.loss_db >= 0, "losses must be >= 0 dB");
    require(cfg.link.uncompensated_length_km <= cfg.link.length_km,
            "link.uncompensated_length_km must not exceed link.length_km");
    require(cfg.link.drift.peak_to_peak_ps >= 0, "drift peak_to_peak_ps must be >= 0");
    require(cfg.link.drift.period_s > 0, "drift period_s must be > 0");
    const auto& f = cfg.link.fading;
    require(0.0 <= f.min && f.min <= f.mean && f.mean <= f.max && f.max <= 1.0,
            "fading requires 0 <= min <= mean <= max <= 1");
    for (const auto& d : cfg.detectors) {
        require(d.efficiency >= 0.0 && d.efficiency <= 1.0, "detector efficiency must be in [0,1]");
        require(d.jitter_rms_ps >= 0.0, "detector jitter must be >= 0");
        require(d.dark_cps >= 0.0 && d.dead_time_ps >= 0.0, "detector rates/dead time must be >= 0");
        require(d.filter_fwhm_nm > 0.0, "detector filter width must be > 0");
    }
    require(cfg.noise.base_floor_cps_per_half_nm >= 0 && cfg.noise.edfa_floor_cps_per_half_nm >= 0,
            "noise floors must be >= 0");
    for (const auto& p : cfg.noise.peaks)
        require(p.amplitude_cps >= 0 && p.fwhm_nm > 0, "noise peaks need amplitude >= 0, fwhm > 0");
    require(cfg.analysis.fine_bin_ps > 0 && cfg.analysis.fine_span_ps > 0,
            "analysis.fine_* must be > 0");
    require(cfg.analysis.fine_span_ps / cfg.analysis.fine_bin_ps <= 1e6,
            "fine histogram would exceed 1e6 bins");
    require(cfg.analysis.coarse_bin_ps >= 1000.0, "analysis.coarse_bin_ps must be >= 1 ns");
    require(cfg.survey.step_nm > 0 && cfg.survey.window_fwhm_nm > 0 && cfg.survey.integration_s > 0,
            "survey parameters must be > 0");
}

} // namespace qtwtt
