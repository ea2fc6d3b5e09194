#include "qtwtt/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qtwtt/engine.hpp"
#include "qtwtt/errors.hpp"
#include "qtwtt/presets.hpp"
#include "qtwtt/tag_io.hpp"

namespace qtwtt {

namespace {

std::ofstream open_out(const std::filesystem::path& dir, const char* name)
{
    std::ofstream f(dir / name, std::ios::binary); // binary: byte-stable output
    if (!f) throw SimulationError(std::string("cannot write output file: ") + name);
    return f;
}

void write_offsets(std::ostream& out, const OffsetSeries& s)
{
    out << "# two-way offset series; one row per accumulation block\n";
    out << "# epoch_s d13_ps d24_ps t0_ps n13_events n24_events w13_ps w24_ps valid\n";
    char buf[256];
    for (const auto& b : s.blocks) {
        std::snprintf(buf, sizeof buf, "%.1f %.4f %.4f %.4f %.1f %.1f %.2f %.2f %d\n",
                      b.epoch_s, b.d13_ps, b.d24_ps, b.t0_ps, b.n13, b.n24, b.w13_ps,
                      b.w24_ps, b.valid ? 1 : 0);
        out << buf;
    }
}

void write_tdev(std::ostream& out, const TdevCurve& c)
{
    out << "# time deviation of the two-way offset series\n";
    out << "# tau_s tdev_ps ci68_low_ps ci68_high_ps n_samples\n";
    char buf[160];
    for (const auto& p : c.points) {
        std::snprintf(buf, sizeof buf, "%.1f %.6f %.6f %.6f %zu\n", p.tau_s, p.tdev_ps,
                      p.ci68_low_ps, p.ci68_high_ps, p.n_samples);
        out << buf;
    }
}

void write_survey(std::ostream& out, const std::vector<SurveyPoint>& pts)
{
    out << "# background scan: window center (nm) vs detected rate (cps)\n";
    out << "# center_nm cps\n";
    char buf[64];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.2f %.2f\n", p.center_nm, p.cps);
        out << buf;
    }
}

void write_summary(std::ostream& out, const ScenarioConfig& cfg, const RunOptions& opts,
                   const RunArtifacts& art)
{
    char buf[256];
    out << "# run summary\n";
    out << "mode = " << (cfg.mode == RunMode::Event ? "event" : "block") << "\n";
    out << "blocks_total = " << art.series.blocks.size() << "\n";
    out << "blocks_valid = " << art.series.valid_count() << "\n";
    const auto t0 = art.series.valid_t0();
    if (t0.size() >= 2) {
        double mean = 0;
        for (double v : t0) mean += v;
        mean /= static_cast<double>(t0.size());
        std::snprintf(buf, sizeof buf, "t0_mean_ps = %.4f\n", mean);
        out << buf;
        std::snprintf(buf, sizeof buf, "t0_sd_ps = %.4f\n", sample_sd(t0));
        out << buf;
    }
    double n13 = 0, n24 = 0, w13 = 0, w24 = 0;
    std::size_t n = 0;
    for (const auto& b : art.series.blocks) {
        if (!b.valid) continue;
        n13 += b.n13;
        n24 += b.n24;
        w13 += b.w13_ps;
        w24 += b.w24_ps;
        ++n;
    }
    if (n > 0) {
        const double dn = static_cast<double>(n);
        std::snprintf(buf, sizeof buf, "n13_mean_events = %.2f\n", n13 / dn);
        out << buf;
        std::snprintf(buf, sizeof buf, "n24_mean_events = %.2f\n", n24 / dn);
        out << buf;
        std::snprintf(buf, sizeof buf, "w13_mean_ps = %.2f\n", w13 / dn);
        out << buf;
        std::snprintf(buf, sizeof buf, "w24_mean_ps = %.2f\n", w24 / dn);
        out << buf;
    }
    if (!art.tdev.points.empty()) {
        std::snprintf(buf, sizeof buf, "tdev_at_tau0_ps = %.4f\n", art.tdev.points.front().tdev_ps);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "budget_combined_ps = %.4f\n", art.budget.combined_ps());
    out << buf;

    if (!opts.preset_name.empty()) {
        if (const Preset* p = find_preset(opts.preset_name)) {
            out << "# reference values this preset is calibrated against\n";
            for (const auto& e : p->expected) {
                std::snprintf(buf, sizeof buf, "expected. %s = %g %s\n", e.label.c_str(),
                              e.value, e.units.c_str());
                out << buf;
            }
        }
    }
}

} // namespace

const char* version_string() { return "qtwtt 0.1.0"; }

RunArtifacts run_scenario(const ScenarioConfig& cfg, const RunOptions& opts)
{
    namespace fs = std::filesystem;
    const fs::path dir = opts.out_dir.empty() ? fs::path(".") : fs::path(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw SimulationError("cannot create output directory: " + dir.string());

    // manifest first: every run is reproducible from it alone
    {
        auto f = open_out(dir, "manifest.txt");
        f << "# " << version_string() << " run manifest\n";
        f << "# re-run with: qtwtt --scenario manifest.txt --out <dir>\n";
        if (!opts.preset_name.empty()) f << "# preset: " << opts.preset_name << "\n";
        f << scenario_to_text(cfg);
    }

    RunArtifacts art;

    if (opts.survey_only) {
        std::vector<double> centers;
        for (double c = cfg.survey.start_nm; c <= cfg.survey.stop_nm + 1e-9;
             c += cfg.survey.step_nm)
            centers.push_back(c);
        const auto pts = noise_survey(cfg.noise, centers, cfg.survey.window_fwhm_nm,
                                      cfg.survey.integration_s, cfg.master_seed);
        auto f = open_out(dir, "survey.txt");
        write_survey(f, pts);
        return art;
    }

    const std::size_t n_blocks = cfg.run_blocks;
    if (cfg.mode == RunMode::Event) {
        EventRunResult run = run_event_mode(cfg, n_blocks, opts.threads, opts.dump_tags);
        art.series = std::move(run.series);
        if (opts.dump_tags) {
            auto fb = open_out(dir, "tags.bin");
            write_tags_binary(fb, run.tags);
            auto fs_ = open_out(dir, "tags.bin.hdr");
            fs_ << tags_sidecar_text(run.tags);
            auto ft = open_out(dir, "tags.txt");
            write_tags_text(ft, run.tags);
        }
        if (opts.dump_histograms) {
            // block 0 is cheap to regenerate deterministically
            const SlowTables slow = build_slow_tables(cfg, 1);
            BlockTags blk0 = simulate_block(cfg, slow, 0);
            const auto& a = cfg.analysis;
            const double c13 = coarse_offset(blk0.streams[0], blk0.streams[2],
                                             a.coarse_span_ps, a.coarse_bin_ps);
            const double c24 = coarse_offset(blk0.streams[1], blk0.streams[3],
                                             a.coarse_span_ps, a.coarse_bin_ps);
            const auto h13 = fine_histogram(blk0.streams[0].t_ps, blk0.streams[2].t_ps, c13,
                                            a.fine_span_ps, a.fine_bin_ps);
            const auto h24 = fine_histogram(blk0.streams[1].t_ps, blk0.streams[3].t_ps, c24,
                                            a.fine_span_ps, a.fine_bin_ps);
            auto f1 = open_out(dir, "hist_block0_d13.txt");
            write_histogram(f1, h13);
            auto f2 = open_out(dir, "hist_block0_d24.txt");
            write_histogram(f2, h24);
        }
    } else {
        art.series = block_mode_series(cfg, n_blocks, cfg.master_seed);
    }

    {
        auto f = open_out(dir, "offsets.txt");
        write_offsets(f, art.series);
    }

    const auto t0 = art.series.longest_valid_run_t0();
    if (t0.size() >= 4) {
        art.tdev = tdev(t0, cfg.block_seconds, default_m_ladder(t0.size()));
        auto f = open_out(dir, "tdev.txt");
        write_tdev(f, art.tdev);
    }

    art.budget = opts.budget_path.empty() ? parse_budget_text(default_budget_text())
                                          : load_budget_file(opts.budget_path);
    {
        auto f = open_out(dir, "budget.txt");
        write_budget_report(f, art.budget);
        auto fk = open_out(dir, "budget_kv.txt");
        write_budget_kv(fk, art.budget);
    }
    {
        auto f = open_out(dir, "summary.txt");
        write_summary(f, cfg, opts, art);
    }
    return art;
}

} // namespace qtwtt
