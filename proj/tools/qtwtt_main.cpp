// qtwtt: simulate and analyze photon-pair two-way time transfer scenarios.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtwtt/errors.hpp"
#include "qtwtt/presets.hpp"
#include "qtwtt/runner.hpp"
#include "qtwtt/scenario.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"photon-pair two-way time transfer simulator and analysis toolkit"};
    app.set_version_flag("--version", qtwtt::version_string());

    std::string scenario = "urban103";
    std::string out_dir = "out";
    std::string mode;
    std::string budget_path;
    std::vector<std::string> overrides;
    std::uint64_t blocks = 0;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool survey = false;
    bool dump_tags = false;
    bool dump_hists = false;
    unsigned threads = 1;

    app.add_option("--scenario", scenario,
                   "scenario file path or preset name (no_fiber, coiled103, urban103)");
    app.add_option("--mode", mode, "event | block (overrides the scenario)");
    app.add_option("--blocks", blocks, "number of accumulation blocks to run");
    app.add_option("--duration", duration_s, "run length in seconds (alternative to --blocks)");
    app.add_option("--seed", seed, "master seed (overrides the scenario)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", overrides, "override a scenario key, e.g. --set link.length_km=50")
        ->take_all();
    app.add_option("--budget", budget_path, "budget-spec file (default: built-in budget)");
    app.add_flag("--survey", survey, "run the background-noise wavelength scan instead");
    app.add_flag("--dump-tags", dump_tags, "event mode: dump the four tag streams");
    app.add_flag("--dump-histograms", dump_hists, "dump block 0's two fine histograms");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        qtwtt::ScenarioConfig cfg;
        qtwtt::RunOptions opts;
        if (qtwtt::find_preset(scenario) != nullptr) {
            cfg = qtwtt::preset_scenario(scenario);
            opts.preset_name = scenario;
        } else {
            cfg = qtwtt::load_scenario_file(scenario);
        }

        if (!mode.empty()) {
            if (mode == "event") cfg.mode = qtwtt::RunMode::Event;
            else if (mode == "block") cfg.mode = qtwtt::RunMode::Block;
            else throw qtwtt::ConfigError("bad --mode: " + mode);
        }
        if (blocks > 0 && duration_s > 0.0)
            throw qtwtt::ConfigError("--blocks and --duration are mutually exclusive");
        if (blocks > 0) cfg.run_blocks = blocks;
        if (duration_s > 0.0)
            cfg.run_blocks = static_cast<std::uint64_t>(duration_s / cfg.block_seconds);
        if (seed_set) cfg.master_seed = seed;
        for (const auto& o : overrides) qtwtt::apply_override(cfg, o);
        qtwtt::validate_scenario(cfg);

        opts.out_dir = out_dir;
        opts.budget_path = budget_path;
        opts.survey_only = survey;
        opts.dump_tags = dump_tags;
        opts.dump_histograms = dump_hists;
        opts.threads = threads;

        qtwtt::run_scenario(cfg, opts);
        std::fprintf(stderr, "wrote artifacts to %s\n", out_dir.c_str());
        return 0;
    } catch (const qtwtt::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const qtwtt::SimulationError& e) {
        std::fprintf(stderr, "simulation error: %s\n", e.what());
        return 3;
    } catch (const qtwtt::AnalysisError& e) {
        std::fprintf(stderr, "analysis error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
