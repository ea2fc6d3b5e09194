#include "qtwtt/twoway.hpp"

#include <algorithm>
#include <cmath>

#include "qtwtt/errors.hpp"
#include "qtwtt/seed.hpp"

namespace qtwtt {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;

std::span<const std::int64_t> slice(const std::vector<std::int64_t>& v, double lo_ps,
                                    double hi_ps)
{
    const auto lo = std::lower_bound(v.begin(), v.end(), static_cast<std::int64_t>(std::floor(lo_ps)));
    const auto hi = std::lower_bound(lo, v.end(), static_cast<std::int64_t>(std::ceil(hi_ps)));
    return {&*lo, static_cast<std::size_t>(hi - lo)};
}

} // namespace

std::size_t OffsetSeries::valid_count() const
{
    std::size_t n = 0;
    for (const auto& b : blocks)
        if (b.valid) ++n;
    return n;
}

std::vector<double> OffsetSeries::valid_t0() const
{
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks)
        if (b.valid) out.push_back(b.t0_ps);
    return out;
}

std::vector<double> OffsetSeries::longest_valid_run_t0() const
{
    std::size_t best_begin = 0, best_len = 0, begin = 0, len = 0;
    for (std::size_t i = 0; i <= blocks.size(); ++i) {
        if (i < blocks.size() && blocks[i].valid) {
            if (len == 0) begin = i;
            ++len;
        } else {
            if (len > best_len) {
                best_len = len;
                best_begin = begin;
            }
            len = 0;
        }
    }
    std::vector<double> out;
    out.reserve(best_len);
    for (std::size_t i = best_begin; i < best_begin + best_len; ++i)
        out.push_back(blocks[i].t0_ps);
    return out;
}

std::vector<double> OffsetSeries::contiguous_valid_t0() const
{
    std::size_t first = blocks.size(), last = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].valid) {
            first = std::min(first, i);
            last = i;
        }
    std::vector<double> out;
    if (first == blocks.size()) return out;
    for (std::size_t i = first; i <= last; ++i) {
        if (!blocks[i].valid)
            throw AnalysisError("offset series has invalid blocks inside the valid span; "
                                "split the run before stability analysis");
        out.push_back(blocks[i].t0_ps);
    }
    return out;
}

double theoretical_sd(double w1_fwhm_ps, double n1, double w2_fwhm_ps, double n2)
{
    if (n1 < 1.0 || n2 < 1.0)
        throw AnalysisError("theoretical_sd: event counts must be >= 1");
    if (w1_fwhm_ps <= 0.0 || w2_fwhm_ps <= 0.0)
        throw AnalysisError("theoretical_sd: widths must be > 0");
    const double s1 = w1_fwhm_ps / kFwhmPerSigma;
    const double s2 = w2_fwhm_ps / kFwhmPerSigma;
    return std::sqrt(s1 * s1 / n1 + s2 * s2 / n2) / std::sqrt(2.0);
}

OffsetBlock process_block(std::span<const std::int64_t> d1, std::span<const std::int64_t> d3,
                          std::span<const std::int64_t> d2, std::span<const std::int64_t> d4,
                          double center13_ps, double center24_ps, double epoch_s,
                          const AnalysisSpec& analysis)
{
    OffsetBlock blk;
    blk.epoch_s = epoch_s;

    const auto h13 = fine_histogram(d1, d3, center13_ps, analysis.fine_span_ps,
                                    analysis.fine_bin_ps);
    const auto h24 = fine_histogram(d2, d4, center24_ps, analysis.fine_span_ps,
                                    analysis.fine_bin_ps);
    const auto f13 = fit_gaussian(h13);
    const auto f24 = fit_gaussian(h24);
    if (!f13.converged || !f24.converged) return blk; // invalid, dropped upstream

    const auto c13 = coincidence_count(h13, f13);
    const auto c24 = coincidence_count(h24, f24);

    blk.d13_ps = f13.mu_ps;
    blk.d24_ps = f24.mu_ps;
    blk.t0_ps = (blk.d13_ps - blk.d24_ps) / 2.0;
    blk.n13 = c13.n_true;
    blk.n24 = c24.n_true;
    blk.w13_ps = f13.fwhm_ps;
    blk.w24_ps = f24.fwhm_ps;
    blk.valid = true;
    return blk;
}

OffsetSeries block_offsets(const TagStream& d1, const TagStream& d2, const TagStream& d3,
                           const TagStream& d4, const ScenarioConfig& cfg)
{
    for (const TagStream* s : {&d1, &d2, &d3, &d4}) validate_stream(*s);
    if (d1.empty() || d2.empty() || d3.empty() || d4.empty())
        throw AnalysisError("block_offsets: empty tag stream");

    const double block_ps = cfg.block_seconds * 1e12;
    const double last = static_cast<double>(
        std::max({d1.t_ps.back(), d2.t_ps.back(), d3.t_ps.back(), d4.t_ps.back()}));
    const auto n_blocks = static_cast<std::size_t>(last / block_ps) + 1;

    // acquire on the leading block so drift cannot smear the coarse peak
    TagStream d1_head{d1.channel, {}}, d3_head{d3.channel, {}}, d2_head{d2.channel, {}},
        d4_head{d4.channel, {}};
    auto head = [&](const TagStream& s, TagStream& dst) {
        const auto sp = slice(s.t_ps, 0.0, block_ps);
        dst.t_ps.assign(sp.begin(), sp.end());
    };
    head(d1, d1_head);
    head(d2, d2_head);
    head(d3, d3_head);
    head(d4, d4_head);
    double c13 = coarse_offset(d1_head, d3_head, cfg.analysis.coarse_span_ps,
                               cfg.analysis.coarse_bin_ps);
    double c24 = coarse_offset(d2_head, d4_head, cfg.analysis.coarse_span_ps,
                               cfg.analysis.coarse_bin_ps);

    OffsetSeries series;
    series.block_seconds = cfg.block_seconds;
    const double margin = cfg.analysis.fine_span_ps;
    for (std::size_t k = 0; k < n_blocks; ++k) {
        const double lo = static_cast<double>(k) * block_ps;
        const double hi = lo + block_ps;
        const auto s1 = slice(d1.t_ps, lo, hi);
        const auto s2 = slice(d2.t_ps, lo, hi);
        // partners sit one path-delay away from the signal tags
        const auto s3 = slice(d3.t_ps, lo - c13 - margin, hi - c13 + margin);
        const auto s4 = slice(d4.t_ps, lo - c24 - margin, hi - c24 + margin);

        OffsetBlock blk = process_block(s1, s3, s2, s4, c13, c24,
                                        static_cast<double>(k) * cfg.block_seconds,
                                        cfg.analysis);
        if (blk.valid) { // track the slowly moving centers
            c13 = blk.d13_ps;
            c24 = blk.d24_ps;
        }
        series.blocks.push_back(blk);
    }

    if (series.valid_count() < 2)
        throw AnalysisError("block_offsets: fewer than 2 valid blocks");
    return series;
}

OffsetSeries block_mode_series(const ScenarioConfig& cfg, std::size_t n_blocks,
                               std::uint64_t seed)
{
    if (cfg.mode != RunMode::Block)
        throw AnalysisError("block_mode_series: scenario mode is not 'block'");
    const auto& bm = cfg.block_model;
    if (bm.n13_mean < 1.0 || bm.n24_mean < 1.0 || bm.w13_ps < 0.0 || bm.w24_ps < 0.0)
        throw ConfigError("block mode requires block.n13_mean/n24_mean >= 1 and widths >= 0");

    ScenarioConfig slow_cfg = cfg;
    slow_cfg.master_seed = seed;
    const SlowTables slow = build_slow_tables(slow_cfg, n_blocks);

    // static one-way baselines: group delays, Sagnac asymmetry, clock offset
    const double base13 = link_delay_ps(cfg.link, Direction::Forward, cfg.link.lambda_ref_nm, 0.0) -
                          dcfm_delay_ps(cfg.dcfm, cfg.dcfm.lambda_ref_nm) + cfg.clock_offset_ps;
    const double base24 = link_delay_ps(cfg.link, Direction::Backward, cfg.link.lambda_ref_nm, 0.0) -
                          dcfm_delay_ps(cfg.dcfm, cfg.dcfm.lambda_ref_nm) - cfg.clock_offset_ps;

    const double s13 = bm.w13_ps / kFwhmPerSigma;
    const double s24 = bm.w24_ps / kFwhmPerSigma;
    const double chrom = cfg.link.dispersion_ps_per_nm_km * cfg.link.length_km / 2.0;

    OffsetSeries series;
    series.block_seconds = cfg.block_seconds;
    series.blocks.reserve(n_blocks);
    for (std::size_t k = 0; k < n_blocks; ++k) {
        Rng rng = make_rng(seed, "blockmode", k);
        const double n13 = std::max<double>(1.0, static_cast<double>(rng.poisson(bm.n13_mean)));
        const double n24 = std::max<double>(1.0, static_cast<double>(rng.poisson(bm.n24_mean)));
        // non-reciprocal slow terms: PMD differential and wavelength wander
        const double nr = slow.pmd_diff_ps[k] / 2.0 + chrom * slow.lambda_wander_nm[k];
        // per-path center scatter: sqrt(2) * sigma/sqrt(n), the level the
        // closed-form model above assigns to each one-way measurement
        const double noise13 = rng.normal(0.0, std::sqrt(2.0) * s13 / std::sqrt(n13));
        const double noise24 = rng.normal(0.0, std::sqrt(2.0) * s24 / std::sqrt(n24));

        OffsetBlock blk;
        blk.epoch_s = static_cast<double>(k) * cfg.block_seconds;
        blk.d13_ps = base13 + nr + noise13;
        blk.d24_ps = base24 - nr + noise24;
        blk.t0_ps = (blk.d13_ps - blk.d24_ps) / 2.0;
        blk.n13 = n13;
        blk.n24 = n24;
        blk.w13_ps = bm.w13_ps;
        blk.w24_ps = bm.w24_ps;
        blk.valid = true;
        series.blocks.push_back(blk);
    }
    return series;
}

} // namespace qtwtt
