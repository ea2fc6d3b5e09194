#include "qtwtt/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "qtwtt/correlator.hpp"
#include "qtwtt/errors.hpp"
#include "qtwtt/seed.hpp"

namespace qtwtt {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;

struct BranchPlan {
    Channel sig_channel;
    Channel idl_channel;
    Direction dir;
    const char* sim_label;
    const char* det_sig_label;
    const char* det_idl_label;
};

const BranchPlan kBranches[2] = {
    {Channel::D1, Channel::D3, Direction::Forward, "sim:b1", "det:D1", "det:D3"},
    {Channel::D2, Channel::D4, Direction::Backward, "sim:b2", "det:D2", "det:D4"},
};

std::int64_t block_epoch_ps(const ScenarioConfig& cfg, std::size_t k)
{
    return quantize(static_cast<double>(k) * cfg.block_seconds);
}

void shift_tags(TagStream& s, std::int64_t delta)
{
    for (auto& t : s.t_ps) t += delta;
    // a negative clock offset can push the very first tags before the epoch
    while (!s.t_ps.empty() && s.t_ps.front() < 0) s.t_ps.erase(s.t_ps.begin());
}

} // namespace

BlockTags simulate_block(const ScenarioConfig& cfg, const SlowTables& slow,
                         std::size_t block_index)
{
    const std::size_t k = block_index;
    const double b_s = cfg.block_seconds;
    const double epoch_s = static_cast<double>(k) * b_s;
    const std::int64_t epoch_ps = block_epoch_ps(cfg, k);
    const std::int64_t offset_ps = std::llround(cfg.clock_offset_ps);

    const double sigma_pump = cfg.source.pump_equiv_fwhm_nm / kFwhmPerSigma;
    const double sigma_sig = cfg.source.signal_fwhm_nm / kFwhmPerSigma;
    const double pump_bound = 5.0 * cfg.source.pump_equiv_fwhm_nm;
    const double sig_bound = 5.0 * cfg.source.signal_fwhm_nm;
    const double skew_sd = cfg.source.correlation_jitter_ps;

    const double p_link = std::pow(10.0, -cfg.link.loss_db / 10.0);
    const double p_dcfm = std::pow(10.0, -cfg.dcfm.loss_db / 10.0);
    const double branch_rate = cfg.source.pair_rate_hz / 2.0;

    LinkBlockState state;
    state.pmd_diff_ps = slow.pmd_diff_ps[k];
    state.drift_rw_ps = slow.drift_rw_ps[k];

    BlockTags out;
    for (int b = 0; b < 2; ++b) {
        const BranchPlan& plan = kBranches[b];
        const DetectorSpec& det_sig = cfg.detector(plan.sig_channel);
        const DetectorSpec& det_idl = cfg.detector(plan.idl_channel);
        const double fade = b == 0 ? slow.fade_d1[k] : slow.fade_d2[k];
        const double branch_shift_nm = (b == 0 ? 0.5 : -0.5) * slow.lambda_wander_nm[k];

        const double p_s = p_link * det_sig.efficiency * fade;
        const double p_i = p_dcfm * det_idl.efficiency;

        Rng rng = make_rng(cfg.master_seed, plan.sim_label, k);
        const auto n_cc = rng.poisson(branch_rate * p_s * p_i * b_s);
        const auto n_so = rng.poisson(branch_rate * p_s * (1.0 - p_i) * b_s);
        const auto n_io = rng.poisson(branch_rate * p_i * (1.0 - p_s) * b_s);

        std::vector<PhotonEvent> sig_photons, idl_photons;
        sig_photons.reserve(n_cc + n_so);
        idl_photons.reserve(n_cc + n_io);

        auto signal_arrival = [&](double t_emit_s, double lambda, double skew_ps) {
            return t_emit_s * 1e12 + skew_ps +
                   link_delay_ps(cfg.link, plan.dir, lambda, epoch_s + t_emit_s, state);
        };

        for (std::uint64_t i = 0; i < n_cc; ++i) {
            const double t = rng.uniform(0.0, b_s);
            const double dp =
                sigma_pump > 0 ? rng.bounded_normal(0.0, sigma_pump, pump_bound) : 0.0;
            const double ds =
                sigma_sig > 0 ? rng.bounded_normal(0.0, sigma_sig, sig_bound) : 0.0;
            const double skew = skew_sd > 0 ? rng.normal(0.0, skew_sd) : 0.0;
            const double lam_s = cfg.source.lambda_center_nm + branch_shift_nm + ds;
            const double lam_i = cfg.source.lambda_center_nm + (dp - ds);
            sig_photons.push_back({signal_arrival(t, lam_s, skew), lam_s});
            idl_photons.push_back({t * 1e12 + dcfm_delay_ps(cfg.dcfm, lam_i), lam_i});
        }
        for (std::uint64_t i = 0; i < n_so; ++i) {
            const double t = rng.uniform(0.0, b_s);
            const double ds =
                sigma_sig > 0 ? rng.bounded_normal(0.0, sigma_sig, sig_bound) : 0.0;
            const double skew = skew_sd > 0 ? rng.normal(0.0, skew_sd) : 0.0;
            const double lam_s = cfg.source.lambda_center_nm + branch_shift_nm + ds;
            sig_photons.push_back({signal_arrival(t, lam_s, skew), lam_s});
        }
        for (std::uint64_t i = 0; i < n_io; ++i) {
            const double t = rng.uniform(0.0, b_s);
            const double dp =
                sigma_pump > 0 ? rng.bounded_normal(0.0, sigma_pump, pump_bound) : 0.0;
            const double ds =
                sigma_sig > 0 ? rng.bounded_normal(0.0, sigma_sig, sig_bound) : 0.0;
            const double lam_i = cfg.source.lambda_center_nm + (dp - ds);
            idl_photons.push_back({t * 1e12 + dcfm_delay_ps(cfg.dcfm, lam_i), lam_i});
        }

        // thinning already covered loss, efficiency and fading
        DetectorSpec sig_det = det_sig;
        sig_det.efficiency = 1.0;
        DetectorSpec idl_det = det_idl;
        idl_det.efficiency = 1.0;
        static const NoiseSpec kQuietPath{0.0, 0.0, false, 0.2, 0.2, {}};

        TagStream sig_tags = detect(sig_photons, sig_det, cfg.noise, 1.0, b_s,
                                    derive_seed(cfg.master_seed, plan.det_sig_label, k),
                                    plan.sig_channel);
        TagStream idl_tags = detect(idl_photons, idl_det, kQuietPath, 1.0, b_s,
                                    derive_seed(cfg.master_seed, plan.det_idl_label, k),
                                    plan.idl_channel);

        // site B timestamps the forward signal (D1) and the branch-2 idler (D4)
        shift_tags(sig_tags, epoch_ps + (plan.sig_channel == Channel::D1 ? offset_ps : 0));
        shift_tags(idl_tags, epoch_ps + (plan.idl_channel == Channel::D4 ? offset_ps : 0));

        out.streams[static_cast<std::size_t>(plan.sig_channel) - 1] = std::move(sig_tags);
        out.streams[static_cast<std::size_t>(plan.idl_channel) - 1] = std::move(idl_tags);
    }
    return out;
}

double estimated_events_per_block(const ScenarioConfig& cfg)
{
    const double p_link = std::pow(10.0, -cfg.link.loss_db / 10.0);
    const double p_dcfm = std::pow(10.0, -cfg.dcfm.loss_db / 10.0);
    const double branch_rate = cfg.source.pair_rate_hz / 2.0;
    double rate = 0.0;
    for (int b = 0; b < 2; ++b) {
        const BranchPlan& plan = kBranches[b];
        const double p_s = p_link * cfg.detector(plan.sig_channel).efficiency;
        const double p_i = p_dcfm * cfg.detector(plan.idl_channel).efficiency;
        rate += branch_rate * (p_s + p_i);
        rate += cfg.detector(plan.sig_channel).dark_cps + cfg.detector(plan.idl_channel).dark_cps;
        const auto& d = cfg.detector(plan.sig_channel);
        rate += noise_band_rate_cps(cfg.noise, d.filter_center_nm, d.filter_fwhm_nm);
    }
    return rate * cfg.block_seconds;
}

EventRunResult run_event_mode(const ScenarioConfig& cfg, std::size_t n_blocks,
                              unsigned threads, bool keep_tags)
{
    if (cfg.mode != RunMode::Event)
        throw SimulationError("run_event_mode: scenario mode is not 'event'");
    if (n_blocks < 2)
        throw AnalysisError("run_event_mode: need at least 2 blocks");

    const double projected = estimated_events_per_block(cfg) * static_cast<double>(n_blocks);
    if (projected > static_cast<double>(cfg.run_max_events))
        throw SimulationError("projected event count " + std::to_string(projected) +
                              " exceeds run.max_events; use block mode for long runs");

    const SlowTables slow = build_slow_tables(cfg, n_blocks);

    // acquire and fit the leading block to anchor the histogram centers
    std::vector<BlockTags> chunks(keep_tags ? n_blocks : 0);
    BlockTags blk0 = simulate_block(cfg, slow, 0);
    const auto& a = cfg.analysis;
    const double coarse13 = coarse_offset(blk0.streams[0], blk0.streams[2], a.coarse_span_ps,
                                          a.coarse_bin_ps);
    const double coarse24 = coarse_offset(blk0.streams[1], blk0.streams[3], a.coarse_span_ps,
                                          a.coarse_bin_ps);
    OffsetBlock first = process_block(blk0.streams[0].t_ps, blk0.streams[2].t_ps,
                                      blk0.streams[1].t_ps, blk0.streams[3].t_ps, coarse13,
                                      coarse24, 0.0, a);
    const double anchor13 = first.valid ? first.d13_ps : coarse13;
    const double anchor24 = first.valid ? first.d24_ps : coarse24;
    if (keep_tags) chunks[0] = std::move(blk0);

    // deterministic center prediction: drift plus the slow differential terms
    const double chrom_half = cfg.link.dispersion_ps_per_nm_km * cfg.link.length_km / 2.0;
    auto slow_terms = [&](std::size_t k) {
        const double d = drift_ps(cfg.link.drift,
                                  (static_cast<double>(k) + 0.5) * cfg.block_seconds,
                                  slow.drift_rw_ps[k]);
        const double nr = slow.pmd_diff_ps[k] / 2.0 + chrom_half * slow.lambda_wander_nm[k];
        return std::pair<double, double>{d + nr, d - nr};
    };
    const auto [c13_0, c24_0] = slow_terms(0);

    std::vector<OffsetBlock> slots(n_blocks);
    slots[0] = first;

    std::atomic<std::size_t> next{1};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n_blocks) return;
            try {
                BlockTags tags = simulate_block(cfg, slow, k);
                const auto [t13, t24] = slow_terms(k);
                const double c13 = anchor13 + (t13 - c13_0);
                const double c24 = anchor24 + (t24 - c24_0);
                slots[k] = process_block(tags.streams[0].t_ps, tags.streams[2].t_ps,
                                         tags.streams[1].t_ps, tags.streams[3].t_ps, c13, c24,
                                         static_cast<double>(k) * cfg.block_seconds, a);
                if (keep_tags) chunks[k] = std::move(tags);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || n_blocks <= 2) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EventRunResult result;
    result.series.block_seconds = cfg.block_seconds;
    result.series.blocks = std::move(slots);
    if (result.series.valid_count() < 2)
        throw AnalysisError("event run produced fewer than 2 valid blocks");

    if (keep_tags) {
        for (std::size_t c = 0; c < 4; ++c) {
            TagStream& dst = result.tags[c];
            dst.channel = static_cast<Channel>(c + 1);
            for (auto& chunk : chunks) {
                TagStream& src = chunk.streams[c];
                const std::size_t old_size = dst.t_ps.size();
                dst.t_ps.insert(dst.t_ps.end(), src.t_ps.begin(), src.t_ps.end());
                src.t_ps.clear();
                src.t_ps.shrink_to_fit();
                // chunks can overlap by one path delay; restore order locally
                if (old_size > 0 && old_size < dst.t_ps.size() &&
                    dst.t_ps[old_size - 1] > dst.t_ps[old_size]) {
                    auto mid = dst.t_ps.begin() + static_cast<std::ptrdiff_t>(old_size);
                    auto from = std::lower_bound(dst.t_ps.begin(), mid, dst.t_ps[old_size]);
                    std::inplace_merge(from, mid, dst.t_ps.end());
                }
            }
            validate_stream(dst);
        }
    }
    return result;
}

} // namespace qtwtt
