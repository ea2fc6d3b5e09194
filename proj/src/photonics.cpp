#include "qtwtt/photonics.hpp"

#include <algorithm>
#include <cmath>

#include "qtwtt/seed.hpp"

namespace qtwtt {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;
constexpr double kGroupIndex = 1.468;
constexpr double kSpeedOfLight_m_per_s = 2.99792458e8;

// group delay of L km of fiber, in ps
double fiber_group_delay_ps(double length_km)
{
    return length_km * 1e3 * kGroupIndex / kSpeedOfLight_m_per_s * 1e12;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// expected counts of one Gaussian peak inside [lo, hi], with the amplitude
// calibrated as "counts in a 0.5 nm window centered on the peak"
double peak_band_counts(const NoisePeak& p, double lo, double hi)
{
    const double sigma = p.fwhm_nm / kFwhmPerSigma;
    const double ref_mass = normal_cdf(0.25 / sigma) - normal_cdf(-0.25 / sigma);
    if (ref_mass <= 0.0) return 0.0;
    const double mass = normal_cdf((hi - p.center_nm) / sigma) - normal_cdf((lo - p.center_nm) / sigma);
    return p.amplitude_cps * mass / ref_mass;
}

double edfa_attenuation(const NoiseSpec& n)
{
    return std::pow(10.0, -n.atten_db_per_km * n.edfa_distance_km / 10.0);
}

std::int64_t quantize_rel_ps(double t_ps)
{
    return std::llround(t_ps); // half away from zero, matching quantize()
}

} // namespace

std::vector<PairEvent> generate_pairs(const SourceSpec& source, double duration_s,
                                      std::uint64_t seed)
{
    if (duration_s < 0)
        throw SimulationError("generate_pairs: negative duration");
    std::vector<PairEvent> pairs;
    if (source.pair_rate_hz <= 0.0 || duration_s == 0.0) return pairs;
    pairs.reserve(static_cast<std::size_t>(source.pair_rate_hz * duration_s * 1.1) + 16);

    Rng rng(seed);
    const double sigma_pump = source.pump_equiv_fwhm_nm / kFwhmPerSigma;
    const double sigma_sig = source.signal_fwhm_nm / kFwhmPerSigma;
    // spectral support: detunings live within 5 FWHM of the band center
    const double pump_bound = 5.0 * source.pump_equiv_fwhm_nm;
    const double sig_bound = 5.0 * source.signal_fwhm_nm;

    double t = 0.0;
    for (;;) {
        t += rng.exponential(source.pair_rate_hz);
        if (t >= duration_s) break;
        const double pump_detuning =
            sigma_pump > 0.0 ? rng.bounded_normal(0.0, sigma_pump, pump_bound) : 0.0;
        const double sig_detuning =
            sigma_sig > 0.0 ? rng.bounded_normal(0.0, sigma_sig, sig_bound) : 0.0;
        PairEvent p;
        p.t_emit_s = t;
        p.lambda_signal_nm = source.lambda_center_nm + sig_detuning;
        p.lambda_idler_nm = source.lambda_center_nm + (pump_detuning - sig_detuning);
        p.intrinsic_skew_ps =
            source.correlation_jitter_ps > 0.0 ? rng.normal(0.0, source.correlation_jitter_ps) : 0.0;
        pairs.push_back(p);
    }
    return pairs;
}

std::pair<std::vector<PairEvent>, std::vector<PairEvent>>
split_50_50(const std::vector<PairEvent>& pairs, std::uint64_t seed)
{
    Rng rng(seed);
    std::pair<std::vector<PairEvent>, std::vector<PairEvent>> out;
    for (const auto& p : pairs) {
        if (rng.bernoulli(0.5))
            out.first.push_back(p);
        else
            out.second.push_back(p);
    }
    return out;
}

double drift_ps(const DriftProfile& drift, double t_abs_s, double rw_component_ps)
{
    double v = 0.0;
    if (drift.kind != DriftKind::None)
        v += 0.5 * drift.peak_to_peak_ps * std::sin(2.0 * M_PI * t_abs_s / drift.period_s);
    if (drift.kind == DriftKind::SinusoidPlusRandomWalk) v += rw_component_ps;
    return v;
}

double link_delay_ps(const FiberLinkSpec& link, Direction dir, double lambda_nm,
                     double t_abs_s, const LinkBlockState& state)
{
    const double sign = dir == Direction::Forward ? 1.0 : -1.0;
    double delay = fiber_group_delay_ps(link.length_km);
    delay += drift_ps(link.drift, t_abs_s, state.drift_rw_ps);
    delay += link.dispersion_ps_per_nm_km * link.length_km * (lambda_nm - link.lambda_ref_nm);
    delay += sign * state.pmd_diff_ps / 2.0;
    delay += sign * link.sagnac_coeff_ps_per_km * link.length_km / 2.0;
    return delay;
}

double dcfm_delay_ps(const DcfmSpec& dcfm, double lambda_nm)
{
    return fiber_group_delay_ps(dcfm.base_length_km) -
           dcfm.dispersion_ps_per_nm_km * dcfm.equivalent_length_km *
               (lambda_nm - dcfm.lambda_ref_nm);
}

std::vector<PhotonEvent> propagate_link(const std::vector<PhotonEvent>& photons,
                                        const FiberLinkSpec& link, Direction dir,
                                        double epoch_s, const LinkBlockState& state)
{
    std::vector<PhotonEvent> out;
    out.reserve(photons.size());
    for (const auto& ph : photons) {
        PhotonEvent o = ph;
        o.t_ps += link_delay_ps(link, dir, ph.lambda_nm, epoch_s + ph.t_ps * 1e-12, state);
        out.push_back(o);
    }
    return out;
}

std::vector<PhotonEvent> propagate_dcfm(const std::vector<PhotonEvent>& photons,
                                        const DcfmSpec& dcfm)
{
    std::vector<PhotonEvent> out;
    out.reserve(photons.size());
    for (const auto& ph : photons) {
        PhotonEvent o = ph;
        o.t_ps += dcfm_delay_ps(dcfm, ph.lambda_nm);
        out.push_back(o);
    }
    return out;
}

std::vector<PhotonEvent> apply_loss(const std::vector<PhotonEvent>& photons,
                                    double loss_db, std::uint64_t seed)
{
    if (loss_db < 0)
        throw SimulationError("apply_loss: loss must be >= 0 dB");
    const double p = std::pow(10.0, -loss_db / 10.0);
    Rng rng(seed);
    std::vector<PhotonEvent> out;
    out.reserve(static_cast<std::size_t>(static_cast<double>(photons.size()) * p) + 16);
    for (const auto& ph : photons)
        if (rng.bernoulli(p)) out.push_back(ph);
    return out;
}

TagStream detect(const std::vector<PhotonEvent>& photons, const DetectorSpec& det,
                 const NoiseSpec& noise, double fading_multiplier, double duration_s,
                 std::uint64_t seed, Channel channel)
{
    Rng rng(seed);
    const double duration_ps = duration_s * 1e12;
    const double band_lo = det.filter_center_nm - det.filter_fwhm_nm / 2.0;
    const double band_hi = det.filter_center_nm + det.filter_fwhm_nm / 2.0;
    const double p_detect = det.efficiency * fading_multiplier;

    std::vector<double> times;
    times.reserve(photons.size() + 64);
    for (const auto& ph : photons) {
        if (ph.lambda_nm < band_lo || ph.lambda_nm > band_hi) continue;
        if (!rng.bernoulli(p_detect)) continue;
        times.push_back(ph.t_ps);
    }
    const std::size_t n_photon = times.size();

    const double bg_rate = noise_band_rate_cps(noise, det.filter_center_nm, det.filter_fwhm_nm);
    const auto n_dark = rng.poisson(det.dark_cps * duration_s);
    const auto n_bg = rng.poisson(bg_rate * duration_s);
    for (std::uint64_t i = 0; i < n_dark + n_bg; ++i)
        times.push_back(rng.uniform(0.0, duration_ps));

    // count-rate broadening of the timing jitter (0 slope: plain Gaussian)
    const double observed_mcps =
        duration_s > 0 ? static_cast<double>(times.size()) / duration_s / 1e6 : 0.0;
    const double jitter =
        det.jitter_rms_ps * (1.0 + det.jitter_rate_slope_ps_per_mcps * observed_mcps);
    if (jitter > 0.0)
        for (std::size_t i = 0; i < n_photon; ++i) times[i] += rng.normal(0.0, jitter);

    std::sort(times.begin(), times.end());

    TagStream out;
    out.channel = channel;
    out.t_ps.reserve(times.size());
    double last_accept = -1e300;
    for (const double t : times) {
        if (t < 0.0) continue; // jitter can push a tag before the epoch; drop it
        if (t - last_accept < det.dead_time_ps) continue;
        last_accept = t;
        out.t_ps.push_back(quantize_rel_ps(t)); // rounding is monotone: stays sorted
    }
    return out;
}

double noise_density_cps_per_nm(const NoiseSpec& noise, double lambda_nm)
{
    double density = noise.base_floor_cps_per_half_nm / 0.5;
    const double atten = edfa_attenuation(noise);
    if (noise.edfa_on) density += noise.edfa_floor_cps_per_half_nm * atten / 0.5;
    for (const auto& p : noise.peaks) {
        if (p.edfa_sourced && !noise.edfa_on) continue;
        const double sigma = p.fwhm_nm / kFwhmPerSigma;
        const double ref_mass = normal_cdf(0.25 / sigma) - normal_cdf(-0.25 / sigma);
        if (ref_mass <= 0.0) continue;
        const double u = (lambda_nm - p.center_nm) / sigma;
        double d = p.amplitude_cps / ref_mass * std::exp(-0.5 * u * u) /
                   (sigma * std::sqrt(2.0 * M_PI));
        if (p.edfa_sourced) d *= atten;
        density += d;
    }
    return density;
}

double noise_band_rate_cps(const NoiseSpec& noise, double center_nm, double width_nm)
{
    const double lo = center_nm - width_nm / 2.0;
    const double hi = center_nm + width_nm / 2.0;
    double rate = noise.base_floor_cps_per_half_nm / 0.5 * width_nm;
    const double atten = edfa_attenuation(noise);
    if (noise.edfa_on) rate += noise.edfa_floor_cps_per_half_nm * atten / 0.5 * width_nm;
    for (const auto& p : noise.peaks) {
        if (p.edfa_sourced && !noise.edfa_on) continue;
        double c = peak_band_counts(p, lo, hi);
        if (p.edfa_sourced) c *= atten;
        rate += c;
    }
    return rate;
}

std::vector<SurveyPoint> noise_survey(const NoiseSpec& noise,
                                      const std::vector<double>& sweep_centers_nm,
                                      double window_fwhm_nm, double integration_s,
                                      std::uint64_t seed)
{
    if (window_fwhm_nm <= 0.0)
        throw SimulationError("noise_survey: window width must be > 0");
    std::vector<SurveyPoint> out;
    out.reserve(sweep_centers_nm.size());
    for (std::size_t i = 0; i < sweep_centers_nm.size(); ++i) {
        const double center = sweep_centers_nm[i];
        const double expected = noise_band_rate_cps(noise, center, window_fwhm_nm);
        Rng rng(derive_seed(seed, "survey", i));
        const double counts = static_cast<double>(rng.poisson(expected * integration_s));
        out.push_back({center, counts / integration_s});
    }
    return out;
}

SlowTables build_slow_tables(const ScenarioConfig& cfg, std::size_t n_blocks)
{
    SlowTables t;
    t.pmd_diff_ps.resize(n_blocks, 0.0);
    t.drift_rw_ps.resize(n_blocks, 0.0);
    t.fade_d1.resize(n_blocks, 1.0);
    t.fade_d2.resize(n_blocks, 1.0);
    t.lambda_wander_nm.resize(n_blocks, 0.0);
    if (n_blocks == 0) return t;

    const double dt = cfg.block_seconds;
    const std::uint64_t seed = cfg.master_seed;

    // PMD differential: Ornstein-Uhlenbeck, stationary SD coeff*sqrt(L)
    {
        const double sd = cfg.link.pmd_coeff_ps_per_sqrt_km * std::sqrt(cfg.link.length_km);
        const double alpha = std::exp(-dt / cfg.link.pmd_correlation_s);
        const double step_sd = sd * std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
        double x = sd > 0 ? make_rng(seed, "pmd", 0).normal(0.0, sd) : 0.0;
        t.pmd_diff_ps[0] = x;
        for (std::size_t k = 1; k < n_blocks; ++k) {
            x = alpha * x + (step_sd > 0 ? make_rng(seed, "pmd", k).normal(0.0, step_sd) : 0.0);
            t.pmd_diff_ps[k] = x;
        }
    }

    // random-walk component of the symmetric drift
    if (cfg.link.drift.kind == DriftKind::SinusoidPlusRandomWalk &&
        cfg.link.drift.randomwalk_ps_per_sqrt_s > 0.0) {
        const double step_sd = cfg.link.drift.randomwalk_ps_per_sqrt_s * std::sqrt(dt);
        double w = 0.0;
        for (std::size_t k = 0; k < n_blocks; ++k) {
            t.drift_rw_ps[k] = w;
            w += make_rng(seed, "drift_rw", k).normal(0.0, step_sd);
        }
    }

    // polarization fading: bounded OU walk on the efficiency multiplier
    if (cfg.link.fading.kind == FadingKind::BoundedWalk) {
        const auto& f = cfg.link.fading;
        const double alpha = std::exp(-dt / f.correlation_time_s);
        const double spread = (f.max - f.min) / 4.0;
        const double step_sd = spread * std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
        auto walk = [&](const char* label, std::vector<double>& dst) {
            double m = f.mean;
            for (std::size_t k = 0; k < n_blocks; ++k) {
                dst[k] = m;
                const double n = make_rng(seed, label, k).normal(0.0, step_sd);
                m = f.mean + alpha * (m - f.mean) + n;
                m = std::clamp(m, f.min, f.max);
            }
        };
        walk("fade:D1", t.fade_d1);
        walk("fade:D2", t.fade_d2);
    }

    // inter-source center-wavelength wander (OU, nm)
    if (cfg.source.lambda_wander_sd_pm > 0.0) {
        const double sd = cfg.source.lambda_wander_sd_pm * 1e-3;
        const double alpha = std::exp(-dt / cfg.source.lambda_wander_tau_s);
        const double step_sd = sd * std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
        double x = make_rng(seed, "lambda_wander", 0).normal(0.0, sd);
        t.lambda_wander_nm[0] = x;
        for (std::size_t k = 1; k < n_blocks; ++k) {
            x = alpha * x + make_rng(seed, "lambda_wander", k).normal(0.0, step_sd);
            t.lambda_wander_nm[k] = x;
        }
    }

    return t;
}

} // namespace qtwtt
