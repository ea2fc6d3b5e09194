#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qtwtt/scenario.hpp"
#include "qtwtt/time_tag.hpp"

namespace qtwtt {

// One emitted pair; times are seconds relative to the enclosing block.
struct PairEvent {
    double t_emit_s = 0.0;
    double lambda_signal_nm = 0.0;
    double lambda_idler_nm = 0.0;
    double intrinsic_skew_ps = 0.0; // signal-minus-idler emission offset
};

// A photon in flight; t_ps is relative to the block epoch.
struct PhotonEvent {
    double t_ps = 0.0;
    double lambda_nm = 0.0;
};

enum class Direction { Forward, Backward };

// Slow per-block link state sampled outside the event loop: the differential
// (direction-asymmetric) delay from polarization-mode dispersion and the
// random-walk component of the symmetric drift.
struct LinkBlockState {
    double pmd_diff_ps = 0.0;
    double drift_rw_ps = 0.0;
};

// Homogeneous Poisson emissions at source.pair_rate_hz. Pump detuning and
// signal detuning are Gaussian; the idler detuning is their difference, so
// detunings are anti-correlated and sum to the pump sample.
std::vector<PairEvent> generate_pairs(const SourceSpec& source, double duration_s,
                                      std::uint64_t seed);

// Joint 50/50 branch assignment: each pair's signal and idler travel the same
// one-way measurement path.
std::pair<std::vector<PairEvent>, std::vector<PairEvent>>
split_50_50(const std::vector<PairEvent>& pairs, std::uint64_t seed);

// Deterministic symmetric drift (sinusoid + optional per-block random walk).
double drift_ps(const DriftProfile& drift, double t_abs_s, double rw_component_ps = 0.0);

// Full link delay for one photon: group delay + symmetric drift + chromatic
// delay D*L*(lambda - lambda_ref) + half the PMD differential (signed by
// direction) + the Sagnac asymmetry (signed by direction).
double link_delay_ps(const FiberLinkSpec& link, Direction dir, double lambda_nm,
                     double t_abs_s, const LinkBlockState& state = {});

// Compensation-module delay: group delay of the physical module plus the
// opposite-sign chromatic term -D*L_equiv*(lambda - lambda_ref).
double dcfm_delay_ps(const DcfmSpec& dcfm, double lambda_nm);

std::vector<PhotonEvent> propagate_link(const std::vector<PhotonEvent>& photons,
                                        const FiberLinkSpec& link, Direction dir,
                                        double epoch_s, const LinkBlockState& state = {});
std::vector<PhotonEvent> propagate_dcfm(const std::vector<PhotonEvent>& photons,
                                        const DcfmSpec& dcfm);

// Independent Bernoulli thinning with survival 10^(-loss_db/10).
std::vector<PhotonEvent> apply_loss(const std::vector<PhotonEvent>& photons,
                                    double loss_db, std::uint64_t seed);

// Detection: efficiency/fading/filter thinning, Gaussian jitter (optionally
// broadened with the observed count rate), dark and in-band background
// Poisson processes, sort, non-paralyzable dead time, 1 ps quantization.
// Resulting tag times are relative picoseconds within [0, duration).
TagStream detect(const std::vector<PhotonEvent>& photons, const DetectorSpec& det,
                 const NoiseSpec& noise, double fading_multiplier, double duration_s,
                 std::uint64_t seed, Channel channel);

// Spectral density of the background (cps per nm) and its band integral.
double noise_density_cps_per_nm(const NoiseSpec& noise, double lambda_nm);
double noise_band_rate_cps(const NoiseSpec& noise, double center_nm, double width_nm);

struct SurveyPoint {
    double center_nm = 0.0;
    double cps = 0.0;
};

// Scans a movable window across the band and Poisson-samples each window's
// expected rate over the integration time.
std::vector<SurveyPoint> noise_survey(const NoiseSpec& noise,
                                      const std::vector<double>& sweep_centers_nm,
                                      double window_fwhm_nm, double integration_s,
                                      std::uint64_t seed);

// Per-block slow-process tables, generated sequentially from per-index child
// seeds so results do not depend on worker scheduling.
struct SlowTables {
    std::vector<double> pmd_diff_ps;
    std::vector<double> drift_rw_ps;
    std::vector<double> fade_d1;
    std::vector<double> fade_d2;
    std::vector<double> lambda_wander_nm; // inter-source center-wavelength difference
};

SlowTables build_slow_tables(const ScenarioConfig& cfg, std::size_t n_blocks);

} // namespace qtwtt
