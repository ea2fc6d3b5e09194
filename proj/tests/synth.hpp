#pragma once

// Synthetic fixtures shared by the correlator/twoway tests.

#include <cmath>
#include <vector>

#include "qtwtt/correlator.hpp"
#include "qtwtt/seed.hpp"

namespace qtwtt::testsupport {

// Histogram of n_events Gaussian-distributed differences plus a Poisson-flat
// baseline, built directly in count space.
inline CoincidenceHistogram make_gaussian_histogram(Rng& rng, double center_ps,
                                                    double sigma_ps, double n_events,
                                                    double baseline_per_bin,
                                                    double span_ps = 10000.0,
                                                    double bin_ps = 10.0)
{
    CoincidenceHistogram h;
    h.center_delay_ps = center_ps;
    h.bin_width_ps = bin_ps;
    const auto bins = static_cast<std::size_t>(span_ps / bin_ps);
    h.span_ps = static_cast<double>(bins) * bin_ps;
    h.counts.assign(bins, 0.0);
    const auto n = rng.poisson(n_events);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double d = rng.normal(center_ps, sigma_ps);
        const auto idx = static_cast<std::size_t>((d - h.lo_edge_ps()) / bin_ps);
        if (idx < bins) h.counts[idx] += 1.0;
    }
    if (baseline_per_bin > 0.0)
        for (auto& c : h.counts) c += static_cast<double>(rng.poisson(baseline_per_bin));
    return h;
}

struct FitScatter {
    double mu_scatter_ps = 0.0;     // SD of fitted centers over the trials
    double mean_stderr_ps = 0.0;    // mean reported standard error
    double mean_fwhm_ps = 0.0;
    std::size_t n_converged = 0;
};

inline FitScatter fit_scatter_experiment(std::uint64_t seed, int trials, double sigma_ps,
                                         double n_events, double baseline_per_bin)
{
    std::vector<double> mus;
    FitScatter out;
    double stderr_sum = 0.0, fwhm_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng = make_rng(seed, "fit_scatter", static_cast<std::uint64_t>(t));
        const auto h =
            make_gaussian_histogram(rng, 0.0, sigma_ps, n_events, baseline_per_bin);
        const auto f = fit_gaussian(h);
        if (!f.converged) continue;
        mus.push_back(f.mu_ps);
        stderr_sum += f.mu_stderr_ps;
        fwhm_sum += f.fwhm_ps;
    }
    out.n_converged = mus.size();
    if (mus.size() < 2) return out;
    double mean = 0.0;
    for (double m : mus) mean += m;
    mean /= static_cast<double>(mus.size());
    double ss = 0.0;
    for (double m : mus) ss += (m - mean) * (m - mean);
    out.mu_scatter_ps = std::sqrt(ss / static_cast<double>(mus.size() - 1));
    out.mean_stderr_ps = stderr_sum / static_cast<double>(mus.size());
    out.mean_fwhm_ps = fwhm_sum / static_cast<double>(mus.size());
    return out;
}

} // namespace qtwtt::testsupport
