#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qtwtt/time_tag.hpp"

namespace qtwtt {

struct CoincidenceHistogram {
    double center_delay_ps = 0.0; // midpoint of the difference window
    double bin_width_ps = 10.0;
    double span_ps = 10000.0; // total width; bins = span / bin_width
    std::vector<double> counts;
    std::size_t n_signal = 0; // tags walked on each side
    std::size_t n_idler = 0;

    double lo_edge_ps() const { return center_delay_ps - span_ps / 2.0; }
    double bin_center_ps(std::size_t i) const
    {
        return lo_edge_ps() + (static_cast<double>(i) + 0.5) * bin_width_ps;
    }
    double total() const;
};

struct GaussianFit {
    double mu_ps = 0.0;
    double fwhm_ps = 0.0;
    double amplitude = 0.0;
    double baseline = 0.0;
    double mu_stderr_ps = 0.0;
    bool converged = false;
    double chi2_reduced = 0.0;
};

// Acquisition stage: cross-correlates coarsely binned streams over
// +-search_span_ps and returns the best-supported delay (signal minus idler).
// Ties break toward the smallest |delay|. Throws AnalysisError if a stream is
// empty or no bin clears 5 sigma over the accidental level.
double coarse_offset(const TagStream& sig, const TagStream& idl,
                     double search_span_ps, double coarse_bin_ps);

// All signal/idler tag pairs whose difference falls inside
// center +- span/2, binned. Two-pointer walk over the sorted inputs:
// O(n_sig + n_idler + matches).
CoincidenceHistogram fine_histogram(std::span<const std::int64_t> sig,
                                    std::span<const std::int64_t> idl,
                                    double center_delay_ps,
                                    double span_ps = 10000.0,
                                    double bin_width_ps = 10.0);

// Damped least-squares fit of A*exp(-(x-mu)^2/2sigma^2) + b over a window of
// +-3 provisional FWHM around the maximum bin. mu_stderr comes from the
// count-noise (Poisson) covariance of the unweighted estimator, which tracks
// the actual refit scatter (checked against a bootstrap oracle in the tests).
GaussianFit fit_gaussian(const CoincidenceHistogram& hist);

struct CoincidenceCounts {
    double n_true = 0.0;
    double n_accidental = 0.0;
    double raw_integral = 0.0;
};

// Integrates the peak window (mu +- FWHM/2, which holds 76.1% of a Gaussian)
// and subtracts the fitted-baseline accidental estimate.
CoincidenceCounts coincidence_count(const CoincidenceHistogram& hist,
                                    const GaussianFit& fit);

// Text dump: '#' header with center/bin width, then one count per line.
void write_histogram(std::ostream& out, const CoincidenceHistogram& hist);
CoincidenceHistogram read_histogram(std::istream& in);

} // namespace qtwtt
