#pragma once

#include <cstddef>
#include <vector>

namespace qtwtt {

struct TdevPoint {
    double tau_s = 0.0;
    double tdev_ps = 0.0;
    std::size_t n_samples = 0; // second-difference averages entering the estimate
    double ci68_low_ps = 0.0;
    double ci68_high_ps = 0.0;
};

struct TdevCurve {
    double tau0_s = 0.0;
    std::vector<TdevPoint> points;
};

// Sample standard deviation (n-1 denominator). Throws AnalysisError below
// two points.
double sample_sd(const std::vector<double>& x);

// Overlapping time-deviation estimator on an evenly spaced phase series:
//   TVAR(m*tau0) = 1/(6 m^2 (N-3m+1)) * sum_j [ sum_{i=j}^{j+m-1}
//                  (x_{i+2m} - 2 x_{i+m} + x_i) ]^2
// The 68% band uses a chi-square approximation with equivalent degrees of
// freedom edf = max(1, (N - 3m + 1)/(2m)) (overlapping estimates are
// correlated over ~m lags; the band is advisory output). Requires
// N >= 3*max(m)+1.
TdevCurve tdev(const std::vector<double>& x_ps, double tau0_s,
               const std::vector<std::size_t>& m_list);

// Octave ladder 1,2,4,... capped at N/4.
std::vector<std::size_t> default_m_ladder(std::size_t n);

// Least-squares slope of log(tdev) vs log(tau) over [tau_min, tau_max].
// Throws AnalysisError with fewer than 3 points in range.
double fit_loglog_slope(const TdevCurve& curve, double tau_min_s, double tau_max_s);

} // namespace qtwtt
