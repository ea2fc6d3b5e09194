#include "qtwtt/stability.hpp"

#include <algorithm>
#include <cmath>

#include "qtwtt/errors.hpp"

namespace qtwtt {

namespace {

// Chi-square quantile via the Wilson-Hilferty cube-root approximation;
// plenty for advisory confidence bands.
double chi2_quantile(double p, double dof)
{
    // inverse normal via Acklam-style rational approximation
    auto inv_norm = [](double q) {
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00, 2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425;
        if (q < plow) {
            const double u = std::sqrt(-2.0 * std::log(q));
            return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
                   ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
        }
        if (q > 1.0 - plow) {
            const double u = std::sqrt(-2.0 * std::log(1.0 - q));
            return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
                   ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
        }
        const double u = q - 0.5, t = u * u;
        return (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
               (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    };
    const double z = inv_norm(p);
    const double h = 2.0 / (9.0 * dof);
    const double t = 1.0 - h + z * std::sqrt(h);
    return dof * t * t * t;
}

} // namespace

double sample_sd(const std::vector<double>& x)
{
    if (x.size() < 2)
        throw AnalysisError("sample_sd: need at least 2 values");
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

TdevCurve tdev(const std::vector<double>& x, double tau0_s,
               const std::vector<std::size_t>& m_list)
{
    const std::size_t n = x.size();
    TdevCurve curve;
    curve.tau0_s = tau0_s;
    for (const std::size_t m : m_list) {
        if (m == 0 || n < 3 * m + 1)
            throw AnalysisError("tdev: series too short for m=" + std::to_string(m));

        // second differences at stride m, then a sliding length-m window sum
        const std::size_t nd = n - 2 * m;
        double window = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            window += x[i + 2 * m] - 2.0 * x[i + m] + x[i];

        const std::size_t terms = n - 3 * m + 1;
        double acc = window * window;
        for (std::size_t j = 1; j < terms; ++j) {
            const std::size_t i_out = j - 1;
            const std::size_t i_in = j + m - 1;
            window -= x[i_out + 2 * m] - 2.0 * x[i_out + m] + x[i_out];
            window += x[i_in + 2 * m] - 2.0 * x[i_in + m] + x[i_in];
            acc += window * window;
        }
        (void)nd;

        const double md = static_cast<double>(m);
        const double tvar = acc / (6.0 * md * md * static_cast<double>(terms));
        TdevPoint pt;
        pt.tau_s = md * tau0_s;
        pt.tdev_ps = std::sqrt(tvar);
        pt.n_samples = terms;

        const double edf = std::max(1.0, static_cast<double>(terms) / (2.0 * md));
        pt.ci68_low_ps = pt.tdev_ps * std::sqrt(edf / chi2_quantile(0.84, edf));
        pt.ci68_high_ps = pt.tdev_ps * std::sqrt(edf / chi2_quantile(0.16, edf));
        curve.points.push_back(pt);
    }
    return curve;
}

std::vector<std::size_t> default_m_ladder(std::size_t n)
{
    std::vector<std::size_t> ms;
    for (std::size_t m = 1; m <= n / 4 && n >= 3 * m + 1; m *= 2) ms.push_back(m);
    return ms;
}

double fit_loglog_slope(const TdevCurve& curve, double tau_min_s, double tau_max_s)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const auto& p : curve.points) {
        if (p.tau_s < tau_min_s || p.tau_s > tau_max_s) continue;
        if (p.tdev_ps <= 0.0) continue;
        const double lx = std::log(p.tau_s);
        const double ly = std::log(p.tdev_ps);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3)
        throw AnalysisError("fit_loglog_slope: fewer than 3 curve points in range");
    const double nd = static_cast<double>(n);
    const double denom = nd * sxx - sx * sx;
    if (std::fabs(denom) < 1e-300)
        throw AnalysisError("fit_loglog_slope: degenerate tau range");
    return (nd * sxy - sx * sy) / denom;
}

} // namespace qtwtt
