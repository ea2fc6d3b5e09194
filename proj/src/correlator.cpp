#include "qtwtt/correlator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "qtwtt/errors.hpp"

namespace qtwtt {

namespace {

// Cap on signal tags walked during acquisition; the delay is static at the
// sub-coarse-bin level, so a prefix is enough.
constexpr std::size_t kCoarseMaxSigTags = 200000;

constexpr double kFwhmPerSigma = 2.3548200450309493; // 2*sqrt(2*ln 2)

void accumulate_differences(std::span<const std::int64_t> sig,
                            std::span<const std::int64_t> idl,
                            double lo_edge, double hi_edge, double bin_width,
                            std::vector<double>& counts)
{
    const std::size_t bins = counts.size();
    // absolute tags can exceed 2^53 ps; form differences in integer space and
    // only then drop to double (differences are span-sized and exact)
    const auto ti_min_off = static_cast<std::int64_t>(std::ceil(hi_edge));
    const auto ti_max_off = static_cast<std::int64_t>(std::floor(lo_edge));
    std::size_t lo = 0;
    for (const std::int64_t ts : sig) {
        // difference d = ts - ti in [lo_edge, hi_edge)
        while (lo < idl.size() && idl[lo] < ts - ti_min_off) ++lo;
        for (std::size_t j = lo; j < idl.size(); ++j) {
            if (idl[j] > ts - ti_max_off) break;
            const double d = static_cast<double>(ts - idl[j]);
            if (d < lo_edge || d >= hi_edge) continue;
            const auto idx = static_cast<std::size_t>((d - lo_edge) / bin_width);
            if (idx < bins) counts[idx] += 1.0;
        }
    }
}

// 4x4 linear algebra for the fit.
using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

bool solve4(Mat4 a, Vec4 b, Vec4& x)
{
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 4; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

bool invert4(const Mat4& a, Mat4& inv)
{
    for (int col = 0; col < 4; ++col) {
        Vec4 e{0, 0, 0, 0};
        e[col] = 1.0;
        Vec4 x;
        if (!solve4(a, e, x)) return false;
        for (int r = 0; r < 4; ++r) inv[r][col] = x[r];
    }
    return true;
}

struct Model {
    double amp, mu, sigma, base;
    double eval(double x) const
    {
        const double u = (x - mu) / sigma;
        return amp * std::exp(-0.5 * u * u) + base;
    }
};

double cost_of(const Model& m, std::span<const double> xs, std::span<const double> ys)
{
    double c = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - m.eval(xs[i]);
        c += r * r;
    }
    return c;
}

} // namespace

double CoincidenceHistogram::total() const
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

double coarse_offset(const TagStream& sig, const TagStream& idl,
                     double search_span_ps, double coarse_bin_ps)
{
    if (sig.empty() || idl.empty())
        throw AnalysisError("coarse_offset: empty tag stream");
    if (coarse_bin_ps < 1000.0)
        throw AnalysisError("coarse_offset: coarse bin below 1 ns");

    const double lo_edge = -search_span_ps;
    const auto bins = static_cast<std::size_t>(std::ceil(2.0 * search_span_ps / coarse_bin_ps));
    if (bins == 0) throw AnalysisError("coarse_offset: empty search span");
    std::vector<double> counts(bins, 0.0);

    const std::size_t n_sig = std::min(sig.size(), kCoarseMaxSigTags);
    accumulate_differences({sig.t_ps.data(), n_sig}, {idl.t_ps.data(), idl.size()},
                           lo_edge, lo_edge + static_cast<double>(bins) * coarse_bin_ps,
                           coarse_bin_ps, counts);

    std::size_t best = 0;
    for (std::size_t i = 1; i < bins; ++i)
        if (counts[i] > counts[best]) best = i;

    auto bin_center = [&](std::size_t i) {
        return lo_edge + (static_cast<double>(i) + 0.5) * coarse_bin_ps;
    };
    // ties break toward the smallest |delay|
    for (std::size_t i = 0; i < bins; ++i)
        if (counts[i] == counts[best] && std::fabs(bin_center(i)) < std::fabs(bin_center(best)))
            best = i;

    // accidental level from everything away from the peak
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        if (i + 3 >= best && i <= best + 3) continue;
        sum += counts[i];
        ++n;
    }
    const double level = n ? sum / static_cast<double>(n) : 0.0;
    if (counts[best] - level < 5.0 * std::sqrt(std::max(level, 1.0)))
        throw AnalysisError("coarse_offset: no correlation peak above 5 sigma");

    return bin_center(best);
}

CoincidenceHistogram fine_histogram(std::span<const std::int64_t> sig,
                                    std::span<const std::int64_t> idl,
                                    double center_delay_ps, double span_ps,
                                    double bin_width_ps)
{
    const double nbins_d = span_ps / bin_width_ps;
    if (!(nbins_d > 0.0) || nbins_d > 1e6)
        throw AnalysisError("fine_histogram: bin count out of range");
    CoincidenceHistogram h;
    h.bin_width_ps = bin_width_ps;
    const auto bins = static_cast<std::size_t>(std::llround(nbins_d));
    h.span_ps = static_cast<double>(bins) * bin_width_ps;
    // align bin edges to half-integers: tags live on the integer ps lattice,
    // and with integral bin widths this makes every reported bin center the
    // exact mean of the integer values it can hold (no grid-phase bias)
    if (bin_width_ps == std::floor(bin_width_ps)) {
        const double lo = std::round(center_delay_ps - h.span_ps / 2.0) - 0.5;
        h.center_delay_ps = lo + h.span_ps / 2.0;
    } else {
        h.center_delay_ps = center_delay_ps;
    }
    h.counts.assign(bins, 0.0);
    h.n_signal = sig.size();
    h.n_idler = idl.size();
    accumulate_differences(sig, idl, h.lo_edge_ps(), h.lo_edge_ps() + h.span_ps,
                           bin_width_ps, h.counts);
    return h;
}

GaussianFit fit_gaussian(const CoincidenceHistogram& hist)
{
    GaussianFit fit;
    const auto& y = hist.counts;
    const std::size_t bins = y.size();
    if (bins < 8) return fit;

    // initial guesses: max bin (lowest index on ties), edge-region baseline
    std::size_t peak = 0;
    for (std::size_t i = 1; i < bins; ++i)
        if (y[i] > y[peak]) peak = i;

    const std::size_t edge = std::max<std::size_t>(bins / 8, 2);
    double base0 = 0.0;
    for (std::size_t i = 0; i < edge; ++i) base0 += y[i] + y[bins - 1 - i];
    base0 /= static_cast<double>(2 * edge);

    const double amp0 = y[peak] - base0;
    if (amp0 < 5.0) return fit; // nothing fittable above the baseline

    // provisional width from the second moment of the above-threshold region
    // around the peak; a plain half-max crossing is too fragile when the peak
    // amplitude is only tens of counts over a noisy baseline
    const double thresh = base0 + amp0 / 4.0;
    std::size_t l = peak, r = peak;
    int below = 0;
    while (l > 0 && below < 3) {
        if (y[l - 1] >= thresh) below = 0;
        else ++below;
        --l;
    }
    below = 0;
    while (r + 1 < bins && below < 3) {
        if (y[r + 1] >= thresh) below = 0;
        else ++below;
        ++r;
    }
    const double mu0 = hist.bin_center_ps(peak);
    double w_sum = 0.0, w_ss = 0.0;
    for (std::size_t i = l; i <= r; ++i) {
        const double w = std::max(y[i] - base0, 0.0);
        const double dx = hist.bin_center_ps(i) - mu0;
        w_sum += w;
        w_ss += w * dx * dx;
    }
    double sigma0 = w_sum > 0.0 ? std::sqrt(w_ss / w_sum) : hist.bin_width_ps;
    sigma0 = std::max(sigma0, hist.bin_width_ps);
    const double fwhm0 = kFwhmPerSigma * sigma0;

    const double half_window = std::max(3.0 * fwhm0, 15.0 * hist.bin_width_ps);
    const double win_lo = mu0 - half_window;
    const double win_hi = mu0 + half_window;

    std::vector<double> xs, ys;
    xs.reserve(bins);
    ys.reserve(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        const double x = hist.bin_center_ps(i);
        if (x < win_lo || x > win_hi) continue;
        xs.push_back(x);
        ys.push_back(y[i]);
    }
    if (xs.size() < 6) return fit;

    Model m{amp0, mu0, sigma0, base0};
    double lambda = 1e-3;
    double cost = cost_of(m, xs, ys);
    bool converged = false;

    for (int iter = 0; iter < 100; ++iter) {
        Mat4 jtj{};
        Vec4 jtr{0, 0, 0, 0};
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double u = (xs[i] - m.mu) / m.sigma;
            const double g = std::exp(-0.5 * u * u);
            const Vec4 j{g, m.amp * g * u / m.sigma, m.amp * g * u * u / m.sigma, 1.0};
            const double res = ys[i] - (m.amp * g + m.base);
            for (int a = 0; a < 4; ++a) {
                jtr[a] += j[a] * res;
                for (int b = 0; b < 4; ++b) jtj[a][b] += j[a] * j[b];
            }
        }

        Mat4 damped = jtj;
        for (int a = 0; a < 4; ++a) damped[a][a] *= 1.0 + lambda;
        Vec4 step;
        if (!solve4(damped, jtr, step)) break;

        Model trial{m.amp + step[0], m.mu + step[1], m.sigma + step[2], m.base + step[3]};
        if (trial.sigma < 0.1 * hist.bin_width_ps || trial.amp <= 0.0) {
            lambda *= 10.0;
            if (lambda > 1e12) break;
            continue;
        }
        const double trial_cost = cost_of(trial, xs, ys);
        if (trial_cost <= cost) {
            const double rel = std::max({std::fabs(step[0]) / std::max(trial.amp, 1e-12),
                                         std::fabs(step[1]) / std::max(trial.sigma, 1e-12),
                                         std::fabs(step[2]) / std::max(trial.sigma, 1e-12)});
            m = trial;
            const bool tiny = (cost - trial_cost) <= 1e-12 * std::max(cost, 1e-12);
            cost = trial_cost;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-9 || tiny) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }

    if (!converged) return fit;
    if (m.mu < hist.lo_edge_ps() || m.mu > hist.lo_edge_ps() + hist.span_ps) return fit;
    if (kFwhmPerSigma * m.sigma > hist.span_ps) return fit; // degenerate, all baseline

    // count-noise covariance: (JtJ)^-1 Jt V J (JtJ)^-1 with V = diag(model)
    Mat4 jtj{}, jtvj{};
    double pearson = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double u = (xs[i] - m.mu) / m.sigma;
        const double g = std::exp(-0.5 * u * u);
        const Vec4 j{g, m.amp * g * u / m.sigma, m.amp * g * u * u / m.sigma, 1.0};
        const double f = m.amp * g + m.base;
        const double v = std::max(f, 0.0);
        const double res = ys[i] - f;
        pearson += res * res / std::max(f, 1.0);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                jtj[a][b] += j[a] * j[b];
                jtvj[a][b] += j[a] * v * j[b];
            }
    }
    Mat4 inv;
    if (!invert4(jtj, inv)) return fit;
    double var_mu = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) var_mu += inv[1][a] * jtvj[a][b] * inv[1][b];
    if (!(var_mu >= 0.0) || std::sqrt(var_mu) > hist.span_ps) return fit; // ill-conditioned

    fit.converged = true;
    fit.mu_ps = m.mu;
    fit.fwhm_ps = kFwhmPerSigma * m.sigma;
    fit.amplitude = m.amp;
    fit.baseline = m.base;
    fit.mu_stderr_ps = std::sqrt(std::max(var_mu, 0.0));
    fit.chi2_reduced = pearson / static_cast<double>(xs.size() > 4 ? xs.size() - 4 : 1);
    return fit;
}

CoincidenceCounts coincidence_count(const CoincidenceHistogram& hist, const GaussianFit& fit)
{
    if (!fit.converged)
        throw AnalysisError("coincidence_count: fit did not converge");
    CoincidenceCounts out;
    const double lo = fit.mu_ps - fit.fwhm_ps / 2.0;
    const double hi = fit.mu_ps + fit.fwhm_ps / 2.0;
    std::size_t nwin = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double x = hist.bin_center_ps(i);
        if (x < lo || x > hi) continue;
        out.raw_integral += hist.counts[i];
        ++nwin;
    }
    out.n_accidental = fit.baseline * static_cast<double>(nwin);
    out.n_true = out.raw_integral - out.n_accidental;
    return out;
}

void write_histogram(std::ostream& out, const CoincidenceHistogram& hist)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "# center_delay_ps %.6f\n", hist.center_delay_ps);
    out << buf;
    std::snprintf(buf, sizeof buf, "# bin_width_ps %.6f\n", hist.bin_width_ps);
    out << buf;
    std::snprintf(buf, sizeof buf, "# n_signal %zu n_idler %zu\n", hist.n_signal, hist.n_idler);
    out << buf;
    for (const double c : hist.counts) {
        std::snprintf(buf, sizeof buf, "%.0f\n", c);
        out << buf;
    }
}

CoincidenceHistogram read_histogram(std::istream& in)
{
    CoincidenceHistogram h;
    std::string line;
    h.counts.clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("center_delay_ps") != std::string::npos)
                h.center_delay_ps = std::stod(line.substr(line.find("ps") + 2));
            else if (line.find("bin_width_ps") != std::string::npos)
                h.bin_width_ps = std::stod(line.substr(line.find("ps") + 2));
            continue;
        }
        h.counts.push_back(std::stod(line));
    }
    h.span_ps = static_cast<double>(h.counts.size()) * h.bin_width_ps;
    return h;
}

} // namespace qtwtt
