#ifndef LYAPCHI_STATS_HPP
#define LYAPCHI_STATS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "lyapchi/detail/summation.hpp"
#include "lyapchi/errors.hpp"
#include "lyapchi/normal.hpp"

namespace lyapchi {

// The multiset of periodic Lyapunov exponents of Fix(f^n), kept sorted.
struct EmpiricalDistribution {
    std::vector<double> values; // ascending
    int period = 0;

    std::size_t count() const { return values.size(); }

    static EmpiricalDistribution from_values(std::vector<double> vals, int period) {
        std::sort(vals.begin(), vals.end());
        return EmpiricalDistribution{std::move(vals), period};
    }
};

struct Histogram {
    std::vector<double> bin_edges;        // bins + 1 edges, equal widths
    std::vector<std::uint64_t> counts;    // right-open bins, last bin closed
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw EmptyDistribution("mean of an empty sample");
    return detail::pairwise_sum(xs) / static_cast<double>(xs.size());
}

// Population variance (divide by N), two-pass.
inline double variance_two_pass(std::span<const double> xs) {
    const double m = mean(xs);
    const double ss = detail::pairwise_sum_transform(
        0, xs.size(), [&](std::size_t i) { return (xs[i] - m) * (xs[i] - m); });
    return ss / static_cast<double>(xs.size());
}

// Population variance via Welford's streaming recurrence; used as the
// independent route in the two-way consistency check.
inline double variance_streaming(std::span<const double> xs) {
    if (xs.empty()) throw EmptyDistribution("variance of an empty sample");
    double m = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (double x : xs) {
        ++n;
        const double d = x - m;
        m += d / static_cast<double>(n);
        m2 += d * (x - m);
    }
    return m2 / static_cast<double>(n);
}

// Fraction of values in the closed interval [a, b]; exact counting on the
// sorted list, no binning. b may be +infinity.
inline double interval_probability(const EmpiricalDistribution& dist, double a, double b) {
    if (dist.values.empty()) throw EmptyDistribution("interval probability of an empty sample");
    if (!(a <= b)) throw InvalidParameter("interval_probability needs a <= b");
    const auto lo = std::lower_bound(dist.values.begin(), dist.values.end(), a);
    const auto hi = std::upper_bound(dist.values.begin(), dist.values.end(), b);
    return static_cast<double>(hi - lo) / static_cast<double>(dist.values.size());
}

// v -> (v - chi_bar) sqrt(n) / sigma, order preserved.
inline EmpiricalDistribution normalize(const EmpiricalDistribution& dist, double chi_bar,
                                       double sigma) {
    if (!(sigma > 1e-9))
        throw DegenerateSigma("cannot normalize with sigma = " + std::to_string(sigma));
    const double scale = std::sqrt(static_cast<double>(dist.period)) / sigma;
    EmpiricalDistribution out;
    out.period = dist.period;
    out.values.reserve(dist.values.size());
    for (double v : dist.values) out.values.push_back((v - chi_bar) * scale);
    return out;
}

// Exact sup distance between the empirical step CDF and the standard normal
// CDF: the supremum is attained at a sample point from one side or the other.
inline double ks_distance(const EmpiricalDistribution& dist) {
    const std::size_t n = dist.values.size();
    if (n == 0) throw EmptyDistribution("KS distance of an empty sample");
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = normal_cdf(dist.values[i]);
        d = std::max(d, static_cast<double>(i + 1) / static_cast<double>(n) - phi);
        d = std::max(d, phi - static_cast<double>(i) / static_cast<double>(n));
    }
    return d;
}

// Psi_n(lambda) = mean of exp(i lambda v); Psi_n(0) = 1 exactly.
inline std::complex<double> characteristic_fn(const EmpiricalDistribution& dist, double lambda) {
    const std::size_t n = dist.values.size();
    if (n == 0) throw EmptyDistribution("characteristic function of an empty sample");
    const double re = detail::pairwise_sum_transform(
        0, n, [&](std::size_t i) { return std::cos(lambda * dist.values[i]); });
    const double im = detail::pairwise_sum_transform(
        0, n, [&](std::size_t i) { return std::sin(lambda * dist.values[i]); });
    return {re / static_cast<double>(n), im / static_cast<double>(n)};
}

// Equal-width bins spanning [min, max]; right-open except the last.
inline Histogram histogram(const EmpiricalDistribution& dist, int bins = 100) {
    if (bins < 1) throw InvalidParameter("histogram needs at least one bin");
    if (dist.values.size() < 2) throw EmptyDistribution("histogram needs at least two values");
    const double lo = dist.values.front();
    const double hi = dist.values.back();
    if (!(hi > lo)) throw DegenerateRange("all sample values are equal");
    Histogram h;
    h.bin_edges.resize(bins + 1);
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) h.bin_edges[i] = lo + width * i;
    h.bin_edges[bins] = hi;
    for (double v : dist.values) {
        int idx = static_cast<int>((v - lo) / width);
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[idx];
    }
    return h;
}

// Qualitative unimodality after a centered moving-average smooth: counts must
// be non-decreasing up to two bins before the smoothed peak and non-increasing
// from two bins after it, ignoring wiggles below `noise_fraction` of the peak
// (far tails hold isolated single counts). The defaults are calibrated to the
// periodic-exponent histograms: at desk-scale periods the multiset has a
// near-lattice comb of period ~6 bins (orbit averages cluster by itinerary
// class), so the window must span a couple of comb periods.
inline bool is_smoothed_unimodal(const Histogram& h, int window = 15,
                                 double noise_fraction = 0.01) {
    const int bins = static_cast<int>(h.counts.size());
    if (bins == 0) return false;
    const int half = window / 2;
    std::vector<double> smooth(bins);
    for (int i = 0; i < bins; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(bins - 1, i + half);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += static_cast<double>(h.counts[j]);
        smooth[i] = acc / (hi - lo + 1);
    }
    const int peak = static_cast<int>(std::max_element(smooth.begin(), smooth.end()) -
                                      smooth.begin());
    const double floor_level = noise_fraction * smooth[peak];
    for (int i = 0; i + 1 <= peak - 2; ++i)
        if (smooth[i + 1] < smooth[i] && std::max(smooth[i], smooth[i + 1]) >= floor_level)
            return false;
    for (int i = peak + 2; i + 1 < bins; ++i)
        if (smooth[i + 1] > smooth[i] && std::max(smooth[i], smooth[i + 1]) >= floor_level)
            return false;
    return true;
}

} // namespace lyapchi

#endif // LYAPCHI_STATS_HPP
