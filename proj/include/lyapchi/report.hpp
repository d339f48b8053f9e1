#ifndef LYAPCHI_REPORT_HPP
#define LYAPCHI_REPORT_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "lyapchi/circle_map.hpp"
#include "lyapchi/periodic_points.hpp"
#include "lyapchi/spectral.hpp"
#include "lyapchi/stats.hpp"

namespace lyapchi {

struct IntervalDiscrepancy {
    double a = 0.0;
    double b = 0.0;           // may be +infinity
    double empirical = 0.0;   // P(normalized exponent in [a, b])
    double normal_mass = 0.0; // Phi(b) - Phi(a)
    double discrepancy = 0.0;
};

struct CharFnDiscrepancy {
    double lambda = 0.0;
    std::complex<double> psi;
    double discrepancy = 0.0; // |Psi_n(lambda) - exp(-lambda^2/2)|
};

// Per-period summary of the distance between the empirical law of the
// normalized exponents and the standard normal.
struct CltReport {
    int period = 0;
    std::uint64_t count = 0;
    double chi_bar = 0.0;
    double sigma = 0.0;
    double mean_error = 0.0;      // |E(chi_n) - chi_bar|
    double variance_error = 0.0;  // |n Var(chi_n) - sigma^2|
    double ks_distance = 0.0;
    std::vector<IntervalDiscrepancy> interval_discrepancies;
    std::vector<CharFnDiscrepancy> char_fn_discrepancies;
};

struct CltOptions {
    int modes = 64;
    std::uint64_t cap = std::uint64_t{1} << 26;
    std::vector<std::pair<double, double>> intervals = {
        {-1.0, 1.0},
        {-2.0, 2.0},
        {0.0, std::numeric_limits<double>::infinity()},
        {1.0, std::numeric_limits<double>::infinity()}};
    std::vector<double> lambdas = {0.5, 1.0, 2.0};
};

// Assembles a report from an already-enumerated multiset and precomputed CLT
// parameters; clt_report below is the convenience wrapper. Splitting the two
// lets studies over many periods reuse one spectral solve.
inline CltReport clt_report_from(const EmpiricalDistribution& dist, double chi_bar,
                                 double sigma_squared, const CltOptions& opts = {}) {
    if (!(sigma_squared > 1e-9))
        throw DegenerateSigma("CLT report needs a nondegenerate asymptotic variance");
    const double sigma = std::sqrt(sigma_squared);

    CltReport report;
    report.period = dist.period;
    report.count = dist.count();
    report.chi_bar = chi_bar;
    report.sigma = sigma;
    report.mean_error = std::fabs(mean(dist.values) - chi_bar);
    report.variance_error =
        std::fabs(dist.period * variance_two_pass(dist.values) - sigma_squared);

    const EmpiricalDistribution normalized = normalize(dist, chi_bar, sigma);
    report.ks_distance = ks_distance(normalized);
    for (const auto& [a, b] : opts.intervals) {
        IntervalDiscrepancy d;
        d.a = a;
        d.b = b;
        d.empirical = interval_probability(normalized, a, b);
        d.normal_mass = normal_cdf(b) - normal_cdf(a);
        d.discrepancy = std::fabs(d.empirical - d.normal_mass);
        report.interval_discrepancies.push_back(d);
    }
    for (double lambda : opts.lambdas) {
        CharFnDiscrepancy c;
        c.lambda = lambda;
        c.psi = characteristic_fn(normalized, lambda);
        c.discrepancy = std::abs(c.psi - std::complex<double>{std::exp(-0.5 * lambda * lambda), 0.0});
        report.char_fn_discrepancies.push_back(c);
    }
    return report;
}

inline CltReport clt_report(const CircleMap& map, int n, const CltOptions& opts = {}) {
    const SpectrumSummary summary = spectrum_summary(map, opts.modes);
    if (summary.variance.degenerate)
        throw DegenerateSigma("asymptotic variance is degenerate for " + map.id());
    const EmpiricalDistribution dist = exponent_multiset(map, n, EnumerateOptions{opts.cap});
    return clt_report_from(dist, summary.chi_bar, summary.variance.sigma_squared, opts);
}

// Least-squares slope of log(y) against log(x); pairs with y <= 0 are
// rejected since a clean decay fit is meaningless there.
inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidParameter("decay fit needs at least two samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw InvalidParameter("decay fit needs positive samples");
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(xs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Least-squares slope of log(y) against x (geometric-rate fit).
inline double fit_log_linear_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidParameter("rate fit needs at least two samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0.0)) throw InvalidParameter("rate fit needs positive samples");
        const double ly = std::log(ys[i]);
        sx += xs[i];
        sy += ly;
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ly;
    }
    const double n = static_cast<double>(xs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace lyapchi

#endif // LYAPCHI_REPORT_HPP
