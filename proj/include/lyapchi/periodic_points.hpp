#ifndef LYAPCHI_PERIODIC_POINTS_HPP
#define LYAPCHI_PERIODIC_POINTS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lyapchi/circle_map.hpp"
#include "lyapchi/detail/parallel.hpp"
#include "lyapchi/errors.hpp"
#include "lyapchi/stats.hpp"

namespace lyapchi {

// One periodic point of f^n. `branch` is the integer level solved in the lift
// equation F^n(x) = x + branch + floor(F^n(0)); `residual` is the backward
// error in x, |F^n(x) - x - level| / ((F^n)'(x) - 1), i.e. the first-order
// distance from the stored point to the exact root.
struct PeriodicPointRecord {
    std::int64_t branch = 0;
    int period = 0;
    double point = 0.0;
    double exponent = 0.0;
    double residual = 0.0;
};

struct EnumerateOptions {
    std::uint64_t cap = std::uint64_t{1} << 26;
};

namespace detail {

struct OrbitEval {
    double frac = 0.0;         // f^n(x) in [0,1)
    std::int64_t digits = 0;   // F^n(x) = frac + digits, digits exact
    double deriv = 1.0;        // (F^n)'(x)
    double log_sum = 0.0;      // sum of ln f' along the orbit
};

// Iterates the lift with mod-1 reduction each step. The reduction y - floor(y)
// is exact in IEEE arithmetic, so `digits` carries the integer part of F^n(x)
// without rounding; only `frac` accumulates roundoff.
inline OrbitEval eval_orbit(const CircleMap& map, int n, double x, bool with_logs) {
    OrbitEval ev;
    double cur = x;
    const std::int64_t k = map.degree();
    for (int i = 0; i < n; ++i) {
        const double fp = map.derivative(cur);
        ev.deriv *= fp;
        if (with_logs) ev.log_sum += std::log(fp);
        const double y = map.lift(cur);
        const double j = std::floor(y);
        ev.digits = ev.digits * k + static_cast<std::int64_t>(j);
        cur = y - j;
    }
    ev.frac = cur;
    return ev;
}

// K^n - 1 with overflow guard (n up to 62 bits total).
inline std::uint64_t fix_count(int degree, int n) {
    if (n < 1) throw InvalidParameter("period must be >= 1");
    std::uint64_t count = 1;
    for (int i = 0; i < n; ++i) {
        if (count > (std::uint64_t{1} << 62) / static_cast<unsigned>(degree))
            throw CapExceeded("K^n overflows the branch index range");
        count *= static_cast<unsigned>(degree);
    }
    return count - 1;
}

// floor(F^n(0)); the orbit of 0 is computed exactly for the built-in maps.
// If f^n(0) lands within snapping distance below 1, the fractional part is
// roundoff from a genuinely periodic 0 and the floor is bumped accordingly.
inline std::int64_t lift_level_offset(const CircleMap& map, int n) {
    const OrbitEval ev = eval_orbit(map, n, 0.0, false);
    return ev.frac > 1.0 - 1e-11 ? ev.digits + 1 : ev.digits;
}

struct LevelRoot {
    double x = 0.0;
    double residual = 0.0;
    double exponent = 0.0;
};

// Solves F^n(x) = x + level on the bracket by Newton steps safeguarded with
// bisection. tau(x) = (frac - x) + (digits - level) is strictly increasing
// with slope >= lambda_*^n - 1, and the bracket invariant tau(lo) <= 0 <=
// tau(hi) is maintained throughout. Roots at the right endpoint (the wrap
// point x = 1) are reached exactly because tau there is integer-valued.
inline LevelRoot solve_level(const CircleMap& map, int n, std::int64_t level,
                             double lo, double hi, double guess) {
    double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    double prev = -1.0;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        const OrbitEval ev = eval_orbit(map, n, x, false);
        const double tau = (ev.frac - x) + static_cast<double>(ev.digits - level);
        if (tau == 0.0) {
            converged = true;
            break;
        }
        if (tau > 0.0) hi = x; else lo = x;
        double next = x - tau / (ev.deriv - 1.0);
        if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
        if (next == x || next == prev) {
            converged = true;
            break;
        }
        prev = x;
        x = next;
    }
    const OrbitEval fin = eval_orbit(map, n, x, true);
    LevelRoot root;
    root.x = x;
    root.residual = std::fabs((fin.frac - x) + static_cast<double>(fin.digits - level)) /
                    (fin.deriv - 1.0);
    root.exponent = fin.log_sum / n;
    if (!converged || !(root.residual <= 1e-12))
        throw ConvergenceFailure("branch solve stalled at level " + std::to_string(level) +
                                 ", period " + std::to_string(n));
    return root;
}

} // namespace detail

// The unique x with F^n(x) = x + m + floor(F^n(0)), solved on (0, 1] with the
// x = 1 solution wrapped to 0 (the circle identifies the endpoints, so the
// top branch contributes the point 0 once).
inline PeriodicPointRecord solve_branch(const CircleMap& map, int n, std::int64_t m) {
    const std::uint64_t count = detail::fix_count(map.degree(), n);
    if (m < 1 || static_cast<std::uint64_t>(m) > count)
        throw InvalidParameter("branch index must lie in [1, K^n - 1]");
    const std::int64_t level = m + detail::lift_level_offset(map, n);
    const double guess = static_cast<double>(m) / static_cast<double>(count);
    detail::LevelRoot root = detail::solve_level(map, n, level, 0.0, 1.0, guess);
    PeriodicPointRecord rec;
    rec.branch = m;
    rec.period = n;
    rec.point = root.x == 1.0 ? 0.0 : root.x;
    rec.exponent = root.exponent;
    rec.residual = root.residual;
    return rec;
}

// All K^n - 1 points of Fix(f^n), emitted sorted ascending by point; each
// record keeps its branch index. Branch solves are grid-bracketed from a
// coarse scan of G(x) = F^n(x) - x and run in parallel over disjoint output
// slots, so the result is bitwise independent of the worker count.
inline std::vector<PeriodicPointRecord> enumerate_fix(const CircleMap& map, int n,
                                                      const EnumerateOptions& opts = {}) {
    const std::uint64_t count = detail::fix_count(map.degree(), n);
    if (count > opts.cap)
        throw CapExceeded("Fix(f^" + std::to_string(n) + ") has " + std::to_string(count) +
                          " points, above the cap " + std::to_string(opts.cap));
    const std::int64_t offset = detail::lift_level_offset(map, n);

    // Coarse monotone scan; one cell of padding absorbs its rounding error.
    const std::size_t grid = std::min<std::size_t>(
        32768, std::max<std::size_t>(1024, std::bit_ceil(count)));
    std::vector<double> gvals(grid + 1);
    detail::parallel_for(grid, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const double x = static_cast<double>(s) / static_cast<double>(grid);
            const detail::OrbitEval ev = detail::eval_orbit(map, n, x, false);
            gvals[s] = (ev.frac - x) + static_cast<double>(ev.digits);
        }
    });
    gvals[grid] = gvals[0] + static_cast<double>(count);

    std::vector<PeriodicPointRecord> records(count);
    detail::parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const std::int64_t m = static_cast<std::int64_t>(idx) + 1;
            const double level = static_cast<double>(m + offset);
            const std::size_t s =
                std::upper_bound(gvals.begin(), gvals.end(), level) - gvals.begin();
            const std::size_t cell = s == 0 ? 0 : s - 1;
            const double lo =
                cell == 0 ? 0.0 : static_cast<double>(cell - 1) / static_cast<double>(grid);
            const double hi =
                std::min<double>(1.0, static_cast<double>(cell + 2) / static_cast<double>(grid));
            double guess = 0.5 * (lo + hi);
            if (cell < grid && gvals[cell + 1] > gvals[cell]) {
                const double t = (level - gvals[cell]) / (gvals[cell + 1] - gvals[cell]);
                guess = (static_cast<double>(cell) + t) / static_cast<double>(grid);
            }
            const detail::LevelRoot root =
                detail::solve_level(map, n, m + offset, lo, hi, guess);
            PeriodicPointRecord& rec = records[idx];
            rec.branch = m;
            rec.period = n;
            rec.point = root.x == 1.0 ? 0.0 : root.x;
            rec.exponent = root.exponent;
            rec.residual = root.residual;
        }
    });

    std::sort(records.begin(), records.end(),
              [](const PeriodicPointRecord& a, const PeriodicPointRecord& b) {
                  return a.point < b.point;
              });
    return records;
}

// The exponents of Fix(f^n) as a sorted multiset.
inline EmpiricalDistribution exponent_multiset(const CircleMap& map, int n,
                                               const EnumerateOptions& opts = {}) {
    const std::vector<PeriodicPointRecord> records = enumerate_fix(map, n, opts);
    std::vector<double> exponents;
    exponents.reserve(records.size());
    for (const PeriodicPointRecord& rec : records) exponents.push_back(rec.exponent);
    return EmpiricalDistribution::from_values(std::move(exponents), n);
}

// (1/n) sum_{k<n} g(f^k x).
inline double birkhoff_average(const CircleMap& map, const std::function<double(double)>& g,
                               double x, int n) {
    if (n < 1) throw InvalidParameter("birkhoff average needs n >= 1");
    double sum = 0.0;
    double cur = x;
    for (int k = 0; k < n; ++k) {
        sum += g(cur);
        cur = map.step(cur);
    }
    return sum / n;
}

} // namespace lyapchi

#endif // LYAPCHI_PERIODIC_POINTS_HPP
