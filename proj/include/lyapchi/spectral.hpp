#ifndef LYAPCHI_SPECTRAL_HPP
#define LYAPCHI_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lyapchi/circle_map.hpp"
#include "lyapchi/detail/parallel.hpp"
#include "lyapchi/errors.hpp"

namespace lyapchi {

using Complex = std::complex<double>;

// Galerkin discretization of the normalized (optionally twisted) transfer
// operator in the basis e^{2 pi i k x}, k = -N..N:
//
//   (M phi)(x) = K^{-1} sum_{f(y)=x} e^{i t hhat(y)} phi(y),
//
// with matrix entries computed by the change-of-variables quadrature
//   M_{kl} = (KQ)^{-1} sum_q e^{-2 pi i k F(y_q)} e^{i t hhat(y_q)} f'(y_q)
//            e^{2 pi i l y_q}
// on the equispaced grid y_q = q/Q. All integrands are smooth and 1-periodic,
// so the trapezoid sum is spectrally accurate; Q >= 16 N (1 + K) keeps the
// effective frequency K N + N well below the alias limit.
struct SpectralModel {
    CircleMap map;
    int modes;        // N
    double twist;     // t; 0 is the plain operator
    double chi_bar;   // centering constant behind hhat (used when twist != 0)
    std::size_t quadrature;
    std::vector<Complex> matrix;        // (2N+1)^2, row-major, row = output freq
    Complex leading_eigenvalue;
    std::vector<Complex> eigenmeasure;  // adjoint leading vector; moments with m_0 = 1 at t = 0
    std::vector<Complex> eigenfunction; // leading right vector, unit l2 norm

    int dim() const { return 2 * modes + 1; }
};

struct VarianceEstimate {
    double sigma_squared = 0.0;
    int truncation = 0;          // J: autocorrelation lags summed
    double tail_bound = 0.0;     // extrapolated magnitude of the dropped tail
    std::vector<double> terms;   // mu(hhat (hhat o f^j)), j = 0..J
    bool degenerate = false;     // sigma^2 below 1e-9: numerically conjugate to linear
};

namespace detail {

constexpr double kEigenTol = 1e-12;
constexpr double kTailTol = 1e-10;
constexpr int kMaxModes = 512;

// Dense phase table e^{2 pi i k q / Q}; the argument is reduced through the
// exact integer (k q mod Q) so table phases carry no argument-size error.
struct FourierTable {
    std::size_t Q = 0;
    int modes = 0;
    std::vector<Complex> phases; // [(k + N) * Q + q]

    FourierTable(int n_modes, std::size_t q_points) : Q(q_points), modes(n_modes) {
        const int dim = 2 * modes + 1;
        phases.resize(static_cast<std::size_t>(dim) * Q);
        const auto iq = static_cast<std::int64_t>(Q);
        for (int k = -modes; k <= modes; ++k) {
            Complex* row = phases.data() + static_cast<std::size_t>(k + modes) * Q;
            for (std::size_t q = 0; q < Q; ++q) {
                std::int64_t r = (k * static_cast<std::int64_t>(q)) % iq;
                if (r < 0) r += iq;
                row[q] = std::polar(1.0, kTwoPi * static_cast<double>(r) / static_cast<double>(Q));
            }
        }
    }

    const Complex* row(int k) const {
        return phases.data() + static_cast<std::size_t>(k + modes) * Q;
    }
};

inline std::vector<Complex> synthesize(const FourierTable& table,
                                       const std::vector<Complex>& coeffs) {
    std::vector<Complex> values(table.Q, Complex{0.0, 0.0});
    for (int k = -table.modes; k <= table.modes; ++k) {
        const Complex c = coeffs[static_cast<std::size_t>(k + table.modes)];
        if (c == Complex{0.0, 0.0}) continue;
        const Complex* row = table.row(k);
        for (std::size_t q = 0; q < table.Q; ++q) values[q] += c * row[q];
    }
    return values;
}

inline std::vector<Complex> analyze(const FourierTable& table,
                                    const std::vector<Complex>& values) {
    const int dim = 2 * table.modes + 1;
    std::vector<Complex> coeffs(dim);
    for (int k = -table.modes; k <= table.modes; ++k) {
        const Complex* row = table.row(k);
        Complex acc{0.0, 0.0};
        for (std::size_t q = 0; q < table.Q; ++q) acc += values[q] * std::conj(row[q]);
        coeffs[static_cast<std::size_t>(k + table.modes)] =
            acc / static_cast<double>(table.Q);
    }
    return coeffs;
}

// Largest coefficient magnitude in the top 1/8 frequency band.
inline double coefficient_tail(const std::vector<Complex>& coeffs, int modes) {
    const int band = std::max(1, modes / 8);
    double tail = 0.0;
    for (int k = modes - band + 1; k <= modes; ++k) {
        tail = std::max(tail, std::abs(coeffs[static_cast<std::size_t>(modes + k)]));
        tail = std::max(tail, std::abs(coeffs[static_cast<std::size_t>(modes - k)]));
    }
    return tail;
}

inline void require_resolved(const std::vector<Complex>& coeffs, int modes,
                             const char* what) {
    double scale = 1.0;
    for (const Complex& c : coeffs) scale = std::max(scale, std::abs(c));
    if (coefficient_tail(coeffs, modes) > kTailTol * scale)
        throw ResolutionError(std::string(what) +
                              " has coefficient tail above 1e-10; raise the mode count");
}

inline std::vector<Complex> apply_matrix(const std::vector<Complex>& m, int dim,
                                         const std::vector<Complex>& v) {
    std::vector<Complex> out(dim, Complex{0.0, 0.0});
    for (int r = 0; r < dim; ++r) {
        const Complex* row = m.data() + static_cast<std::size_t>(r) * dim;
        Complex acc{0.0, 0.0};
        for (int c = 0; c < dim; ++c) acc += row[c] * v[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
}

inline std::vector<Complex> apply_matrix_transpose(const std::vector<Complex>& m, int dim,
                                                   const std::vector<Complex>& v) {
    std::vector<Complex> out(dim, Complex{0.0, 0.0});
    for (int r = 0; r < dim; ++r) {
        const Complex vr = v[static_cast<std::size_t>(r)];
        if (vr == Complex{0.0, 0.0}) continue;
        const Complex* row = m.data() + static_cast<std::size_t>(r) * dim;
        for (int c = 0; c < dim; ++c) out[static_cast<std::size_t>(c)] += row[c] * vr;
    }
    return out;
}

inline double norm2(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const Complex& x : v) s += std::norm(x);
    return std::sqrt(s);
}

// Plain power iteration with a Rayleigh-quotient eigenvalue. The spectral gap
// of the normalized operator makes this converge geometrically; if it fails
// to settle the caller sees ResolutionError instead of a guess.
template <class Apply>
inline std::pair<Complex, std::vector<Complex>> power_iterate(int dim, Apply&& apply,
                                                              std::vector<Complex> v) {
    double nv = norm2(v);
    if (nv == 0.0) throw ResolutionError("power iteration started from the zero vector");
    for (Complex& x : v) x /= nv;
    for (int it = 0; it < 20000; ++it) {
        std::vector<Complex> w = apply(v);
        Complex kappa{0.0, 0.0};
        for (int i = 0; i < dim; ++i)
            kappa += std::conj(v[static_cast<std::size_t>(i)]) * w[static_cast<std::size_t>(i)];
        double residual = 0.0;
        for (int i = 0; i < dim; ++i)
            residual += std::norm(w[static_cast<std::size_t>(i)] -
                                  kappa * v[static_cast<std::size_t>(i)]);
        residual = std::sqrt(residual);
        const double nw = norm2(w);
        if (nw == 0.0) throw ResolutionError("power iteration collapsed to zero");
        for (Complex& x : w) x /= nw;
        v = std::move(w);
        if (residual <= kEigenTol * std::max(1.0, std::abs(kappa))) return {kappa, v};
    }
    throw ResolutionError("power iteration did not settle; maximal eigenvalue ambiguous");
}

inline std::size_t quadrature_size(int modes, int degree) {
    return static_cast<std::size_t>(16) * static_cast<std::size_t>(modes) *
           static_cast<std::size_t>(1 + degree);
}

template <class Fn>
inline auto with_mode_retry(int start_modes, Fn&& fn) {
    int n = start_modes;
    for (;;) {
        try {
            return fn(n);
        } catch (const ResolutionError&) {
            if (n >= kMaxModes) throw;
            n = std::min(kMaxModes, 2 * n);
        }
    }
}

} // namespace detail

// Builds the (2N+1)-mode model. For twist != 0 the caller must supply the
// centering constant chi_bar = mu(h) computed from a t = 0 model first.
inline SpectralModel build_model(const CircleMap& map, int modes, double twist = 0.0,
                                 double chi_bar = 0.0) {
    if (modes < 8) throw InvalidParameter("spectral model needs at least 8 modes");
    const int dim = 2 * modes + 1;
    const int degree = map.degree();
    const std::size_t Q = detail::quadrature_size(modes, degree);

    // Per-node data: fractional part of F (the integer part contributes
    // nothing to e^{-2 pi i k F}), and the quadrature weight.
    std::vector<double> f_frac(Q);
    std::vector<Complex> weight(Q);
    for (std::size_t q = 0; q < Q; ++q) {
        const double y = static_cast<double>(q) / static_cast<double>(Q);
        const double fy = map.lift(y);
        f_frac[q] = fy - std::floor(fy);
        const double w = map.derivative(y) / (static_cast<double>(degree) * static_cast<double>(Q));
        if (twist != 0.0) {
            const double hhat = std::log(map.derivative(y)) - chi_bar;
            weight[q] = std::polar(w, twist * hhat);
        } else {
            weight[q] = Complex{w, 0.0};
        }
    }

    const detail::FourierTable table(modes, Q);
    SpectralModel model{map,   modes, twist, chi_bar, Q, {}, Complex{0.0, 0.0}, {}, {}};
    model.matrix.resize(static_cast<std::size_t>(dim) * dim);

    detail::parallel_for(static_cast<std::size_t>(dim), [&](std::size_t begin, std::size_t end) {
        std::vector<Complex> a(Q);
        for (std::size_t r = begin; r < end; ++r) {
            const int k = static_cast<int>(r) - modes;
            for (std::size_t q = 0; q < Q; ++q)
                a[q] = weight[q] * std::polar(1.0, -kTwoPi * k * f_frac[q]);
            Complex* out = model.matrix.data() + r * dim;
            for (int l = -modes; l <= modes; ++l) {
                const Complex* row = table.row(l);
                Complex acc{0.0, 0.0};
                for (std::size_t q = 0; q < Q; ++q) acc += a[q] * row[q];
                out[l + modes] = acc;
            }
        }
    });

    // Leading left vector (the eigenmeasure at t = 0) and right vector.
    std::vector<Complex> start(dim, Complex{0.0, 0.0});
    start[static_cast<std::size_t>(modes)] = Complex{1.0, 0.0};
    auto [kappa, left] = detail::power_iterate(
        dim,
        [&](const std::vector<Complex>& v) {
            return detail::apply_matrix_transpose(model.matrix, dim, v);
        },
        start);
    auto [kappa_right, right] = detail::power_iterate(
        dim,
        [&](const std::vector<Complex>& v) {
            return detail::apply_matrix(model.matrix, dim, v);
        },
        start);
    (void)kappa_right;

    model.leading_eigenvalue = kappa;
    if (twist == 0.0) {
        const Complex m0 = left[static_cast<std::size_t>(modes)];
        if (std::abs(m0) < 1e-8)
            throw ResolutionError("eigenmeasure has vanishing mass coefficient");
        for (Complex& x : left) x /= m0;
    }
    model.eigenmeasure = std::move(left);
    model.eigenfunction = std::move(right);

    // Resolution check on the decaying eigendata: the leading eigenfunction
    // of a smooth expanding map is smooth, so its truncated tail must be
    // negligible once N is large enough.
    detail::require_resolved(model.eigenfunction, modes, "leading eigenfunction");
    return model;
}

// Coefficients of phi in the model basis by quadrature on the model grid,
// with the same resolution guard applied to the expansion tail.
inline std::vector<Complex> expand_observable(const SpectralModel& model,
                                              const std::function<double(double)>& phi) {
    const std::size_t Q = model.quadrature;
    std::vector<Complex> values(Q);
    for (std::size_t q = 0; q < Q; ++q)
        values[q] = Complex{phi(static_cast<double>(q) / static_cast<double>(Q)), 0.0};
    const detail::FourierTable table(model.modes, Q);
    std::vector<Complex> coeffs = detail::analyze(table, values);
    detail::require_resolved(coeffs, model.modes, "observable expansion");
    return coeffs;
}

inline Complex pair_with_measure(const SpectralModel& model, const std::vector<Complex>& coeffs) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < coeffs.size(); ++i) acc += model.eigenmeasure[i] * coeffs[i];
    return acc;
}

// The discretized operator applied to a coefficient vector.
inline std::vector<Complex> apply_operator(const SpectralModel& model,
                                           const std::vector<Complex>& coeffs) {
    return detail::apply_matrix(model.matrix, model.dim(), coeffs);
}

// mu(phi): pairing of the normalized leading eigenmeasure with phi.
inline double mme_integral(const SpectralModel& model, const std::function<double(double)>& phi) {
    if (model.twist != 0.0)
        throw InvalidParameter("mme_integral requires the untwisted (t = 0) model");
    return pair_with_measure(model, expand_observable(model, phi)).real();
}

// K^{-n} sum_{y in f^{-n}(z)} phi(y): the full preimage tree by per-branch
// lift solves. Serves as the brute-force oracle for mme_integral.
inline double preimage_average(const CircleMap& map, const std::function<double(double)>& phi,
                               int depth, double anchor) {
    if (depth < 0 || !(anchor >= 0.0 && anchor < 1.0))
        throw InvalidParameter("preimage_average needs depth >= 0 and anchor in [0,1)");
    const int degree = map.degree();
    double tree = 1.0;
    for (int i = 0; i < depth; ++i) {
        tree *= degree;
        if (tree > 16777216.0) throw CapExceeded("preimage tree larger than 2^24 leaves");
    }
    const double f0 = map.lift(0.0);

    // Monotone solve of F(y) = target on [0, 1]; f' > 1 makes plain Newton
    // with a bisection safeguard globally convergent.
    auto invert = [&](double target) {
        double lo = 0.0, hi = 1.0;
        double x = std::clamp((target - f0) / degree, 0.0, 1.0);
        double prev = -1.0;
        for (int it = 0; it < 100; ++it) {
            const double tau = map.lift(x) - target;
            if (tau == 0.0) return x;
            if (tau > 0.0) hi = x; else lo = x;
            double next = x - tau / map.derivative(x);
            if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
            if (next == x || next == prev) return next;
            prev = x;
            x = next;
        }
        throw ConvergenceFailure("preimage solve stalled");
    };

    std::function<double(double, int)> walk = [&](double z, int d) -> double {
        if (d == 0) return phi(z);
        const auto j0 = static_cast<std::int64_t>(std::ceil(f0 - z));
        double sum = 0.0;
        for (int b = 0; b < degree; ++b) {
            const double y = invert(z + static_cast<double>(j0 + b));
            sum += walk(y >= 1.0 ? 0.0 : y, d - 1);
        }
        return sum / degree;
    };
    return walk(anchor, depth);
}

struct MeanExponent {
    double chi_bar = 0.0;
    Observable centered; // hhat = h - chi_bar, with hhat' = h'
};

// chi_bar = mu(ln f') from the t = 0 model (mode count doubled on
// ResolutionError, up to 512), plus the centered observable.
inline MeanExponent mean_exponent(const CircleMap& map, int modes = 64) {
    const Observable h = log_derivative(map);
    const double chi_bar = detail::with_mode_retry(modes, [&](int n) {
        return mme_integral(build_model(map, n), h.value);
    });
    MeanExponent out;
    out.chi_bar = chi_bar;
    out.centered.value = [h, chi_bar](double x) { return h.value(x) - chi_bar; };
    out.centered.derivative = h.derivative;
    return out;
}

namespace detail {

// Green-Kubo machinery shared by autocorrelation and asymptotic_variance.
// Correlations are computed as mu(hhat . K^{-j} L^j hhat): the coefficient
// vector of hhat is pushed through the model matrix, multiplied by hhat on
// the quadrature grid, re-expanded, and paired with the eigenmeasure.
struct CorrelationEngine {
    SpectralModel model;
    FourierTable table;
    std::vector<Complex> hhat_coeffs;
    std::vector<Complex> hhat_grid;
    double chi_bar;

    explicit CorrelationEngine(const CircleMap& map, int modes)
        : model(build_model(map, modes)),
          table(modes, model.quadrature),
          chi_bar(0.0) {
        const Observable h = log_derivative(map);
        std::vector<Complex> h_coeffs = expand_observable(model, h.value);
        chi_bar = pair_with_measure(model, h_coeffs).real();
        h_coeffs[static_cast<std::size_t>(modes)] -= chi_bar; // exact in-basis centering
        hhat_coeffs = std::move(h_coeffs);
        hhat_grid = synthesize(table, hhat_coeffs);
    }

    // mu(hhat . g) for g given by coefficients.
    double pair_product(const std::vector<Complex>& g_coeffs) const {
        std::vector<Complex> g_grid = synthesize(table, g_coeffs);
        for (std::size_t q = 0; q < g_grid.size(); ++q) g_grid[q] *= hhat_grid[q];
        return pair_with_measure(model, analyze(table, g_grid)).real();
    }

    std::vector<Complex> push(const std::vector<Complex>& g_coeffs) const {
        return apply_matrix(model.matrix, model.dim(), g_coeffs);
    }
};

// Green-Kubo sum sigma^2 = mu(hhat^2) + 2 sum_{j>=1} mu(hhat (hhat o f^j)),
// truncated adaptively: the lag sum stops once the fitted geometric tail of
// the correlation sequence drops below 1e-10 relative to max(1, sigma^2).
inline VarianceEstimate green_kubo(const CorrelationEngine& engine) {
    VarianceEstimate est;
    std::vector<Complex> g = engine.hhat_coeffs;
    double sum = engine.pair_product(g); // j = 0
    est.terms.push_back(sum);
    double scale = std::fabs(sum);
    constexpr int kMaxLags = 512;
    for (int j = 1; j <= kMaxLags; ++j) {
        g = engine.push(g);
        const double term = engine.pair_product(g);
        est.terms.push_back(term);
        sum += 2.0 * term;
        scale = std::max(scale, std::fabs(term));
        est.truncation = j;
        if (j < 5) continue;
        // Geometric-tail extrapolation from the trailing ratios.
        double ratio = 0.0;
        for (int b = 0; b < 4; ++b) {
            const double hi = std::fabs(est.terms[static_cast<std::size_t>(j - b)]);
            const double lo = std::fabs(est.terms[static_cast<std::size_t>(j - b - 1)]);
            if (lo > 0.0) ratio = std::max(ratio, hi / lo);
        }
        ratio = std::clamp(ratio, 1e-6, 0.95);
        est.tail_bound = 2.0 * std::fabs(term) * ratio / (1.0 - ratio);
        if (est.tail_bound <= 1e-10 * std::max(1.0, std::fabs(sum))) break;
        if (std::fabs(term) <= 1e-18 * std::max(1.0, scale)) {
            est.tail_bound = 2.0 * std::fabs(term);
            break;
        }
    }
    est.sigma_squared = sum;
    if (est.sigma_squared < 1e-9) {
        est.degenerate = true;
        est.sigma_squared = 0.0;
    }
    return est;
}

} // namespace detail

// mu(hhat (hhat o f^j)); j = 0 is mu(hhat^2).
inline double autocorrelation(const CircleMap& map, int lag, int modes = 64) {
    if (lag < 0) throw InvalidParameter("autocorrelation lag must be >= 0");
    return detail::with_mode_retry(modes, [&](int n) {
        detail::CorrelationEngine engine(map, n);
        std::vector<Complex> g = engine.hhat_coeffs;
        for (int j = 0; j < lag; ++j) g = engine.push(g);
        return engine.pair_product(g);
    });
}

inline VarianceEstimate asymptotic_variance(const CircleMap& map, int modes = 64) {
    return detail::with_mode_retry(modes, [&](int n) {
        return detail::green_kubo(detail::CorrelationEngine(map, n));
    });
}

// chi_bar and the Green-Kubo variance from a single spectral solve, plus the
// mode count that actually resolved the map.
struct SpectrumSummary {
    double chi_bar = 0.0;
    VarianceEstimate variance;
    int modes = 0;
};

inline SpectrumSummary spectrum_summary(const CircleMap& map, int modes = 64) {
    return detail::with_mode_retry(modes, [&](int n) {
        const detail::CorrelationEngine engine(map, n);
        return SpectrumSummary{engine.chi_bar, detail::green_kubo(engine), n};
    });
}

// Leading eigenvalue kappa(t) of the twisted model; kappa(0) = 1 and
// kappa(-t) = conj(kappa(t)) for the real observable hhat.
inline Complex twisted_eigenvalue(const CircleMap& map, double t, double chi_bar,
                                  int modes = 64) {
    if (!(std::fabs(t) <= 0.5))
        throw InvalidParameter("twist parameter restricted to |t| <= 0.5");
    return detail::with_mode_retry(modes, [&](int n) {
        return build_model(map, n, t, chi_bar).leading_eigenvalue;
    });
}

inline Complex twisted_eigenvalue(const CircleMap& map, double t, int modes = 64) {
    return twisted_eigenvalue(map, t, mean_exponent(map, modes).chi_bar, modes);
}

} // namespace lyapchi

#endif // LYAPCHI_SPECTRAL_HPP
