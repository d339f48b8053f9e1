#ifndef LYAPCHI_CIRCLE_MAP_HPP
#define LYAPCHI_CIRCLE_MAP_HPP

#include <charconv>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lyapchi/errors.hpp"

namespace lyapchi {

inline constexpr double kPi = 3.14159265358979323846264338328;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class MapFamily { Linear, TrigPerturbedDoubling, Blaschke, Custom };

// Certified lower bound for f' on the whole circle, obtained from a grid
// minimum minus the Lipschitz slack max|f''| * spacing / 2. The |f''| bound is
// itself a grid maximum inflated by a fixed safety factor; with only two
// derivatives available the certificate is honest rather than rigorous.
struct ExpansivityCertificate {
    double lambda_star = 0.0;            // certified min f', > 1
    double max_second_derivative = 0.0;  // certified max |f''|
    int grid_size = 0;
};

// A scalar observable on the circle together with its derivative.
struct Observable {
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    double operator()(double x) const { return value(x); }
};

// An orientation-preserving expanding circle map of degree K >= 2, stored via
// a lift F with F(x+1) = F(x) + K and F(0) in [0,1). Values are immutable
// after construction; all evaluations are pure and safe to share across
// threads. Construction cross-checks the supplied derivatives against finite
// differences of the lift and certifies expansivity, so downstream algorithms
// may rely on f' >= lambda_star > 1 unconditionally.
class CircleMap {
public:
    using RealFn = std::function<double(double)>;

    static CircleMap linear(int degree) {
        if (degree < 2)
            throw InvalidParameter("linear map requires degree K >= 2");
        const double k = degree;
        return CircleMap(MapFamily::Linear, degree, {static_cast<double>(degree)},
                         [k](double x) { return k * x; },
                         [k](double) { return k; },
                         [](double) { return 0.0; });
    }

    // x -> K x + eps (sin 2 pi x + cos 2 pi x - 1) mod 1, the doubling map
    // with a trigonometric perturbation (degree fixed at 2).
    static CircleMap trig_doubling(double eps) {
        if (!std::isfinite(eps))
            throw InvalidParameter("trig_doubling perturbation must be finite");
        return CircleMap(
            MapFamily::TrigPerturbedDoubling, 2, {eps},
            [eps](double x) {
                return 2.0 * x + eps * (std::sin(kTwoPi * x) + std::cos(kTwoPi * x) - 1.0);
            },
            [eps](double x) {
                return 2.0 + kTwoPi * eps * (std::cos(kTwoPi * x) - std::sin(kTwoPi * x));
            },
            [eps](double x) {
                return -kTwoPi * kTwoPi * eps * (std::sin(kTwoPi * x) + std::cos(kTwoPi * x));
            });
    }

    // Angle map of the Blaschke product z (z - a) / (1 - a z) on the unit
    // circle, for real a in (-1, 1). With w = 1 - a e^{i phi} the product is
    // e^{i phi} (conj w / w) times z, giving the closed-form lift
    //   F(t) = 2 t + atan(a sin 2 pi t / (1 - a cos 2 pi t)) / pi
    // and the Poisson-kernel derivative
    //   f'(t) = 1 + (1 - a^2) / (1 - 2 a cos 2 pi t + a^2).
    // The atan argument has positive denominator for |a| < 1, so no branch
    // cut of arg is ever crossed.
    static CircleMap blaschke(double a) {
        if (!(std::fabs(a) < 1.0))
            throw InvalidParameter("blaschke zero must satisfy |a| < 1");
        return CircleMap(
            MapFamily::Blaschke, 2, {a},
            [a](double t) {
                const double phi = kTwoPi * t;
                return 2.0 * t +
                       std::atan(a * std::sin(phi) / (1.0 - a * std::cos(phi))) / kPi;
            },
            [a](double t) {
                const double phi = kTwoPi * t;
                const double d = 1.0 - 2.0 * a * std::cos(phi) + a * a;
                return 1.0 + (1.0 - a * a) / d;
            },
            [a](double t) {
                const double phi = kTwoPi * t;
                const double d = 1.0 - 2.0 * a * std::cos(phi) + a * a;
                return -2.0 * kTwoPi * a * (1.0 - a * a) * std::sin(phi) / (d * d);
            });
    }

    // A user-supplied map given as (lift, f', f'') plus a declared degree.
    // Consistency and expansivity are certified here, not trusted.
    static CircleMap custom(int degree, RealFn lift, RealFn derivative,
                            RealFn second_derivative, int cert_grid = kDefaultCertGrid) {
        return CircleMap(MapFamily::Custom, degree, {}, std::move(lift),
                         std::move(derivative), std::move(second_derivative),
                         cert_grid);
    }

    // Parses "linear:K", "trigdoubling:eps", "blaschke:a".
    static CircleMap from_id(std::string_view id) {
        const auto colon = id.find(':');
        if (colon == std::string_view::npos)
            throw InvalidParameter("map id must look like family:parameter, got '" +
                                   std::string(id) + "'");
        const std::string family(id.substr(0, colon));
        const std::string arg(id.substr(colon + 1));
        auto parse_real = [&](const std::string& s) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size() || s.empty())
                throw InvalidParameter("malformed parameter in map id '" + std::string(id) + "'");
            return v;
        };
        if (family == "linear") {
            const double k = parse_real(arg);
            if (k != std::floor(k) || k < 2 || k > 64)
                throw InvalidParameter("linear map id needs an integer degree in [2, 64]");
            return linear(static_cast<int>(k));
        }
        if (family == "trigdoubling") return trig_doubling(parse_real(arg));
        if (family == "blaschke") return blaschke(parse_real(arg));
        throw InvalidParameter("unknown map family '" + family + "'");
    }

    double lift(double x) const { return impl_->lift(x); }
    double derivative(double x) const { return impl_->derivative(x); }
    double second_derivative(double x) const { return impl_->second(x); }

    // f(x) = F(x) mod 1, always in [0, 1).
    double step(double x) const {
        const double y = impl_->lift(x);
        return y - std::floor(y);
    }

    int degree() const { return impl_->degree; }
    MapFamily family() const { return impl_->family; }
    const std::vector<double>& parameters() const { return impl_->parameters; }
    const ExpansivityCertificate& certificate() const { return impl_->certificate; }

    double min_derivative_bound() const { return impl_->certificate.lambda_star; }
    double max_derivative_bound() const { return impl_->max_derivative; }

    std::string id() const {
        // Shortest round-trip formatting keeps "blaschke:0.1" readable while
        // still parsing back to the same double.
        const auto shortest = [](double v) {
            char buf[40];
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, res.ptr);
        };
        switch (impl_->family) {
            case MapFamily::Linear:
                return "linear:" + std::to_string(impl_->degree);
            case MapFamily::TrigPerturbedDoubling:
                return "trigdoubling:" + shortest(impl_->parameters[0]);
            case MapFamily::Blaschke:
                return "blaschke:" + shortest(impl_->parameters[0]);
            case MapFamily::Custom:
                break;
        }
        return "custom:" + std::to_string(impl_->degree);
    }

    static constexpr int kDefaultCertGrid = 4096;

private:
    struct Impl {
        MapFamily family;
        int degree;
        std::vector<double> parameters;
        RealFn lift;
        RealFn derivative;
        RealFn second;
        ExpansivityCertificate certificate;
        double max_derivative = 0.0;
    };

    CircleMap(MapFamily family, int degree, std::vector<double> params, RealFn lift,
              RealFn derivative, RealFn second, int cert_grid = kDefaultCertGrid) {
        if (degree < 2) throw InvalidParameter("degree must be >= 2");
        if (!lift || !derivative || !second)
            throw InvalidParameter("lift, derivative and second derivative are required");

        // Normalize the lift so F(0) lands in [0, 1); branch indexing below
        // depends on this convention.
        const double shift = std::floor(lift(0.0));
        RealFn normalized = lift;
        if (shift != 0.0)
            normalized = [lift, shift](double x) { return lift(x) - shift; };

        auto impl = std::make_shared<Impl>(Impl{family, degree, std::move(params),
                                                std::move(normalized), std::move(derivative),
                                                std::move(second), ExpansivityCertificate{},
                                                0.0});
        validate_consistency(*impl);
        certify(*impl, cert_grid);
        impl_ = std::move(impl);
    }

    static void validate_consistency(const Impl& impl) {
        const int k = impl.degree;
        // F(x + 1) - F(x) = K on a grid; exact for a true degree-K lift up to
        // the roundoff of evaluating F at shifted arguments.
        for (int i = 0; i < 1024; ++i) {
            const double x = i / 1024.0;
            if (std::fabs(impl.lift(x + 1.0) - impl.lift(x) - k) > 1e-12 * std::max(1, k))
                throw InvalidParameter("lift does not satisfy F(x+1) = F(x) + K");
        }
        // Central differences of F must reproduce f', and of f' reproduce f''.
        const double delta = 1e-5;
        for (int i = 0; i < 256; ++i) {
            const double x = i / 256.0;
            const double fd1 = (impl.lift(x + delta) - impl.lift(x - delta)) / (2.0 * delta);
            if (std::fabs(fd1 - impl.derivative(x)) > 1e-7)
                throw InvalidParameter("derivative inconsistent with finite differences of the lift");
            const double fd2 =
                (impl.derivative(x + delta) - impl.derivative(x - delta)) / (2.0 * delta);
            if (std::fabs(fd2 - impl.second(x)) > 1e-6)
                throw InvalidParameter("second derivative inconsistent with finite differences of f'");
        }
    }

    static void certify(Impl& impl, int grid_size) {
        if (grid_size < 1024) throw InvalidParameter("certification grid must have >= 1024 points");
        double min_fp = impl.derivative(0.0);
        double max_fp = min_fp;
        double max_f2 = std::fabs(impl.second(0.0));
        for (int i = 1; i < grid_size; ++i) {
            const double x = static_cast<double>(i) / grid_size;
            const double fp = impl.derivative(x);
            min_fp = std::min(min_fp, fp);
            max_fp = std::max(max_fp, fp);
            max_f2 = std::max(max_f2, std::fabs(impl.second(x)));
        }
        // Safety factor on the sampled |f''| bound; grid extrema of a C^2
        // function are exact only up to curvature between nodes.
        const double certified_f2 = max_f2 * 1.25;
        const double slack = certified_f2 * (0.5 / grid_size);
        ExpansivityCertificate cert;
        cert.lambda_star = min_fp - slack;
        cert.max_second_derivative = certified_f2;
        cert.grid_size = grid_size;
        if (!(cert.lambda_star > 1.0))
            throw NotExpanding("certified min f' = " + std::to_string(cert.lambda_star) +
                               " is not > 1");
        impl.certificate = cert;
        impl.max_derivative = max_fp + slack;
    }

    std::shared_ptr<const Impl> impl_;
};

// Re-certifies an existing map on a caller-chosen grid.
inline ExpansivityCertificate expansivity_certificate(const CircleMap& map, int grid_size) {
    if (grid_size < 1024) throw InvalidParameter("certification grid must have >= 1024 points");
    double min_fp = map.derivative(0.0);
    double max_f2 = std::fabs(map.second_derivative(0.0));
    for (int i = 1; i < grid_size; ++i) {
        const double x = static_cast<double>(i) / grid_size;
        min_fp = std::min(min_fp, map.derivative(x));
        max_f2 = std::max(max_f2, std::fabs(map.second_derivative(x)));
    }
    ExpansivityCertificate cert;
    cert.max_second_derivative = max_f2 * 1.25;
    cert.lambda_star = min_fp - cert.max_second_derivative * (0.5 / grid_size);
    cert.grid_size = grid_size;
    if (!(cert.lambda_star > 1.0))
        throw NotExpanding("certified min f' = " + std::to_string(cert.lambda_star) +
                           " is not > 1");
    return cert;
}

// h = ln f' and h' = f''/f'; well defined since f' > 1 is certified.
inline Observable log_derivative(const CircleMap& map) {
    Observable h;
    h.value = [map](double x) { return std::log(map.derivative(x)); };
    h.derivative = [map](double x) { return map.second_derivative(x) / map.derivative(x); };
    return h;
}

} // namespace lyapchi

#endif // LYAPCHI_CIRCLE_MAP_HPP
