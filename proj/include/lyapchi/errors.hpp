#ifndef LYAPCHI_ERRORS_HPP
#define LYAPCHI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lyapchi {

// Base class of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Map construction: parameters out of range or inconsistent callables.
struct InvalidParameter : Error {
    using Error::Error;
};

// Map construction: the certified lower bound of f' is <= 1.
struct NotExpanding : Error {
    using Error::Error;
};

// Enumeration or preimage tree larger than the configured cap.
struct CapExceeded : Error {
    using Error::Error;
};

// Safeguarded Newton failed to reach tolerance; a bug signal for certified maps.
struct ConvergenceFailure : Error {
    using Error::Error;
};

// Spectral discretization too coarse (coefficient tails above threshold) or
// power iteration did not settle.
struct ResolutionError : Error {
    using Error::Error;
};

// Normalization requested with sigma below the degeneracy threshold.
struct DegenerateSigma : Error {
    using Error::Error;
};

struct EmptyDistribution : Error {
    using Error::Error;
};

// Histogram over a distribution whose values are all equal.
struct DegenerateRange : Error {
    using Error::Error;
};

} // namespace lyapchi

#endif // LYAPCHI_ERRORS_HPP
