#pragma once

#include <stdexcept>
#include <string>

namespace paratomo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- geometry ---------------------------------------------------------------

/// Evaluation requested outside the (extended) disk.
struct PointOutsideDomain : Error {
    using Error::Error;
};

/// A geodesic exceeded the arc-length budget without leaving the domain.
struct TrappedRay : Error {
    using Error::Error;
};

/// Non-finite state encountered while integrating an ODE.
struct IntegrationDiverged : Error {
    using Error::Error;
};

// -- gauge ------------------------------------------------------------------

/// A gauge matrix became (numerically) non-invertible.
struct SingularGauge : Error {
    using Error::Error;
};

/// Boundary tangential traces of two pairs disagree where they must match.
struct JetMismatch : Error {
    using Error::Error;
};

// -- transforms -------------------------------------------------------------

/// A transform weight lost invertibility along a ray.
struct SingularWeight : Error {
    using Error::Error;
};

/// Scattering data could not be inverted node-wise.
struct SingularData : Error {
    using Error::Error;
};

/// A linear system factorization failed or a solve left a large residual.
struct SingularSystem : Error {
    using Error::Error;
};

/// A chord of the extended disk never meets the inner disk.
struct RayMissesM : Error {
    using Error::Error;
};

/// Direction-dependence detected where a gauge should be well defined.
struct GaugeInconsistent : Error {
    using Error::Error;
};

// -- harness ----------------------------------------------------------------

/// Config file syntax error; carries a 1-based line number.
struct ParseError : Error {
    int line = 0;
    ParseError(int line_, const std::string& msg)
        : Error("parse error at line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

/// Config value error; carries the offending key.
struct ValidationError : Error {
    std::string key;
    ValidationError(const std::string& key_, const std::string& msg)
        : Error("invalid config key '" + key_ + "': " + msg), key(key_) {}
};

/// CSV header/shape mismatch.
struct SchemaError : Error {
    using Error::Error;
};

}  // namespace paratomo
