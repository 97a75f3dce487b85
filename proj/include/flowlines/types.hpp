#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace flowlines
{

using cdouble = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Plane point or real 2-vector (x transverse, y along propagation).
struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;

    double norm() const { return std::hypot(x, y); }
};

/// Complex 2-vector, used for (d/dx, d/dy) of a complex field.
struct CVec2
{
    cdouble x{};
    cdouble y{};
};

// Error taxonomy. Each numerical failure mode gets its own type so that the
// CLI can map them onto exit codes and tests can assert the exact failure.

struct DomainError : std::domain_error
{
    using std::domain_error::domain_error;
};

struct QuadratureError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct LaunchError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct InsufficientResolution : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Config text could not be parsed (unknown key, malformed value).
struct ConfigParseError : std::runtime_error
{
    ConfigParseError(std::string key, const std::string& what)
        : std::runtime_error(what), key(std::move(key)) {}
    std::string key;
};

/// Config parsed but describes an invalid experiment.
struct ConfigValidationError : std::runtime_error
{
    ConfigValidationError(std::string key, const std::string& what)
        : std::runtime_error(what), key(std::move(key)) {}
    std::string key;
};

} // namespace flowlines
