#pragma once

// Scalar wavefield behind a one-dimensional grating: aperture transmission
// profiles and their paraxial (Fresnel-Kirchhoff) propagation to y > 0, with
// analytic derivatives obtained by differentiating under the integral sign.

#include "flowlines/quadrature.hpp"
#include "flowlines/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

namespace flowlines
{

/// One opening of the grating.
///
/// A uniform (top-hat) slit has no gaussian_width; its half_support is half
/// the opening width. A Gaussian slit carries the profile
/// (2 pi w^2)^(-1/4) exp(-(x'-center)^2 / 4 w^2) truncated by a hard window of
/// half-width half_support.
struct SlitProfile
{
    double center = 0.0;
    std::optional<double> gaussian_width;
    double half_support = 0.0;
    cdouble amplitude{1.0, 0.0};

    double lo() const { return center - half_support; }
    double hi() const { return center + half_support; }
    bool is_gaussian() const { return gaussian_width.has_value(); }
};

enum class Normalization
{
    as_written,  ///< keep the (2 pi sigma^2)^(-1/4) prefactor after truncation
    renormalized ///< rescale each truncated slit term to unit L2 norm
};

struct ApertureSpec
{
    std::vector<SlitProfile> slits;
    Normalization normalization = Normalization::as_written;

    /// Throws DomainError on a malformed aperture.
    void validate() const
    {
        if (slits.empty()) {
            throw DomainError("aperture needs at least one slit");
        }
        for (std::size_t i = 0; i < slits.size(); ++i) {
            const auto& s = slits[i];
            if (!(s.half_support > 0.0) || !std::isfinite(s.half_support)) {
                throw DomainError("slit " + std::to_string(i + 1) + ": half_support must be > 0");
            }
            if (s.gaussian_width && !(*s.gaussian_width > 0.0)) {
                throw DomainError("slit " + std::to_string(i + 1) + ": gaussian_width must be > 0");
            }
            if (!std::isfinite(s.center)) {
                throw DomainError("slit " + std::to_string(i + 1) + ": center must be finite");
            }
        }
        for (std::size_t i = 0; i < slits.size(); ++i) {
            for (std::size_t j = i + 1; j < slits.size(); ++j) {
                const bool disjoint = slits[i].hi() <= slits[j].lo() || slits[j].hi() <= slits[i].lo();
                if (!disjoint) {
                    throw DomainError("slits " + std::to_string(i + 1) + " and " +
                                      std::to_string(j + 1) + " overlap");
                }
            }
        }
    }

    /// Aperture consisting of slit i alone (same normalization mode).
    ApertureSpec only(std::size_t i) const
    {
        return ApertureSpec{{slits.at(i)}, normalization};
    }
};

struct WaveParams
{
    double wavelength = 0.0;
    double wavenumber = 0.0;
    double angular_frequency = 0.0;

    static WaveParams from_wavelength(double wavelength, double speed)
    {
        if (!(wavelength > 0.0) || !(speed > 0.0)) {
            throw DomainError("wavelength and propagation speed must be positive");
        }
        const double k = two_pi / wavelength;
        return WaveParams{wavelength, k, speed * k};
    }

    static WaveParams from_frequency(double frequency, double speed)
    {
        if (!(frequency > 0.0)) {
            throw DomainError("frequency must be positive");
        }
        return from_wavelength(speed / frequency, speed);
    }
};

enum class QuadratureMethod
{
    gauss_legendre_panels,
    composite_simpson
};

struct QuadratureSpec
{
    QuadratureMethod method = QuadratureMethod::gauss_legendre_panels;
    /// Panels per 2 pi of chirp phase; the phase changes by at most
    /// 2 pi / panels_per_wavelength_of_phase across any panel.
    double panels_per_wavelength_of_phase = 4.0;
    /// Propagation is refused for y below this distance.
    double absolute_floor = 0.0;
    /// Hard cap on panels per slit.
    std::size_t max_panels = 1u << 20;
    /// Simpson subintervals per panel (even) for the composite-simpson method.
    std::size_t simpson_intervals = 128;

    static QuadratureSpec for_wave(const WaveParams& wave)
    {
        QuadratureSpec q;
        q.absolute_floor = 5.0 * wave.wavelength;
        return q;
    }

    void validate() const
    {
        if (!(panels_per_wavelength_of_phase >= 4.0)) {
            throw DomainError("panels_per_wavelength_of_phase must be >= 4");
        }
        if (!(absolute_floor > 0.0)) {
            throw DomainError("absolute_floor must be > 0");
        }
        if (simpson_intervals < 2 || simpson_intervals % 2 != 0) {
            throw DomainError("simpson_intervals must be even and >= 2");
        }
    }
};

namespace detail
{

/// Multiplicative factor applied to slit i's profile shape.
inline double slit_normalization(const SlitProfile& s, Normalization mode)
{
    if (s.is_gaussian()) {
        const double w = *s.gaussian_width;
        const double peak = std::pow(two_pi * w * w, -0.25);
        if (mode == Normalization::as_written) {
            return peak;
        }
        // \int_{-a}^{a} peak^2 e^{-u^2/2w^2} du = erf(a / (w sqrt 2))
        const double kept = std::erf(s.half_support / (w * std::numbers::sqrt2));
        return peak / std::sqrt(kept);
    }
    if (mode == Normalization::as_written) {
        return 1.0;
    }
    return 1.0 / std::sqrt(2.0 * s.half_support);
}

/// Profile shape without amplitude or normalization; zero outside support.
inline double slit_shape(const SlitProfile& s, double xp)
{
    const double u = xp - s.center;
    if (u < -s.half_support || u > s.half_support) {
        return 0.0;
    }
    if (s.is_gaussian()) {
        const double w = *s.gaussian_width;
        return std::exp(-u * u / (4.0 * w * w));
    }
    return 1.0;
}

/// Shape at a point known to lie in the support (quadrature nodes); the
/// offset is clamped so rounded panel ends never fall off the window.
inline double slit_shape_inside(const SlitProfile& s, double xp)
{
    if (!s.is_gaussian()) {
        return 1.0;
    }
    const double u = std::clamp(xp - s.center, -s.half_support, s.half_support);
    const double w = *s.gaussian_width;
    return std::exp(-u * u / (4.0 * w * w));
}

/// Moments of the Fresnel integrand over one slit:
///   m0 = \int A e^{i phi}, m1 = \int A (x-x') e^{i phi}, m2 = \int A (x-x')^2 e^{i phi}
/// with phi = k (x-x')^2 / 2y.
struct Moments
{
    cdouble m0{};
    cdouble m1{};
    cdouble m2{};

    Moments& operator+=(const Moments& o)
    {
        m0 += o.m0;
        m1 += o.m1;
        m2 += o.m2;
        return *this;
    }
};

/// Signed fractional part of a phase in turns, in [-1/2, 1/2]. Reducing
/// before sin/cos keeps large chirp phases on the fast, exact path.
inline double fractional_turn(double turns)
{
    return turns - std::floor(turns + 0.5);
}

/// e^{iky} with the argument reduced exactly via fmod(y, lambda).
inline cdouble carrier_phase(const WaveParams& wave, double y)
{
    const double turns = std::fmod(y, wave.wavelength) / wave.wavelength;
    const double angle = two_pi * fractional_turn(turns);
    return {std::cos(angle), std::sin(angle)};
}

inline std::size_t panel_count(const SlitProfile& s, const WaveParams& wave, const QuadratureSpec& quad,
                               double x, double y)
{
    const double width = 2.0 * s.half_support;
    const double reach = std::max(std::abs(x - s.lo()), std::abs(x - s.hi()));
    const double phase_rate = wave.wavenumber * reach / y;
    const double per_panel = two_pi / quad.panels_per_wavelength_of_phase;
    double n = std::ceil(phase_rate * width / per_panel);
    if (s.is_gaussian()) {
        n = std::max(n, std::ceil(width / *s.gaussian_width));
    }
    n = std::max(n, 1.0);
    if (!(n <= static_cast<double>(quad.max_panels))) {
        std::ostringstream msg;
        msg << "quadrature needs " << n << " panels at (x=" << x << ", y=" << y
            << "), above the cap of " << quad.max_panels;
        throw QuadratureError(msg.str());
    }
    return static_cast<std::size_t>(n);
}

template <bool WithGradient>
Moments slit_moments(const SlitProfile& s, double scale, const WaveParams& wave, const QuadratureSpec& quad,
                     double x, double y)
{
    const std::size_t panels = panel_count(s, wave, quad, x, y);
    const double panel_width = 2.0 * s.half_support / static_cast<double>(panels);
    const double half_panels = 0.5 * static_cast<double>(panels);
    // chirp phase k u^2 / 2y expressed in turns, u^2 / (2 lambda y)
    const double chirp_turns = 1.0 / (2.0 * wave.wavelength * y);

    auto term = [&](double xp, double weight) {
        Moments m;
        const double shape = slit_shape_inside(s, xp);
        const double u = x - xp;
        const double phase = two_pi * fractional_turn(chirp_turns * (u * u));
        m.m0 = (weight * shape) * cdouble(std::cos(phase), std::sin(phase));
        if constexpr (WithGradient) {
            m.m1 = u * m.m0;
            m.m2 = (u * u) * m.m0;
        }
        return m;
    };
    auto pair = [](Moments a, const Moments& b) { return a += b; };

    // Nodes are summed in mirror pairs (panel p node j with panel P-1-p node
    // n-1-j). Reflecting the slit about x = 0 then permutes terms only inside
    // each pair, so mirrored geometry gives bit-identical sums.
    const bool gl = quad.method == QuadratureMethod::gauss_legendre_panels;
    const std::size_t n = gl ? quadrature::kernel_order : quad.simpson_intervals + 1;
    auto node = [&](std::size_t p, std::size_t j, double& xp, double& weight) {
        const double a = s.center + (static_cast<double>(p) - half_panels) * panel_width;
        const double b = s.center + (static_cast<double>(p + 1) - half_panels) * panel_width;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        if (gl) {
            const auto& rule = quadrature::kernel_rule();
            xp = mid + half * rule.nodes[j];
            weight = half * rule.weights[j];
        } else {
            const std::size_t m = quad.simpson_intervals;
            const double h = (b - a) / static_cast<double>(m);
            const double w = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            xp = mid + (static_cast<double>(j) - 0.5 * static_cast<double>(m)) * h;
            weight = w * h / 3.0;
        }
    };
    auto at = [&](std::size_t p, std::size_t j) {
        double xp = 0.0;
        double w = 0.0;
        node(p, j, xp, w);
        return term(xp, w);
    };

    Moments acc;
    for (std::size_t p = 0; 2 * p < panels; ++p) {
        const std::size_t q = panels - 1 - p;
        for (std::size_t j = 0; 2 * j < n; ++j) {
            const std::size_t r = n - 1 - j;
            if (p == q && j == r) {
                acc += at(p, j);
            } else if (p == q) {
                acc += pair(at(p, j), at(p, r));
            } else if (j == r) {
                acc += pair(at(p, j), at(q, j));
            } else {
                acc += pair(pair(at(p, j), at(q, r)), pair(at(p, r), at(q, j)));
            }
        }
    }
    const cdouble factor = s.amplitude * scale;
    acc.m0 *= factor;
    acc.m1 *= factor;
    acc.m2 *= factor;
    return acc;
}

inline void check_propagation_domain(const QuadratureSpec& quad, double x, double y)
{
    if (!(y >= quad.absolute_floor) || !(quad.absolute_floor > 0.0) || !std::isfinite(x)) {
        std::ostringstream msg;
        msg << "propagation refused at (x=" << x << ", y=" << y << "): y below the paraxial floor "
            << quad.absolute_floor;
        throw DomainError(msg.str());
    }
}

} // namespace detail

/// Transmission profile A(x') summed over slits; exactly 0 outside every support.
inline cdouble aperture_value(const ApertureSpec& spec, double x_prime)
{
    cdouble sum{};
    for (const auto& s : spec.slits) {
        const double shape = detail::slit_shape(s, x_prime);
        if (shape != 0.0) {
            sum += s.amplitude * (detail::slit_normalization(s, spec.normalization) * shape);
        }
    }
    return sum;
}

/// Propagated field together with its analytic gradient.
struct FieldSample
{
    cdouble value{};
    CVec2 gradient{};
};

namespace detail
{

template <bool WithGradient>
FieldSample assemble(const Moments& total, const WaveParams& wave, double y);

template <bool WithGradient>
FieldSample fresnel(const ApertureSpec& aperture, const WaveParams& wave, const QuadratureSpec& quad,
                    double x, double y)
{
    check_propagation_domain(quad, x, y);
    Moments total;
    for (const auto& s : aperture.slits) {
        total += slit_moments<WithGradient>(s, slit_normalization(s, aperture.normalization), wave, quad, x, y);
    }
    return assemble<WithGradient>(total, wave, y);
}

/// Applies the Fresnel prefactor and carrier to integrated moments.
template <bool WithGradient>
FieldSample assemble(const Moments& total, const WaveParams& wave, double y)
{
    const double k = wave.wavenumber;
    static const cdouble quarter_turn = std::polar(1.0, -pi / 4.0);
    const cdouble carrier = std::sqrt(k / (two_pi * y)) * carrier_phase(wave, y) * quarter_turn;

    FieldSample out;
    out.value = carrier * total.m0;
    if constexpr (WithGradient) {
        const cdouble ik(0.0, k);
        // d/dx: the chirp brings down i k (x - x') / y
        out.gradient.x = carrier * (ik / y) * total.m1;
        // d/dy: carrier e^{iky}, prefactor y^{-1/2} and chirp -i k (x-x')^2 / 2y^2
        out.gradient.y = out.value * (ik - 1.0 / (2.0 * y)) - carrier * (ik / (2.0 * y * y)) * total.m2;
    }
    return out;
}

} // namespace detail

/// Value and gradient of a single slit's contribution (slit i of an
/// aperture propagated alone).
inline FieldSample fresnel_field_slit(const SlitProfile& slit, Normalization mode, const WaveParams& wave,
                                      const QuadratureSpec& quad, double x, double y)
{
    detail::check_propagation_domain(quad, x, y);
    const auto m = detail::slit_moments<true>(slit, detail::slit_normalization(slit, mode), wave, quad, x, y);
    return detail::assemble<true>(m, wave, y);
}

/// P(x, y) = e^{-i pi/4} e^{iky} sqrt(k / 2 pi y) \int A(x') e^{ik(x-x')^2/2y} dx'.
inline cdouble fresnel_propagate(const ApertureSpec& aperture, const WaveParams& wave,
                                 const QuadratureSpec& quad, double x, double y)
{
    return detail::fresnel<false>(aperture, wave, quad, x, y).value;
}

/// Analytic (dP/dx, dP/dy).
inline CVec2 fresnel_gradient(const ApertureSpec& aperture, const WaveParams& wave,
                              const QuadratureSpec& quad, double x, double y)
{
    return detail::fresnel<true>(aperture, wave, quad, x, y).gradient;
}

/// Value and gradient from a single pass over the quadrature nodes.
inline FieldSample fresnel_field(const ApertureSpec& aperture, const WaveParams& wave,
                                 const QuadratureSpec& quad, double x, double y)
{
    return detail::fresnel<true>(aperture, wave, quad, x, y);
}

/// Lazily evaluated complex field with gradient: the propagated aperture.
class ComplexField2D
{
public:
    ComplexField2D(ApertureSpec aperture, WaveParams wave, QuadratureSpec quad)
        : aperture_(std::move(aperture)), wave_(wave), quad_(quad)
    {
        aperture_.validate();
        quad_.validate();
    }

    cdouble value_at(double x, double y) const { return fresnel_propagate(aperture_, wave_, quad_, x, y); }
    CVec2 gradient_at(double x, double y) const { return fresnel_gradient(aperture_, wave_, quad_, x, y); }
    FieldSample sample(double x, double y) const { return fresnel_field(aperture_, wave_, quad_, x, y); }

    const ApertureSpec& aperture() const { return aperture_; }
    const WaveParams& wave() const { return wave_; }
    const QuadratureSpec& quadrature() const { return quad_; }

private:
    ApertureSpec aperture_;
    WaveParams wave_;
    QuadratureSpec quad_;
};

} // namespace flowlines
