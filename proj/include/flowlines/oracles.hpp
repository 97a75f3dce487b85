#pragma once

// Reference computations for tests and reports: an independent adaptive
// Simpson evaluation of the Fresnel integral, analytic Fraunhofer profiles,
// fringe measurement and symmetry-axis crossing detection.
//
// Nothing here calls into the kernel's quadrature; the oracle re-derives the
// aperture profile on its own.

#include "flowlines/tracer.hpp"
#include "flowlines/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace flowlines
{

// Brute-force quadrature oracle

struct OracleOptions
{
    double tolerance = 1e-10;  ///< relative to \int |A| dx'
    int max_depth = 48;
    std::size_t max_intervals = 1u << 24;
};

namespace oracle_detail
{

/// Transmission of one slit, written out independently of the kernel.
inline cdouble slit_transmission(const SlitProfile& s, Normalization mode, double xp)
{
    const double u = xp - s.center;
    if (std::abs(u) > s.half_support) {
        return 0.0;
    }
    double value = 1.0;
    if (s.gaussian_width) {
        const double sg = *s.gaussian_width;
        value = std::exp(-(u / sg) * (u / sg) / 4.0) / std::sqrt(std::sqrt(2.0 * pi) * sg);
        if (mode == Normalization::renormalized) {
            value /= std::sqrt(std::erf(s.half_support / (sg * std::sqrt(2.0))));
        }
    } else if (mode == Normalization::renormalized) {
        value /= std::sqrt(2.0 * s.half_support);
    }
    return s.amplitude * value;
}

struct Integrand
{
    const SlitProfile& slit;
    Normalization mode;
    double k;
    double x;
    double y;

    cdouble operator()(double xp) const
    {
        const double u = x - xp;
        return slit_transmission(slit, mode, xp) * std::polar(1.0, k * u * u / (2.0 * y));
    }
};

struct Simpson
{
    const Integrand& f;
    const OracleOptions& opt;
    std::size_t intervals = 0;

    cdouble refine(double a, double b, cdouble fa, cdouble fm, cdouble fb, cdouble whole, double tol, int depth)
    {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const cdouble flm = f(lm);
        const cdouble frm = f(rm);
        const cdouble left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const cdouble right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const cdouble diff = left + right - whole;
        if (std::abs(diff) <= 15.0 * tol) {
            ++intervals;
            return left + right + diff / 15.0;
        }
        if (depth <= 0 || intervals >= opt.max_intervals) {
            std::ostringstream msg;
            msg << "adaptive Simpson oracle did not reach tolerance near x' = " << m;
            throw NonConvergence(msg.str());
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

} // namespace oracle_detail

/// Adaptive Simpson evaluation of
/// e^{-i pi/4} e^{iky} sqrt(k / 2 pi y) \int A(x') e^{ik(x-x')^2/2y} dx'.
///
/// Each slit is pre-split so that every starting interval spans at most a
/// quarter turn of chirp phase, then refined until the Richardson estimate
/// meets the tolerance.
inline cdouble oracle_quadrature(const ApertureSpec& aperture, const WaveParams& wave, double x, double y,
                                 const OracleOptions& opt = {})
{
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
        throw DomainError("oracle_quadrature needs y > 0 and finite coordinates");
    }
    const double k = two_pi / wave.wavelength;

    double scale = 0.0;
    for (const auto& s : aperture.slits) {
        scale += std::abs(oracle_detail::slit_transmission(s, aperture.normalization, s.center)) * 2.0 *
                 s.half_support;
    }
    if (scale == 0.0) {
        return 0.0;
    }

    cdouble integral{};
    for (const auto& s : aperture.slits) {
        if (s.amplitude == cdouble{}) {
            continue;
        }
        const oracle_detail::Integrand f{s, aperture.normalization, k, x, y};
        oracle_detail::Simpson simpson{f, opt};
        const double lo = s.center - s.half_support;
        const double hi = s.center + s.half_support;
        const double reach = std::max(std::abs(x - lo), std::abs(x - hi));
        const double phase_span = k * reach / y * (hi - lo);
        const auto pieces = static_cast<std::size_t>(std::max(2.0, std::ceil(phase_span / (pi / 2.0))));
        const double width = (hi - lo) / double(pieces);
        const double tol_per_unit = opt.tolerance * scale / (hi - lo);
        for (std::size_t i = 0; i < pieces; ++i) {
            const double a = lo + double(i) * width;
            const double b = (i + 1 == pieces) ? hi : lo + double(i + 1) * width;
            // Interior evaluation keeps the closed window edges inside.
            const double ea = (i == 0) ? std::nextafter(a, hi) : a;
            const double eb = (i + 1 == pieces) ? std::nextafter(b, lo) : b;
            const cdouble fa = f(ea);
            const cdouble fb = f(eb);
            const cdouble fm = f(0.5 * (a + b));
            const cdouble whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            integral += simpson.refine(a, b, fa, fm, fb, whole, tol_per_unit * (b - a), opt.max_depth);
        }
    }
    const cdouble prefactor = std::sqrt(k / (2.0 * pi * y)) * std::polar(1.0, k * y - pi / 4.0);
    return prefactor * integral;
}

// Far-field profiles

struct FraunhoferParams
{
    std::optional<double> slit_width; ///< delta, uniform slits
    std::optional<double> sigma;      ///< Gaussian slits
    double separation = 0.0;          ///< d, centre to centre
    double wavelength = 0.0;
};

/// y at and beyond which the far-field formula is accepted: 10 d^2 / lambda.
inline double far_field_threshold(double separation, double wavelength)
{
    return 10.0 * separation * separation / wavelength;
}

/// Analytic far-field two-slit intensity, peak-normalized to 1 at x = 0:
/// envelope(x/y) cos^2(pi d x / lambda y).
inline double fraunhofer_two_slit(const FraunhoferParams& p, double x, double y)
{
    if (!(p.separation > 0.0) || !(p.wavelength > 0.0) || p.slit_width.has_value() == p.sigma.has_value()) {
        throw DomainError("fraunhofer_two_slit needs d, lambda and exactly one of slit width or sigma");
    }
    if (!(y >= far_field_threshold(p.separation, p.wavelength))) {
        throw DomainError("fraunhofer_two_slit: y is below the far-field threshold 10 d^2 / lambda");
    }
    const double s = x / y;
    double envelope = 1.0;
    if (p.slit_width) {
        const double arg = pi * *p.slit_width * s / p.wavelength;
        envelope = arg == 0.0 ? 1.0 : std::pow(std::sin(arg) / arg, 2);
    } else {
        // |FT of e^{-x^2/4 sigma^2}|^2 at spatial frequency k s.
        const double q = two_pi / p.wavelength * s;
        envelope = std::exp(-2.0 * *p.sigma * *p.sigma * q * q);
    }
    const double c = std::cos(pi * p.separation * s / p.wavelength);
    return envelope * c * c;
}

// Fringe measurement

enum class ExtremumKind
{
    max,
    min,
};

struct Extremum
{
    double x = 0.0;
    double value = 0.0;
    ExtremumKind kind = ExtremumKind::max;
};

struct FringeReport
{
    double visibility = 0.0;
    std::vector<Extremum> extrema;
    double fringe_spacing = 0.0;
    double phase_shift = 0.0;
    bool reference_normalized = false;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

struct FringeWindow
{
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail
{

/// Vertex of the parabola through three points.
inline std::pair<double, double> parabola_vertex(double x0, double v0, double x1, double v1, double x2, double v2)
{
    const double d01 = (v1 - v0) / (x1 - x0);
    const double d12 = (v2 - v1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv == 0.0) {
        return {x1, v1};
    }
    // v(x) = v1 + b (x - x1) + curv (x - x1)^2 with b the slope at x1
    const double b = d01 + curv * (x1 - x0);
    const double dx = -b / (2.0 * curv);
    if (!(std::abs(dx) <= std::max(x1 - x0, x2 - x1))) {
        return {x1, v1};
    }
    return {x1 + dx, v1 + b * dx + curv * dx * dx};
}

} // namespace detail

/// Locates extrema of a sampled profile inside `window` and measures fringe
/// visibility, spacing and the offset of the central maximum.
///
/// Without a reference the extrema of the profile itself are used and
/// V = (Imax - Imin) / (Imax + Imin) over them. With a reference (e.g. the
/// incoherent sum of the single-slit profiles) the profile is divided by it
/// first, which removes the diffraction envelope; V is then taken over every
/// window sample of that ratio, so an unmodulated ratio gives V = 0.
inline FringeReport measure_fringes(std::span<const double> x, std::span<const double> values, FringeWindow window,
                                    std::span<const double> reference = {})
{
    if (x.size() != values.size() || (!reference.empty() && reference.size() != values.size())) {
        throw DomainError("measure_fringes: sample arrays differ in length");
    }
    const bool normalized = !reference.empty();
    std::vector<double> xs;
    std::vector<double> vs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < window.lo || x[i] > window.hi) {
            continue;
        }
        if (normalized) {
            if (!(reference[i] > 0.0)) {
                throw DomainError("measure_fringes: reference profile must be positive in the window");
            }
            xs.push_back(x[i]);
            vs.push_back(values[i] / reference[i]);
        } else {
            xs.push_back(x[i]);
            vs.push_back(values[i]);
        }
    }

    FringeReport rep;
    rep.reference_normalized = normalized;
    rep.window_lo = window.lo;
    rep.window_hi = window.hi;

    for (std::size_t i = 1; i + 1 < vs.size(); ++i) {
        const bool is_max = vs[i] > vs[i - 1] && vs[i] >= vs[i + 1];
        const bool is_min = vs[i] < vs[i - 1] && vs[i] <= vs[i + 1];
        if (!is_max && !is_min) {
            continue;
        }
        const auto [xr, vr] = detail::parabola_vertex(xs[i - 1], vs[i - 1], xs[i], vs[i], xs[i + 1], vs[i + 1]);
        rep.extrema.push_back({xr, vr, is_max ? ExtremumKind::max : ExtremumKind::min});
    }

    if (normalized) {
        if (vs.size() < 3) {
            throw InsufficientResolution("measure_fringes: fewer than 3 samples in the window");
        }
        const auto [mn, mx] = std::minmax_element(vs.begin(), vs.end());
        rep.visibility = (*mx - *mn) / (*mx + *mn);
    } else {
        if (rep.extrema.size() < 3) {
            throw InsufficientResolution("measure_fringes: fewer than 3 extrema in the window");
        }
        double imax = -INFINITY;
        double imin = INFINITY;
        for (const auto& e : rep.extrema) {
            if (e.kind == ExtremumKind::max) {
                imax = std::max(imax, e.value);
            } else {
                imin = std::min(imin, e.value);
            }
        }
        rep.visibility = (imax - imin) / (imax + imin);
    }

    // Median gap between neighbouring extrema of the same kind; robust to
    // the odd extra extremum near an envelope null.
    std::vector<double> gaps;
    for (std::size_t i = 2; i < rep.extrema.size(); ++i) {
        gaps.push_back(rep.extrema[i].x - rep.extrema[i - 2].x);
    }
    if (!gaps.empty()) {
        std::sort(gaps.begin(), gaps.end());
        const std::size_t h = gaps.size() / 2;
        rep.fringe_spacing = gaps.size() % 2 ? gaps[h] : 0.5 * (gaps[h - 1] + gaps[h]);
    }
    const Extremum* central = nullptr;
    for (const auto& e : rep.extrema) {
        if (e.kind == ExtremumKind::max && (!central || std::abs(e.x) < std::abs(central->x))) {
            central = &e;
        }
    }
    rep.phase_shift = central ? central->x : 0.0;
    return rep;
}

// Symmetry-axis crossings

enum class Side
{
    left,  ///< x > 0, slit 1's side
    right, ///< x < 0, slit 2's side
    axis,  ///< ended exactly on x = 0
};

inline std::string_view to_string(Side s)
{
    switch (s) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::axis: return "axis";
    }
    return "axis";
}

struct LineCrossing
{
    std::size_t origin_slit = 0; ///< 0-based
    bool crossed_axis = false;
    Side final_side = Side::axis;
};

struct CrossingReport
{
    std::vector<LineCrossing> per_line;
    std::size_t slit1_crossed = 0;
    std::size_t slit2_crossed = 0;
};

/// A line crosses when it has points strictly on both sides of x = 0; a
/// point exactly on the axis is a touch.
inline CrossingReport detect_crossings(std::span<const FlowLine> lines)
{
    CrossingReport rep;
    for (const auto& line : lines) {
        bool pos = false;
        bool neg = false;
        for (const auto& p : line.points) {
            pos = pos || p.x > 0.0;
            neg = neg || p.x < 0.0;
        }
        LineCrossing c;
        c.origin_slit = line.origin_slit;
        c.crossed_axis = pos && neg;
        if (!line.points.empty()) {
            const double xe = line.points.back().x;
            c.final_side = xe > 0.0 ? Side::left : (xe < 0.0 ? Side::right : Side::axis);
        }
        if (c.crossed_axis) {
            if (line.origin_slit == 0) {
                ++rep.slit1_crossed;
            } else if (line.origin_slit == 1) {
                ++rep.slit2_crossed;
            }
        }
        rep.per_line.push_back(c);
    }
    return rep;
}

} // namespace flowlines
