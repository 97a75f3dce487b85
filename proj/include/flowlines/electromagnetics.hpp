#pragma once

// Electromagnetic energy flow behind two slits covered by linear polarizers.
//
// The incident wave E = A e^{iky} e_z - B e^{i phi} e^{iky} e_x is projected
// onto each polarizer axis (angle theta_i from z in the z-x plane). The z
// components behind the grating are per-slit linear combinations of the
// propagated scalars psi_i; the transverse components follow from the E- and
// H-polarization subsystems of Maxwell's equations for z-independent fields.

#include "flowlines/flux_field.hpp"
#include "flowlines/wavefield.hpp"

#include <array>
#include <span>
#include <vector>

namespace flowlines
{

namespace vacuum
{
inline constexpr double speed_of_light = 299792458.0;          // m/s, exact
inline constexpr double permittivity = 8.8541878128e-12;       // F/m
/// mu0 chosen so that 1/sqrt(eps0 mu0) reproduces c exactly.
inline constexpr double permeability = 1.0 / (permittivity * speed_of_light * speed_of_light);
/// sqrt(eps0/mu0) = eps0 c, the scale carried by H in the incident field.
inline constexpr double admittance = permittivity * speed_of_light;
} // namespace vacuum

struct IncidentPolarization
{
    double A = 1.0;     ///< z-component amplitude
    double B = 0.0;     ///< x-component amplitude
    double phase = 0.0; ///< phi, rad

    void validate() const
    {
        if (!(A * A + B * B > 0.0) || !std::isfinite(phase)) {
            throw DomainError("incident polarization needs A^2 + B^2 > 0 and a finite phase");
        }
    }
};

/// Polarizer axes behind slits 1 and 2, measured from z. Axes are lines, so
/// angles are only meaningful modulo pi.
struct PolarizerPair
{
    double theta1 = 0.0;
    double theta2 = 0.0;

    std::array<double, 2> angles() const { return {theta1, theta2}; }
};

/// Projection coefficients of one polarizer: the slit's psi contributes
/// e * psi to Ez and sqrt(eps0/mu0) * h * psi to Hz.
struct PolarizerCoefficients
{
    cdouble e{};
    cdouble h{};
};

/// Ez coefficient A cos^2 - B e^{i phi} sin cos; Hz coefficient
/// -A cos sin + B e^{i phi} sin^2.
inline PolarizerCoefficients polarizer_coefficients(const IncidentPolarization& pol, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const cdouble b = pol.B * std::polar(1.0, pol.phase);
    return {pol.A * c * c - b * (s * c), -pol.A * (c * s) + b * (s * s)};
}

/// Malus projector onto the polarizer axis in the (z, x) components of the
/// electric field: (Ez, Ex) -> (n . E) n with n = (cos theta, sin theta).
inline std::array<cdouble, 2> project_onto_axis(std::array<cdouble, 2> e_zx, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const cdouble along = c * e_zx[0] + s * e_zx[1];
    return {along * c, along * s};
}

struct EMFieldSample
{
    cdouble Ez{}, Ex{}, Ey{};
    cdouble Hz{}, Hx{}, Hy{};
};

struct EMFluxSample
{
    Vec2 S;                     ///< (S_x, S_y) of Re(E x H*)/2, W/m^2
    double Sz = 0.0;            ///< diagnostic only
    double energy_density = 0.0; ///< U, J/m^3
};

struct TransverseComponents
{
    cdouble Hx{}, Hy{}, Ex{}, Ey{};
};

namespace detail
{

inline void check_polarizers(const ApertureSpec& aperture, std::span<const double> thetas)
{
    if (thetas.size() != aperture.slits.size()) {
        throw DomainError("one polarizer angle per slit is required");
    }
    for (double t : thetas) {
        if (!std::isfinite(t)) {
            throw DomainError("polarizer angles must be finite");
        }
    }
}

struct ZFields
{
    FieldSample ez; ///< Ez with gradient
    FieldSample hz; ///< Hz / sqrt(eps0/mu0) with gradient
};

inline ZFields z_fields(const ApertureSpec& aperture, const IncidentPolarization& pol,
                        std::span<const double> thetas, const WaveParams& wave, const QuadratureSpec& quad,
                        double x, double y)
{
    ZFields out;
    for (std::size_t i = 0; i < aperture.slits.size(); ++i) {
        const FieldSample psi = fresnel_field_slit(aperture.slits[i], aperture.normalization, wave, quad, x, y);
        const PolarizerCoefficients c = polarizer_coefficients(pol, thetas[i]);
        out.ez.value += c.e * psi.value;
        out.ez.gradient.x += c.e * psi.gradient.x;
        out.ez.gradient.y += c.e * psi.gradient.y;
        out.hz.value += c.h * psi.value;
        out.hz.gradient.x += c.h * psi.gradient.x;
        out.hz.gradient.y += c.h * psi.gradient.y;
    }
    return out;
}

} // namespace detail

/// (Ez, Hz) behind the polarizers, each slit's psi propagated separately.
inline std::pair<cdouble, cdouble> em_z_components(const ApertureSpec& aperture, const IncidentPolarization& pol,
                                                   std::span<const double> thetas, const WaveParams& wave,
                                                   const QuadratureSpec& quad, double x, double y)
{
    detail::check_polarizers(aperture, thetas);
    cdouble ez{};
    cdouble hz{};
    for (std::size_t i = 0; i < aperture.slits.size(); ++i) {
        const ApertureSpec single = aperture.only(i);
        const cdouble psi = fresnel_propagate(single, wave, quad, x, y);
        const PolarizerCoefficients c = polarizer_coefficients(pol, thetas[i]);
        ez += c.e * psi;
        hz += c.h * psi;
    }
    return {ez, vacuum::admittance * hz};
}

inline std::pair<cdouble, cdouble> em_z_components(const ApertureSpec& aperture, const IncidentPolarization& pol,
                                                   const PolarizerPair& pp, const WaveParams& wave,
                                                   const QuadratureSpec& quad, double x, double y)
{
    const auto angles = pp.angles();
    return em_z_components(aperture, pol, std::span<const double>(angles), wave, quad, x, y);
}

/// Transverse components from the z-component gradients:
/// Hx = (eps0 c^2 / i omega) dEz/dy, Hy = -(eps0 c^2 / i omega) dEz/dx,
/// Ex = -(1 / i omega eps0) dHz/dy,  Ey = (1 / i omega eps0) dHz/dx.
inline TransverseComponents em_transverse_components(const CVec2& ez_grad, const CVec2& hz_grad,
                                                     const WaveParams& wave)
{
    const cdouble i_omega(0.0, wave.angular_frequency);
    const cdouble e_to_h = vacuum::permittivity * vacuum::speed_of_light * vacuum::speed_of_light / i_omega;
    const cdouble h_to_e = 1.0 / (i_omega * vacuum::permittivity);
    TransverseComponents t;
    t.Hx = e_to_h * ez_grad.y;
    t.Hy = -e_to_h * ez_grad.x;
    t.Ex = -h_to_e * hz_grad.y;
    t.Ey = h_to_e * hz_grad.x;
    return t;
}

/// All six field components at (x, y).
inline EMFieldSample em_field(const ApertureSpec& aperture, const IncidentPolarization& pol,
                              std::span<const double> thetas, const WaveParams& wave, const QuadratureSpec& quad,
                              double x, double y)
{
    detail::check_polarizers(aperture, thetas);
    const detail::ZFields z = detail::z_fields(aperture, pol, thetas, wave, quad, x, y);
    const double adm = vacuum::admittance;
    const CVec2 hz_grad{adm * z.hz.gradient.x, adm * z.hz.gradient.y};
    const TransverseComponents t = em_transverse_components(z.ez.gradient, hz_grad, wave);
    EMFieldSample f;
    f.Ez = z.ez.value;
    f.Hz = adm * z.hz.value;
    f.Ex = t.Ex;
    f.Ey = t.Ey;
    f.Hx = t.Hx;
    f.Hy = t.Hy;
    return f;
}

/// S = Re(E x H*)/2 and U = (eps0 |E|^2 + mu0 |H|^2)/4.
inline EMFluxSample poynting_average(const EMFieldSample& f)
{
    EMFluxSample out;
    out.S.x = 0.5 * std::real(f.Ey * std::conj(f.Hz) - f.Ez * std::conj(f.Hy));
    out.S.y = 0.5 * std::real(f.Ez * std::conj(f.Hx) - f.Ex * std::conj(f.Hz));
    out.Sz = 0.5 * std::real(f.Ex * std::conj(f.Hy) - f.Ey * std::conj(f.Hx));
    const double e2 = std::norm(f.Ex) + std::norm(f.Ey) + std::norm(f.Ez);
    const double h2 = std::norm(f.Hx) + std::norm(f.Hy) + std::norm(f.Hz);
    out.energy_density = 0.25 * (vacuum::permittivity * e2 + vacuum::permeability * h2);
    return out;
}

/// Flux field with vector channel S and density channel cU, so the tracer's
/// unit direction is S / cU up to normalization.
inline FluxField em_flux_field(const ApertureSpec& aperture, const IncidentPolarization& pol,
                               std::vector<double> thetas, const WaveParams& wave, const QuadratureSpec& quad)
{
    aperture.validate();
    quad.validate();
    pol.validate();
    detail::check_polarizers(aperture, thetas);
    auto shape = [aperture, pol, thetas = std::move(thetas), wave, quad](double x, double y) {
        const EMFluxSample s = poynting_average(em_field(aperture, pol, thetas, wave, quad, x, y));
        return FluxSample{s.S, vacuum::speed_of_light * s.energy_density};
    };
    return FluxField(shape);
}

inline FluxField em_flux_field(const ApertureSpec& aperture, const IncidentPolarization& pol,
                               const PolarizerPair& pp, const WaveParams& wave, const QuadratureSpec& quad)
{
    const auto a = pp.angles();
    return em_flux_field(aperture, pol, std::vector<double>(a.begin(), a.end()), wave, quad);
}

} // namespace flowlines
