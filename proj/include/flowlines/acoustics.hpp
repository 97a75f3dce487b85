#pragma once

// Acoustic energy flux behind the grating: time-averaged Umov vector,
// intensity and energy density of a monochromatic pressure field.

#include "flowlines/flux_field.hpp"
#include "flowlines/wavefield.hpp"

namespace flowlines
{

struct AcousticMedium
{
    double density = 1.2;      ///< rho0, kg/m^3
    double sound_speed = 340.0; ///< c, m/s

    void validate() const
    {
        if (!(density > 0.0) || !(sound_speed > 0.0)) {
            throw DomainError("acoustic medium needs positive density and sound speed");
        }
    }
};

struct AcousticFluxSample
{
    Vec2 S;                    ///< <S>, W/m^2
    double intensity = 0.0;    ///< I = |<S>|
    double energy_density = 0.0; ///< w = I / c
};

namespace detail
{
/// -Im{P grad P*} = Im{P* grad P}, the Umov vector without 1/(2 rho0 omega).
inline Vec2 umov_shape(cdouble P, const CVec2& gradP)
{
    return {std::imag(std::conj(P) * gradP.x), std::imag(std::conj(P) * gradP.y)};
}
} // namespace detail

/// <S> = -(1 / 2 rho0 omega) Im{P dP*/dx e_x + P dP*/dy e_y}.
inline AcousticFluxSample umov_average(cdouble P, const CVec2& gradP, const AcousticMedium& medium,
                                       const WaveParams& wave)
{
    if (!(wave.angular_frequency > 0.0)) {
        throw DomainError("umov_average needs omega > 0");
    }
    const double scale = 1.0 / (2.0 * medium.density * wave.angular_frequency);
    const Vec2 S = scale * detail::umov_shape(P, gradP);
    AcousticFluxSample out;
    out.S = S;
    out.intensity = S.norm();
    out.energy_density = out.intensity / medium.sound_speed;
    return out;
}

/// Flux field of the propagated pressure; density channel is I.
inline FluxField acoustic_flux_field(const ApertureSpec& aperture, const WaveParams& wave,
                                     const QuadratureSpec& quad, const AcousticMedium& medium)
{
    aperture.validate();
    quad.validate();
    medium.validate();
    auto shape = [aperture, wave, quad](double x, double y) {
        const FieldSample f = fresnel_field(aperture, wave, quad, x, y);
        const Vec2 s = detail::umov_shape(f.value, f.gradient);
        return FluxSample{s, s.norm()};
    };
    return FluxField(shape, 1.0 / (2.0 * medium.density * wave.angular_frequency));
}

} // namespace flowlines
