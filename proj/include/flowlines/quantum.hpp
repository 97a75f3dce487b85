#pragma once

// Free-particle superposition of Gaussian packets launched from the slits,
// its probability current J = (hbar/m) Im(Psi* grad Psi) and the Bohmian
// velocity v = J / |Psi|^2.

#include "flowlines/flux_field.hpp"
#include "flowlines/wavefield.hpp"

#include <vector>

namespace flowlines
{

struct ParticleParams
{
    double mass = 0.0;          ///< kg
    double hbar = 1.054571817e-34; ///< J s
    double forward_speed = 0.0; ///< v_y, maps t to y = v_y t

    void validate() const
    {
        if (!(mass > 0.0) || !(hbar > 0.0) || !(forward_speed > 0.0)) {
            throw DomainError("particle needs positive mass, hbar and forward speed");
        }
    }

    /// Forward speed giving de Broglie wavelength lambda: m v = 2 pi hbar / lambda.
    static ParticleParams with_de_broglie(double mass, double wavelength, double hbar = 1.054571817e-34)
    {
        return ParticleParams{mass, hbar, two_pi * hbar / (mass * wavelength)};
    }
};

struct WavefunctionSample
{
    cdouble psi{};
    cdouble grad_psi{}; ///< dPsi/dx
    double density = 0.0;
    double current = 0.0;
    double velocity = 0.0;
};

/// Closed-form free evolution of the (unwindowed) Gaussian slit packets.
///
/// Each packet (2 pi s^2)^(-1/4) exp(-(x-mu)^2 / 4 s^2) evolves into
/// (2 pi s^2)^(-1/4) (1 + i tau)^(-1/2) exp(-(x-mu)^2 / 4 s^2 (1 + i tau)),
/// tau = hbar t / 2 m s^2. The superposition carries one global factor that
/// makes the total norm exactly 1 (free evolution preserves it).
class GaussianSuperposition
{
public:
    GaussianSuperposition(const ApertureSpec& aperture, const ParticleParams& particle)
        : particle_(particle)
    {
        aperture.validate();
        particle.validate();
        for (const auto& s : aperture.slits) {
            if (!s.is_gaussian()) {
                throw DomainError("quantum regime needs Gaussian slits; no closed form for a uniform slit");
            }
            const double w = *s.gaussian_width;
            packets_.push_back({s.center, w, s.amplitude * std::pow(two_pi * w * w, -0.25)});
        }
        // <psi_i|psi_j> at t = 0 for real Gaussians:
        // sqrt(2 s_i s_j / (s_i^2 + s_j^2)) exp(-(mu_i - mu_j)^2 / 4 (s_i^2 + s_j^2))
        double norm2 = 0.0;
        for (const auto& a : packets_) {
            for (const auto& b : packets_) {
                const double ss = a.width * a.width + b.width * b.width;
                const double d = a.center - b.center;
                const double overlap = std::sqrt(2.0 * a.width * b.width / ss) * std::exp(-d * d / (4.0 * ss));
                norm2 += std::real(std::conj(a.amplitude) * b.amplitude) * overlap *
                         std::sqrt(std::sqrt(two_pi * a.width * a.width * two_pi * b.width * b.width));
            }
        }
        if (!(norm2 > 0.0)) {
            throw DomainError("quantum superposition has zero norm");
        }
        const double g = 1.0 / std::sqrt(norm2);
        for (auto& p : packets_) {
            p.amplitude *= g;
        }
    }

    WavefunctionSample sample(double x, double t) const
    {
        if (!(t >= 0.0)) {
            throw DomainError("quantum evolution needs t >= 0");
        }
        cdouble psi{};
        cdouble dpsi{};
        for (const auto& p : packets_) {
            const double tau = particle_.hbar * t / (2.0 * particle_.mass * p.width * p.width);
            const cdouble spread(1.0, tau);
            const double u = x - p.center;
            const cdouble inv_width2 = 1.0 / (4.0 * p.width * p.width * spread);
            const cdouble value = p.amplitude / std::sqrt(spread) * std::exp(-u * u * inv_width2);
            psi += value;
            dpsi += -2.0 * u * inv_width2 * value;
        }
        WavefunctionSample out;
        out.psi = psi;
        out.grad_psi = dpsi;
        out.density = std::norm(psi);
        out.current = particle_.hbar / particle_.mass * std::imag(std::conj(psi) * dpsi);
        out.velocity = out.density > 0.0 ? out.current / out.density : 0.0;
        return out;
    }

    const ParticleParams& particle() const { return particle_; }

private:
    struct Packet
    {
        double center;
        double width;
        cdouble amplitude; ///< includes (2 pi s^2)^(-1/4)
    };
    std::vector<Packet> packets_;
    ParticleParams particle_;
};

inline WavefunctionSample free_gaussian_superposition(const ApertureSpec& aperture, const ParticleParams& particle,
                                                      double x, double t)
{
    return GaussianSuperposition(aperture, particle).sample(x, t);
}

/// Bohmian flow in the (x, y = v_y t) plane: direction (v, v_y) / norm,
/// density channel |Psi|^2.
inline FluxField bohmian_velocity_field(const ApertureSpec& aperture, const ParticleParams& particle)
{
    GaussianSuperposition state(aperture, particle);
    const double vy = particle.forward_speed;
    auto shape = [state = std::move(state), vy](double x, double y) {
        const WavefunctionSample s = state.sample(x, y / vy);
        return FluxSample{{s.current, s.density * vy}, s.density};
    };
    return FluxField(shape);
}

} // namespace flowlines
