#pragma once

#include "flowlines/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace flowlines
{

/// Time-averaged flux vector and scalar density at one point.
struct FluxSample
{
    Vec2 flux;
    double density = 0.0;
};

/// A plane vector field whose integral curves are flow lines.
///
/// The field is stored as an unscaled shape plus a positive scale factor.
/// Physical prefactors (1/2 rho0 omega, the vacuum impedance, ...) and user
/// rescaling live in the scale, so the flow direction and the relative
/// degenerate test never see them: geometry is exactly scale-free.
class FluxField
{
public:
    using Evaluator = std::function<FluxSample(double x, double y)>;

    FluxField() = default;
    explicit FluxField(Evaluator shape, double scale = 1.0)
        : shape_(std::make_shared<const Evaluator>(std::move(shape))), scale_(scale)
    {
        if (!(scale > 0.0)) {
            throw DomainError("flux field scale must be positive");
        }
    }

    /// Unscaled shape sample; the tracer works on this.
    FluxSample shape_at(double x, double y) const { return (*shape_)(x, y); }

    FluxSample sample_at(double x, double y) const
    {
        FluxSample s = shape_at(x, y);
        s.flux = scale_ * s.flux;
        s.density *= scale_;
        return s;
    }

    Vec2 raw_flux_at(double x, double y) const { return sample_at(x, y).flux; }
    double density_at(double x, double y) const { return sample_at(x, y).density; }

    /// Unit flow direction, or nullopt (Degenerate) when the density is
    /// below `degenerate_floor` (expressed in the same physical units as
    /// density_at) or the flux vanishes.
    std::optional<Vec2> direction_at(double x, double y, double degenerate_floor) const
    {
        return direction_from_shape(shape_at(x, y), degenerate_floor / scale_);
    }

    /// Direction from an already evaluated shape sample; `shape_floor` is in
    /// shape units.
    static std::optional<Vec2> direction_from_shape(const FluxSample& s, double shape_floor)
    {
        if (!(s.density >= shape_floor)) {
            return std::nullopt;
        }
        const double n = s.flux.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            return std::nullopt;
        }
        return Vec2{s.flux.x / n, s.flux.y / n};
    }

    double scale() const { return scale_; }

    /// Same geometry, flux and density multiplied by `factor` > 0.
    FluxField rescaled(double factor) const
    {
        if (!(factor > 0.0)) {
            throw DomainError("rescale factor must be positive");
        }
        FluxField out = *this;
        out.scale_ = scale_ * factor;
        return out;
    }

    explicit operator bool() const { return static_cast<bool>(shape_); }

private:
    std::shared_ptr<const Evaluator> shape_;
    double scale_ = 1.0;
};

} // namespace flowlines
