#pragma once

// Flow-line integration: dr/ds = F(r) / |F(r)| in arc length s, classical
// fixed-step RK4, with nodal-point and window termination.

#include "flowlines/flux_field.hpp"
#include "flowlines/quadrature.hpp"
#include "flowlines/wavefield.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

namespace flowlines
{

struct Bounds
{
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(Vec2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
};

struct TracerControls
{
    double step = 0.0;           ///< arc-length step h
    double max_arc_length = 0.0;
    double degenerate_floor = 1e-8; ///< fraction of the peak launch-plane density
    Bounds bounds;

    void validate() const
    {
        if (!(step > 0.0) || !(max_arc_length > 0.0)) {
            throw DomainError("tracer step and max_arc_length must be positive");
        }
        if (!(degenerate_floor >= 0.0) || !(degenerate_floor < 1.0)) {
            throw DomainError("degenerate_floor must lie in [0, 1)");
        }
        if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min)) {
            throw DomainError("trace bounds are empty");
        }
    }
};

struct FlowPoint
{
    double x = 0.0;
    double y = 0.0;
    double Sx = 0.0;
    double Sy = 0.0;
    double density = 0.0;

    Vec2 position() const { return {x, y}; }
};

enum class Termination
{
    left_bounds,
    reached_max_arc,
    degenerate_node,
    step_failure,
};

inline std::string_view to_string(Termination t)
{
    switch (t) {
    case Termination::left_bounds: return "left-bounds";
    case Termination::reached_max_arc: return "reached-max-arc";
    case Termination::degenerate_node: return "degenerate-node";
    case Termination::step_failure: return "step-failure";
    }
    return "unknown";
}

struct FlowLine
{
    std::vector<FlowPoint> points;
    std::size_t origin_slit = 0; ///< 0-based slit index
    Termination termination = Termination::reached_max_arc;
};

struct LaunchPoint
{
    Vec2 start;
    std::size_t origin_slit = 0;
};

namespace detail
{

inline FlowPoint make_point(const FluxField& field, Vec2 r, const FluxSample& shape)
{
    const double s = field.scale();
    return {r.x, r.y, s * shape.flux.x, s * shape.flux.y, s * shape.density};
}

} // namespace detail

/// Traces one line. `peak_density` is the launch-plane peak in the field's
/// physical units; the degenerate threshold is controls.degenerate_floor
/// times that peak.
inline FlowLine trace(const FluxField& field, Vec2 start, const TracerControls& controls, double peak_density,
                      std::size_t origin_slit = 0)
{
    controls.validate();
    if (!controls.bounds.contains(start)) {
        throw LaunchError("launch point outside the trace bounds");
    }
    const double shape_floor = controls.degenerate_floor * peak_density / field.scale();

    FluxSample here = field.shape_at(start.x, start.y);
    auto dir = FluxField::direction_from_shape(here, shape_floor);
    if (!dir) {
        throw LaunchError("launch point is degenerate (density below the floor)");
    }

    FlowLine line;
    line.origin_slit = origin_slit;
    line.points.push_back(detail::make_point(field, start, here));

    const double h = controls.step;
    Vec2 r = start;
    Vec2 k1 = *dir;
    double arc = 0.0;
    // Stop once the remaining arc is a rounding residue of the step.
    const double arc_slack = 1e-12 * h;

    while (true) {
        const double remaining = controls.max_arc_length - arc;
        if (remaining <= arc_slack) {
            line.termination = Termination::reached_max_arc;
            return line;
        }
        const double hs = std::min(h, remaining);

        auto direction = [&](Vec2 p) { return FluxField::direction_from_shape(field.shape_at(p.x, p.y), shape_floor); };
        const auto k2 = direction(r + (0.5 * hs) * k1);
        if (!k2) {
            line.termination = Termination::degenerate_node;
            return line;
        }
        const auto k3 = direction(r + (0.5 * hs) * *k2);
        if (!k3) {
            line.termination = Termination::degenerate_node;
            return line;
        }
        const auto k4 = direction(r + hs * *k3);
        if (!k4) {
            line.termination = Termination::degenerate_node;
            return line;
        }
        const Vec2 next = r + (hs / 6.0) * (k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);

        if (!(next.y > r.y)) {
            line.termination = Termination::step_failure;
            return line;
        }
        arc = (hs == h) ? arc + h : controls.max_arc_length;

        here = field.shape_at(next.x, next.y);
        line.points.push_back(detail::make_point(field, next, here));
        r = next;

        if (!controls.bounds.contains(r)) {
            line.termination = Termination::left_bounds;
            return line;
        }
        dir = FluxField::direction_from_shape(here, shape_floor);
        if (!dir) {
            line.termination = Termination::degenerate_node;
            return line;
        }
        k1 = *dir;
    }
}

/// Peak physical density over a launch plane, sampled on `samples` equally
/// spaced points of [x_lo, x_hi] plus the given launch points.
inline double launch_plane_peak(const FluxField& field, double y, double x_lo, double x_hi,
                                std::span<const LaunchPoint> launches = {}, std::size_t samples = 1025)
{
    double peak = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = samples > 1 ? double(i) / double(samples - 1) : 0.5;
        peak = std::max(peak, field.density_at(x_lo + t * (x_hi - x_lo), y));
    }
    for (const auto& l : launches) {
        peak = std::max(peak, field.density_at(l.start.x, l.start.y));
    }
    return peak;
}

/// Traces every launch point, possibly on several threads. Results are
/// ordered by launch index and independent of the thread count.
inline std::vector<FlowLine> trace_bundle(const FluxField& field, std::span<const LaunchPoint> launches,
                                          const TracerControls& controls, double peak_density,
                                          unsigned threads = 0)
{
    controls.validate();
    std::vector<FlowLine> out(launches.size());
    if (launches.empty()) {
        return out;
    }
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, launches.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::size_t error_index = launches.size();
    std::mutex error_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < launches.size(); i = next++) {
            try {
                out[i] = trace(field, launches[i].start, controls, peak_density, launches[i].origin_slit);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                // Report the lowest failing index so the error is thread-count independent.
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

// Launch rules

enum class LaunchMode
{
    equidistant,
    density_weighted,
};

inline std::string_view to_string(LaunchMode m)
{
    return m == LaunchMode::equidistant ? "equidistant" : "density-weighted";
}

struct LaunchInterval
{
    double lo = 0.0;
    double hi = 0.0;
    std::size_t slit = 0;
};

/// [center - s*a, center + s*a] for each slit, s = support_scale.
inline std::vector<LaunchInterval> slit_intervals(const ApertureSpec& aperture, double support_scale = 1.0)
{
    if (!(support_scale > 0.0)) {
        throw DomainError("launch support scale must be positive");
    }
    std::vector<LaunchInterval> out;
    for (std::size_t i = 0; i < aperture.slits.size(); ++i) {
        const auto& s = aperture.slits[i];
        out.push_back({s.center - support_scale * s.half_support, s.center + support_scale * s.half_support, i});
    }
    return out;
}

namespace detail
{

/// Inverse CDF of a non-negative density on [lo, hi], tabulated on `cells`
/// cells with 10-point Gauss-Legendre masses and linear inside each cell.
class TabulatedCdf
{
public:
    TabulatedCdf(const std::function<double(double)>& density, double lo, double hi, std::size_t cells)
        : lo_(lo), width_((hi - lo) / double(cells)), cdf_(cells + 1, 0.0)
    {
        const auto& rule = quadrature::kernel_rule();
        for (std::size_t c = 0; c < cells; ++c) {
            const double a = lo + double(c) * width_;
            const double mid = a + 0.5 * width_;
            double mass = 0.0;
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                mass += rule.weights[j] * std::max(0.0, density(mid + 0.5 * width_ * rule.nodes[j]));
            }
            cdf_[c + 1] = cdf_[c] + 0.5 * width_ * mass;
        }
        if (!(cdf_.back() > 0.0)) {
            throw LaunchError("density-weighted launch over an interval with zero density");
        }
    }

    double quantile(double u) const
    {
        const double target = u * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        std::size_t c = it == cdf_.begin() ? 0 : std::size_t(it - cdf_.begin()) - 1;
        c = std::min(c, cdf_.size() - 2);
        const double mass = cdf_[c + 1] - cdf_[c];
        const double frac = mass > 0.0 ? (target - cdf_[c]) / mass : 0.5;
        return lo_ + (double(c) + std::clamp(frac, 0.0, 1.0)) * width_;
    }

private:
    double lo_;
    double width_;
    std::vector<double> cdf_;
};

} // namespace detail

/// Launch points on the plane y = launch_y, `per_interval` per interval.
///
/// equidistant: cell centres lo + (j + 1/2)(hi - lo)/n.
/// density_weighted: independent draws from density restricted to the
/// interval (inverse CDF, mt19937_64 seeded with `seed`), sorted by x.
inline std::vector<LaunchPoint> launch_positions(std::span<const LaunchInterval> intervals, std::size_t per_interval,
                                                 LaunchMode mode, double launch_y,
                                                 const std::function<double(double)>& density = {},
                                                 std::uint64_t seed = 0, std::size_t cdf_cells = 8192)
{
    if (per_interval == 0) {
        throw LaunchError("at least one line per slit is required");
    }
    std::vector<LaunchPoint> out;
    out.reserve(intervals.size() * per_interval);
    std::mt19937_64 rng(seed);
    for (const auto& iv : intervals) {
        if (!(iv.hi > iv.lo)) {
            throw LaunchError("empty launch interval");
        }
        if (mode == LaunchMode::equidistant) {
            const double w = (iv.hi - iv.lo) / double(per_interval);
            for (std::size_t j = 0; j < per_interval; ++j) {
                out.push_back({{iv.lo + (double(j) + 0.5) * w, launch_y}, iv.slit});
            }
            continue;
        }
        if (!density) {
            throw LaunchError("density-weighted launch needs a density");
        }
        const detail::TabulatedCdf cdf(density, iv.lo, iv.hi, cdf_cells);
        std::vector<double> xs(per_interval);
        for (auto& x : xs) {
            // 53 random bits -> uniform double in [0, 1); same on every platform.
            const double u = double(rng() >> 11) * 0x1.0p-53;
            x = cdf.quantile(u);
        }
        std::sort(xs.begin(), xs.end());
        for (double x : xs) {
            out.push_back({{x, launch_y}, iv.slit});
        }
    }
    return out;
}

/// x where the line crosses height y, by cubic Hermite interpolation with
/// slopes dx/dy = Sx/Sy; nullopt if the line never reaches y.
inline std::optional<double> x_at_height(const FlowLine& line, double y)
{
    const auto& p = line.points;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i - 1].y <= y && y <= p[i].y) {
            const double dy = p[i].y - p[i - 1].y;
            if (!(dy > 0.0)) {
                return p[i].x;
            }
            const double t = (y - p[i - 1].y) / dy;
            const double m0 = p[i - 1].Sx / p[i - 1].Sy * dy;
            const double m1 = p[i].Sx / p[i].Sy * dy;
            const double t2 = t * t;
            const double t3 = t2 * t;
            return (2 * t3 - 3 * t2 + 1) * p[i - 1].x + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p[i].x +
                   (t3 - t2) * m1;
        }
    }
    return std::nullopt;
}

} // namespace flowlines
