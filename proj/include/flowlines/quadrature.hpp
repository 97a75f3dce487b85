#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace flowlines::quadrature
{

/// Gauss-Legendre rule on [-1, 1]. Nodes are stored exactly antisymmetric
/// (node[n-1-i] == -node[i]) so that mirrored panels produce mirrored
/// abscissae bit for bit.
template <std::size_t N>
struct GaussLegendreRule
{
    std::array<double, N> nodes{};
    std::array<double, N> weights{};
};

template <std::size_t N>
GaussLegendreRule<N> make_gauss_legendre()
{
    GaussLegendreRule<N> rule;
    constexpr std::size_t half = (N + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_N.
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(N) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (std::size_t k = 2; k <= N; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = N * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        // recompute derivative at the converged root
        double p0 = 1.0;
        double p1 = z;
        for (std::size_t k = 2; k <= N; ++k) {
            const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[N - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[N - 1 - i] = w;
    }
    if constexpr (N % 2 == 1) {
        rule.nodes[N / 2] = 0.0;
    }
    return rule;
}

/// The panel rule used by the Fresnel kernel.
inline constexpr std::size_t kernel_order = 10;

inline const GaussLegendreRule<kernel_order>& kernel_rule()
{
    static const GaussLegendreRule<kernel_order> rule = make_gauss_legendre<kernel_order>();
    return rule;
}

/// Integrate f over [a, b] with `panels` equal Gauss-Legendre panels.
/// Generic helper used by norm audits and profile integrals.
template <class F>
auto integrate_panels(F&& f, double a, double b, std::size_t panels)
{
    const auto& rule = kernel_rule();
    const double width = (b - a) / static_cast<double>(panels);
    using R = decltype(f(a));
    R sum{};
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = a + (static_cast<double>(p) + 0.5) * width;
        const double half = 0.5 * width;
        R local{};
        for (std::size_t j = 0; j < kernel_order; ++j) {
            local += rule.weights[j] * f(mid + half * rule.nodes[j]);
        }
        sum += half * local;
    }
    return sum;
}

} // namespace flowlines::quadrature
