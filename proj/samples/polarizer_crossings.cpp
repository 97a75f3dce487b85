// Counts symmetry-axis crossings of EME flow lines for a few polarizer
// angles behind the second slit.

#include "flowlines/flowlines.hpp"

#include <cstdio>

int main()
{
    using namespace flowlines;

    const WaveParams wave = WaveParams::from_wavelength(943e-9, vacuum::speed_of_light);
    const double sigma = 0.3e-3;
    const ApertureSpec slits{{SlitProfile{2.35e-3, sigma, 1.8 * sigma}, SlitProfile{-2.35e-3, sigma, 1.8 * sigma}}};
    const QuadratureSpec quad = QuadratureSpec::for_wave(wave);
    const IncidentPolarization light{1.0, 1.0, 0.0};

    TracerControls controls;
    controls.step = 5e-3;
    controls.max_arc_length = 12.0;
    controls.bounds = {-0.05, 0.05, 5e-3, 8.0};
    const auto starts = launch_positions(slit_intervals(slits), 8, LaunchMode::equidistant, 5e-3);

    for (double theta2 : {0.0, pi / 10, pi / 2, 7 * pi / 10}) {
        const FluxField field = em_flux_field(slits, light, PolarizerPair{0.0, theta2}, wave, quad);
        const double peak = launch_plane_peak(field, 5e-3, -3e-3, 3e-3, starts);
        const auto report = detect_crossings(trace_bundle(field, starts, controls, peak));
        std::printf("theta2 = %.4f rad: slit 1 lines crossing %zu, slit 2 lines crossing %zu\n", theta2,
                    report.slit1_crossed, report.slit2_crossed);
    }
}
