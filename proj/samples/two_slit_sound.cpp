// Traces a handful of sound energy flow lines behind two openings and prints
// where they arrive at y = 8 m.

#include "flowlines/flowlines.hpp"

#include <cstdio>

int main()
{
    using namespace flowlines;

    const AcousticMedium air{1.2, 340.0};
    const WaveParams wave = WaveParams::from_frequency(1000.0, air.sound_speed);
    const ApertureSpec grating{{SlitProfile{0.75, std::nullopt, 0.25}, SlitProfile{-0.75, std::nullopt, 0.25}}};
    const QuadratureSpec quad = QuadratureSpec::for_wave(wave);

    const FluxField field = acoustic_flux_field(grating, wave, quad, air);

    TracerControls controls;
    controls.step = wave.wavelength / 20.0;
    controls.max_arc_length = 12.0;
    controls.bounds = {-6.0, 6.0, quad.absolute_floor, 8.0};

    const double y0 = quad.absolute_floor;
    const auto starts = launch_positions(slit_intervals(grating), 4, LaunchMode::equidistant, y0);
    const double peak = launch_plane_peak(field, y0, -1.0, 1.0, starts);
    const auto lines = trace_bundle(field, starts, controls, peak);

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto x8 = x_at_height(lines[i], 8.0);
        std::printf("line %zu from slit %zu: x0 = %+.3f m -> x(8 m) = %+.3f m  (%s)\n", i,
                    lines[i].origin_slit + 1, starts[i].start.x, x8.value_or(NAN),
                    std::string(to_string(lines[i].termination)).c_str());
    }
    const auto report = detect_crossings(lines);
    std::printf("axis crossings: slit 1 %zu, slit 2 %zu\n", report.slit1_crossed, report.slit2_crossed);
}
