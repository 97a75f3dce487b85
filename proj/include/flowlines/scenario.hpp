#pragma once

// Scenario configuration: a flat `section.key = value` text format, strict
// parsing, regime-aware validation, and the pipeline that turns a config
// into traced lines, transverse profiles and reports.

#include "flowlines/acoustics.hpp"
#include "flowlines/electromagnetics.hpp"
#include "flowlines/oracles.hpp"
#include "flowlines/quantum.hpp"
#include "flowlines/tracer.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace flowlines
{

enum class Regime
{
    acoustic,
    electromagnetic,
    quantum,
};

inline std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::acoustic: return "acoustic";
    case Regime::electromagnetic: return "electromagnetic";
    case Regime::quantum: return "quantum";
    }
    return "acoustic";
}

enum class FringeReference
{
    single_slit_sum,
    none,
};

struct LaunchSpec
{
    std::size_t lines_per_slit = 20;
    LaunchMode mode = LaunchMode::equidistant;
    std::uint64_t seed = 1;
    double y = 0.0;
    double support_scale = 1.0;
};

struct OutputSpec
{
    bool trajectories = true;
    std::vector<double> profile_y;
    std::optional<double> profile_x_min;
    std::optional<double> profile_x_max;
    std::optional<std::size_t> profile_points;
    bool fringe_report = false;
    std::optional<double> fringe_y;
    FringeReference fringe_reference = FringeReference::single_slit_sum;
    bool crossing_report = true;
    bool svg = true;
    bool svg_timestamp = false;
};

struct ScenarioConfig
{
    std::string name = "scenario";
    Regime regime = Regime::acoustic;
    WaveParams wave;
    std::optional<double> frequency; ///< as given (acoustic)
    AcousticMedium medium;
    ParticleParams particle;
    bool natural_units = false;
    ApertureSpec aperture;
    IncidentPolarization polarization;
    std::vector<double> polarizers; ///< theta per slit (electromagnetic)
    QuadratureSpec quadrature;
    TracerControls tracer;
    LaunchSpec launch;
    OutputSpec outputs;

    /// Key/value pairs with every default expanded, numbers at 17 digits.
    std::vector<std::pair<std::string, std::string>> resolved;
};

inline constexpr double neutron_mass = 1.67492749804e-27; // kg
inline constexpr double codata_hbar = 1.054571817e-34;    // J s

namespace config_detail
{

struct Entry
{
    std::string value;
    int line = 0;
};

using RawConfig = std::map<std::string, Entry>;

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline const std::set<std::string>& fixed_keys()
{
    static const std::set<std::string> keys = {
        "scenario.name",
        "regime",
        "wave.frequency",
        "wave.wavelength",
        "medium.sound_speed",
        "medium.density",
        "particle.mass",
        "particle.hbar",
        "particle.natural_units",
        "aperture.normalization",
        "polarization.A",
        "polarization.B",
        "polarization.phase",
        "polarizer.theta1",
        "polarizer.theta2",
        "quadrature.method",
        "quadrature.panels_per_wavelength_of_phase",
        "quadrature.absolute_floor",
        "quadrature.max_panels",
        "quadrature.simpson_intervals",
        "tracer.step",
        "tracer.max_arc_length",
        "tracer.degenerate_floor",
        "tracer.x_min",
        "tracer.x_max",
        "tracer.y_min",
        "tracer.y_max",
        "launch.y",
        "launch.lines_per_slit",
        "launch.mode",
        "launch.seed",
        "launch.support_scale",
        "output.trajectories",
        "output.profile_y",
        "output.profile_x_min",
        "output.profile_x_max",
        "output.profile_points",
        "output.fringe_report",
        "output.fringe_y",
        "output.fringe_reference",
        "output.crossing_report",
        "output.svg",
        "output.svg_timestamp",
    };
    return keys;
}

inline const std::regex& slit_key_pattern()
{
    static const std::regex re(R"(aperture\.slit([1-9][0-9]*)\.(center|width|gaussian_width|half_support|amplitude_re|amplitude_im))");
    return re;
}

inline bool known_key(const std::string& key)
{
    return fixed_keys().count(key) != 0 || std::regex_match(key, slit_key_pattern());
}

/// Splits the text into key/value entries; unknown keys, duplicates and
/// malformed lines are parse errors.
inline RawConfig parse_text(std::string_view text)
{
    RawConfig raw;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigParseError("", "line " + std::to_string(line_no) + ": expected `key = value`");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) {
            throw ConfigParseError("", "line " + std::to_string(line_no) + ": empty key");
        }
        if (!known_key(key)) {
            throw ConfigParseError(key, "line " + std::to_string(line_no) + ": unknown key `" + key + "`");
        }
        if (value.empty()) {
            throw ConfigParseError(key, "line " + std::to_string(line_no) + ": key `" + key + "` has no value");
        }
        if (raw.count(key)) {
            throw ConfigParseError(key, "line " + std::to_string(line_no) + ": key `" + key + "` given twice");
        }
        raw[key] = {value, line_no};
        if (end == text.size()) {
            break;
        }
    }
    return raw;
}

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_number(const std::string& key, std::string_view s)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigParseError(key, "key `" + key + "`: `" + std::string(s) + "` is not a number");
    }
    return v;
}

/// Angle in radians: a number, or `pi`, `pi/m`, `n*pi`, `n*pi/m`.
inline double parse_angle(const std::string& key, const std::string& s)
{
    static const std::regex re(R"(^(?:([^*]+)\*)?pi(?:/([^/]+))?$)");
    std::smatch m;
    if (std::regex_match(s, m, re)) {
        const double n = m[1].matched ? parse_number(key, trim(m[1].str())) : 1.0;
        const double d = m[2].matched ? parse_number(key, trim(m[2].str())) : 1.0;
        if (d == 0.0) {
            throw ConfigParseError(key, "key `" + key + "`: division by zero in angle");
        }
        return n * pi / d;
    }
    return parse_number(key, s);
}

class Reader
{
public:
    explicit Reader(RawConfig raw) : raw_(std::move(raw)) {}

    bool has(const std::string& key) const { return raw_.count(key) != 0; }

    std::optional<std::string> text(const std::string& key) const
    {
        auto it = raw_.find(key);
        if (it == raw_.end()) {
            return std::nullopt;
        }
        return it->second.value;
    }

    std::optional<double> number(const std::string& key) const
    {
        auto t = text(key);
        if (!t) {
            return std::nullopt;
        }
        return parse_number(key, *t);
    }

    std::optional<double> angle(const std::string& key) const
    {
        auto t = text(key);
        if (!t) {
            return std::nullopt;
        }
        return parse_angle(key, *t);
    }

    std::optional<std::uint64_t> unsigned_int(const std::string& key) const
    {
        auto t = text(key);
        if (!t) {
            return std::nullopt;
        }
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
        if (ec != std::errc{} || ptr != t->data() + t->size()) {
            throw ConfigParseError(key, "key `" + key + "`: `" + *t + "` is not a non-negative integer");
        }
        return v;
    }

    std::optional<bool> boolean(const std::string& key) const
    {
        auto t = text(key);
        if (!t) {
            return std::nullopt;
        }
        if (*t == "true" || *t == "yes" || *t == "1") {
            return true;
        }
        if (*t == "false" || *t == "no" || *t == "0") {
            return false;
        }
        throw ConfigParseError(key, "key `" + key + "`: expected true or false");
    }

    std::vector<double> number_list(const std::string& key) const
    {
        std::vector<double> out;
        auto t = text(key);
        if (!t) {
            return out;
        }
        std::size_t pos = 0;
        while (pos <= t->size()) {
            const auto comma = std::min(t->find(',', pos), t->size());
            const std::string item = trim(std::string_view(*t).substr(pos, comma - pos));
            if (item.empty()) {
                throw ConfigParseError(key, "key `" + key + "`: empty list item");
            }
            out.push_back(parse_number(key, item));
            pos = comma + 1;
        }
        return out;
    }

    std::vector<std::string> keys_with_prefix(const std::string& prefix) const
    {
        std::vector<std::string> out;
        for (const auto& [k, v] : raw_) {
            if (k.rfind(prefix, 0) == 0) {
                out.push_back(k);
            }
        }
        return out;
    }

private:
    RawConfig raw_;
};

[[noreturn]] inline void invalid(const std::string& key, const std::string& what)
{
    throw ConfigValidationError(key, key.empty() ? what : "key `" + key + "`: " + what);
}

inline double require_positive(const Reader& r, const std::string& key)
{
    auto v = r.number(key);
    if (!v) {
        invalid(key, "required");
    }
    if (!(*v > 0.0) || !std::isfinite(*v)) {
        invalid(key, "must be a positive finite number");
    }
    return *v;
}

inline double require_finite(const Reader& r, const std::string& key)
{
    auto v = r.number(key);
    if (!v) {
        invalid(key, "required");
    }
    if (!std::isfinite(*v)) {
        invalid(key, "must be finite");
    }
    return *v;
}

inline double positive_or(const Reader& r, const std::string& key, double fallback)
{
    return r.has(key) ? require_positive(r, key) : fallback;
}

/// Smallest distance between slit centres, or the slit width for one slit.
inline double characteristic_separation(const ApertureSpec& a)
{
    if (a.slits.size() < 2) {
        return 2.0 * a.slits.front().half_support;
    }
    double d = INFINITY;
    for (std::size_t i = 0; i < a.slits.size(); ++i) {
        for (std::size_t j = i + 1; j < a.slits.size(); ++j) {
            d = std::min(d, std::abs(a.slits[i].center - a.slits[j].center));
        }
    }
    return d;
}

inline double min_half_support(const ApertureSpec& a)
{
    double w = INFINITY;
    for (const auto& s : a.slits) {
        w = std::min(w, s.half_support);
    }
    return w;
}

inline double max_extent(const ApertureSpec& a)
{
    double e = 0.0;
    for (const auto& s : a.slits) {
        e = std::max({e, std::abs(s.lo()), std::abs(s.hi())});
    }
    return e;
}

} // namespace config_detail

/// Upper bound on the arc-length step in wave regimes:
/// max(lambda / 10, k w^2 / 100) with w the narrowest slit half-support.
inline double wave_step_bound(const WaveParams& wave, const ApertureSpec& aperture)
{
    const double w = config_detail::min_half_support(aperture);
    return std::max(wave.wavelength / 10.0, wave.wavenumber * w * w / 100.0);
}

/// Half-width of the default fringe window at distance y: lambda y / w_min,
/// the central three lobes of the single-slit envelope.
inline double fringe_half_window(const ScenarioConfig& cfg, double y)
{
    return cfg.wave.wavelength * y / config_detail::min_half_support(cfg.aperture);
}

/// Number of profile samples at distance y: explicit, or a grid step of
/// lambda y / 40 d (twice the resolution measure_fringes asks for).
inline std::size_t profile_points_at(const ScenarioConfig& cfg, double y, double x_lo, double x_hi)
{
    if (cfg.outputs.profile_points) {
        return *cfg.outputs.profile_points;
    }
    const double d = config_detail::characteristic_separation(cfg.aperture);
    const double step = cfg.wave.wavelength * y / (40.0 * d);
    auto n = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / step)) + 1;
    return n | 1u; // odd, so a symmetric range samples x = 0
}

inline std::pair<double, double> profile_range_at(const ScenarioConfig& cfg, double y)
{
    const double half = fringe_half_window(cfg, y) + config_detail::max_extent(cfg.aperture);
    return {cfg.outputs.profile_x_min.value_or(-half), cfg.outputs.profile_x_max.value_or(half)};
}

/// Parses and validates a config text. Syntax problems and unknown keys
/// raise ConfigParseError; well-formed configs describing an invalid
/// experiment raise ConfigValidationError.
inline ScenarioConfig parse_config(std::string_view text)
{
    using namespace config_detail;
    const Reader r(parse_text(text));
    ScenarioConfig cfg;

    cfg.name = r.text("scenario.name").value_or("scenario");
    if (!std::regex_match(cfg.name, std::regex("[A-Za-z0-9_.-]+"))) {
        invalid("scenario.name", "use letters, digits, `_`, `-` or `.`");
    }

    const auto regime = r.text("regime");
    if (!regime) {
        invalid("regime", "required (acoustic, electromagnetic or quantum)");
    }
    if (*regime == "acoustic") {
        cfg.regime = Regime::acoustic;
    } else if (*regime == "electromagnetic") {
        cfg.regime = Regime::electromagnetic;
    } else if (*regime == "quantum") {
        cfg.regime = Regime::quantum;
    } else {
        invalid("regime", "must be acoustic, electromagnetic or quantum");
    }
    const bool acoustic = cfg.regime == Regime::acoustic;
    const bool em = cfg.regime == Regime::electromagnetic;
    const bool quantum = cfg.regime == Regime::quantum;

    // Keys that belong to another regime are rejected, not ignored.
    auto forbid = [&](const std::string& prefix, const char* why) {
        for (const auto& k : r.keys_with_prefix(prefix)) {
            invalid(k, why);
        }
    };
    if (!acoustic) {
        forbid("medium.", "medium constants apply to the acoustic regime only");
    }
    if (!em) {
        forbid("polarization.", "polarization applies to the electromagnetic regime only");
        forbid("polarizer.", "polarizers apply to the electromagnetic regime only");
    }
    if (!quantum) {
        forbid("particle.", "particle parameters apply to the quantum regime only");
    }

    // wave
    if (acoustic) {
        cfg.medium.sound_speed = positive_or(r, "medium.sound_speed", 340.0);
        cfg.medium.density = positive_or(r, "medium.density", 1.2);
        if (r.has("wave.frequency") == r.has("wave.wavelength")) {
            invalid("wave.frequency", "give exactly one of wave.frequency or wave.wavelength");
        }
        if (r.has("wave.frequency")) {
            cfg.frequency = require_positive(r, "wave.frequency");
            cfg.wave = WaveParams::from_frequency(*cfg.frequency, cfg.medium.sound_speed);
        } else {
            cfg.wave = WaveParams::from_wavelength(require_positive(r, "wave.wavelength"), cfg.medium.sound_speed);
        }
    } else {
        if (r.has("wave.frequency")) {
            invalid("wave.frequency", "only the acoustic regime takes a frequency; give wave.wavelength");
        }
        const double lambda = require_positive(r, "wave.wavelength");
        cfg.wave = WaveParams::from_wavelength(lambda, em ? vacuum::speed_of_light : 1.0);
    }

    if (quantum) {
        cfg.natural_units = r.boolean("particle.natural_units").value_or(false);
        if (!cfg.natural_units && r.has("particle.hbar")) {
            invalid("particle.hbar", "hbar is fixed in SI units; set particle.natural_units = true to override it");
        }
        const double mass = positive_or(r, "particle.mass", neutron_mass);
        const double hbar = positive_or(r, "particle.hbar", codata_hbar);
        cfg.particle = ParticleParams::with_de_broglie(mass, cfg.wave.wavelength, hbar);
        cfg.wave = WaveParams::from_wavelength(cfg.wave.wavelength, cfg.particle.forward_speed);
    }

    // aperture
    const auto norm = r.text("aperture.normalization").value_or("as-written");
    if (norm == "as-written") {
        cfg.aperture.normalization = Normalization::as_written;
    } else if (norm == "renormalized") {
        cfg.aperture.normalization = Normalization::renormalized;
    } else {
        invalid("aperture.normalization", "must be as-written or renormalized");
    }
    std::size_t slit_count = 0;
    for (const auto& k : r.keys_with_prefix("aperture.slit")) {
        std::smatch m;
        std::regex_match(k, m, slit_key_pattern());
        slit_count = std::max<std::size_t>(slit_count, std::stoul(m[1].str()));
    }
    if (slit_count == 0) {
        invalid("aperture.slit1.center", "at least one slit is required");
    }
    for (std::size_t i = 1; i <= slit_count; ++i) {
        const std::string p = "aperture.slit" + std::to_string(i) + ".";
        SlitProfile s;
        s.center = require_finite(r, p + "center");
        if (r.has(p + "gaussian_width")) {
            s.gaussian_width = require_positive(r, p + "gaussian_width");
            if (r.has(p + "width")) {
                invalid(p + "width", "a Gaussian slit is bounded by half_support, not width");
            }
            s.half_support = require_positive(r, p + "half_support");
        } else {
            if (r.has(p + "width") == r.has(p + "half_support")) {
                invalid(p + "width", "a uniform slit needs exactly one of width or half_support");
            }
            s.half_support = r.has(p + "width") ? 0.5 * require_positive(r, p + "width")
                                                : require_positive(r, p + "half_support");
        }
        const double re = r.has(p + "amplitude_re") ? require_finite(r, p + "amplitude_re") : 1.0;
        const double im = r.has(p + "amplitude_im") ? require_finite(r, p + "amplitude_im") : 0.0;
        s.amplitude = {re, im};
        cfg.aperture.slits.push_back(s);
    }
    try {
        cfg.aperture.validate();
    } catch (const DomainError& e) {
        invalid("aperture", e.what());
    }
    if (quantum) {
        for (std::size_t i = 0; i < cfg.aperture.slits.size(); ++i) {
            if (!cfg.aperture.slits[i].is_gaussian()) {
                invalid("aperture.slit" + std::to_string(i + 1) + ".gaussian_width",
                        "the quantum regime needs Gaussian slits");
            }
        }
    }

    // polarization
    if (em) {
        cfg.polarization.A = r.has("polarization.A") ? require_finite(r, "polarization.A") : 1.0;
        cfg.polarization.B = r.has("polarization.B") ? require_finite(r, "polarization.B") : 0.0;
        cfg.polarization.phase = r.angle("polarization.phase").value_or(0.0);
        if (!std::isfinite(cfg.polarization.phase)) {
            invalid("polarization.phase", "must be finite");
        }
        if (!(cfg.polarization.A * cfg.polarization.A + cfg.polarization.B * cfg.polarization.B > 0.0)) {
            invalid("polarization.A", "A^2 + B^2 must be positive");
        }
        if (cfg.aperture.slits.size() != 2) {
            invalid("aperture", "the electromagnetic regime models exactly two polarizer-covered slits");
        }
        for (int i = 1; i <= 2; ++i) {
            const std::string key = "polarizer.theta" + std::to_string(i);
            const double t = r.angle(key).value_or(0.0);
            if (!std::isfinite(t)) {
                invalid(key, "must be finite");
            }
            cfg.polarizers.push_back(t);
        }
    }

    // quadrature
    const auto method = r.text("quadrature.method").value_or("gauss-legendre-panels");
    if (method == "gauss-legendre-panels") {
        cfg.quadrature.method = QuadratureMethod::gauss_legendre_panels;
    } else if (method == "composite-simpson") {
        cfg.quadrature.method = QuadratureMethod::composite_simpson;
    } else {
        invalid("quadrature.method", "must be gauss-legendre-panels or composite-simpson");
    }
    cfg.quadrature.panels_per_wavelength_of_phase =
        positive_or(r, "quadrature.panels_per_wavelength_of_phase", 4.0);
    if (cfg.quadrature.panels_per_wavelength_of_phase < 4.0) {
        invalid("quadrature.panels_per_wavelength_of_phase", "must be at least 4");
    }
    cfg.quadrature.absolute_floor = positive_or(r, "quadrature.absolute_floor", 5.0 * cfg.wave.wavelength);
    if (auto v = r.unsigned_int("quadrature.max_panels")) {
        if (*v == 0) {
            invalid("quadrature.max_panels", "must be positive");
        }
        cfg.quadrature.max_panels = *v;
    }
    if (auto v = r.unsigned_int("quadrature.simpson_intervals")) {
        if (*v < 2 || *v % 2 != 0) {
            invalid("quadrature.simpson_intervals", "must be even and at least 2");
        }
        cfg.quadrature.simpson_intervals = *v;
    }

    // launch and tracer
    const double default_launch = quantum ? 0.0 : cfg.quadrature.absolute_floor;
    cfg.launch.y = r.has("launch.y") ? require_finite(r, "launch.y") : default_launch;
    if (!quantum && !(cfg.launch.y >= cfg.quadrature.absolute_floor)) {
        invalid("launch.y", "must not lie below quadrature.absolute_floor (" +
                                format_double(cfg.quadrature.absolute_floor) + " m)");
    }
    if (quantum && !(cfg.launch.y >= 0.0)) {
        invalid("launch.y", "must be >= 0 (t = y / v_y)");
    }
    if (auto v = r.unsigned_int("launch.lines_per_slit")) {
        if (*v == 0) {
            invalid("launch.lines_per_slit", "must be positive");
        }
        cfg.launch.lines_per_slit = *v;
    }
    const auto mode = r.text("launch.mode").value_or("equidistant");
    if (mode == "equidistant") {
        cfg.launch.mode = LaunchMode::equidistant;
    } else if (mode == "density-weighted") {
        cfg.launch.mode = LaunchMode::density_weighted;
    } else {
        invalid("launch.mode", "must be equidistant or density-weighted");
    }
    cfg.launch.seed = r.unsigned_int("launch.seed").value_or(1);
    cfg.launch.support_scale = positive_or(r, "launch.support_scale", 1.0);

    auto& t = cfg.tracer;
    t.step = require_positive(r, "tracer.step");
    if (!quantum) {
        const double bound = wave_step_bound(cfg.wave, cfg.aperture);
        if (t.step > bound) {
            invalid("tracer.step", "exceeds the bound max(lambda/10, k w^2/100) = " + format_double(bound) + " m");
        }
    }
    t.bounds.x_min = require_finite(r, "tracer.x_min");
    t.bounds.x_max = require_finite(r, "tracer.x_max");
    t.bounds.y_min = r.has("tracer.y_min") ? require_finite(r, "tracer.y_min") : cfg.launch.y;
    t.bounds.y_max = require_finite(r, "tracer.y_max");
    if (!(t.bounds.x_max > t.bounds.x_min)) {
        invalid("tracer.x_max", "must exceed tracer.x_min");
    }
    if (!(t.bounds.y_max > cfg.launch.y)) {
        invalid("tracer.y_max", "must exceed launch.y");
    }
    if (!(t.bounds.y_min <= cfg.launch.y)) {
        invalid("tracer.y_min", "must not exceed launch.y");
    }
    if (!quantum && !(t.bounds.y_min >= cfg.quadrature.absolute_floor)) {
        invalid("tracer.y_min", "must not lie below quadrature.absolute_floor");
    }
    if (quantum && !(t.bounds.y_min >= 0.0)) {
        invalid("tracer.y_min", "must be >= 0");
    }
    t.max_arc_length = positive_or(r, "tracer.max_arc_length", 4.0 * (t.bounds.y_max - cfg.launch.y));
    t.degenerate_floor = r.number("tracer.degenerate_floor").value_or(1e-8);
    if (!(t.degenerate_floor >= 0.0) || !(t.degenerate_floor < 1.0)) {
        invalid("tracer.degenerate_floor", "must lie in [0, 1)");
    }
    for (const auto& iv : slit_intervals(cfg.aperture, cfg.launch.support_scale)) {
        if (iv.lo < t.bounds.x_min || iv.hi > t.bounds.x_max) {
            invalid("tracer.x_min", "trace bounds must contain every launch interval");
        }
    }

    // outputs
    auto& o = cfg.outputs;
    o.trajectories = r.boolean("output.trajectories").value_or(true);
    o.profile_y = r.number_list("output.profile_y");
    for (double y : o.profile_y) {
        const double floor = quantum ? 0.0 : cfg.quadrature.absolute_floor;
        if (!(y > 0.0) || !(y >= floor) || !std::isfinite(y)) {
            invalid("output.profile_y", "profile distances must be finite and not below the propagation floor");
        }
    }
    o.profile_x_min = r.number("output.profile_x_min");
    o.profile_x_max = r.number("output.profile_x_max");
    if (o.profile_x_min.has_value() != o.profile_x_max.has_value()) {
        invalid("output.profile_x_min", "give both profile_x_min and profile_x_max or neither");
    }
    if (o.profile_x_min && !(*o.profile_x_max > *o.profile_x_min)) {
        invalid("output.profile_x_max", "must exceed output.profile_x_min");
    }
    if (auto v = r.unsigned_int("output.profile_points")) {
        if (*v < 3) {
            invalid("output.profile_points", "must be at least 3");
        }
        o.profile_points = *v;
    }
    o.fringe_report = r.boolean("output.fringe_report").value_or(!o.profile_y.empty());
    if (o.fringe_report) {
        if (o.profile_y.empty()) {
            invalid("output.fringe_report", "a fringe report needs at least one output.profile_y");
        }
        o.fringe_y = r.number("output.fringe_y").value_or(o.profile_y.back());
        if (std::find(o.profile_y.begin(), o.profile_y.end(), *o.fringe_y) == o.profile_y.end()) {
            invalid("output.fringe_y", "must be one of the output.profile_y values");
        }
        const auto [lo, hi] = profile_range_at(cfg, *o.fringe_y);
        const std::size_t n = profile_points_at(cfg, *o.fringe_y, lo, hi);
        const double spacing = cfg.wave.wavelength * *o.fringe_y / characteristic_separation(cfg.aperture);
        if ((hi - lo) / double(n - 1) > spacing / 20.0) {
            invalid("output.profile_points", "profile grid is coarser than fringe spacing / 20");
        }
    } else if (r.has("output.fringe_y")) {
        invalid("output.fringe_y", "set only together with a fringe report");
    }
    const auto ref = r.text("output.fringe_reference").value_or("single-slit-sum");
    if (ref == "single-slit-sum") {
        o.fringe_reference = FringeReference::single_slit_sum;
    } else if (ref == "none") {
        o.fringe_reference = FringeReference::none;
    } else {
        invalid("output.fringe_reference", "must be single-slit-sum or none");
    }
    o.crossing_report = r.boolean("output.crossing_report").value_or(true);
    o.svg = r.boolean("output.svg").value_or(true);
    o.svg_timestamp = r.boolean("output.svg_timestamp").value_or(false);

    // resolved view, every default expanded
    auto& res = cfg.resolved;
    auto put = [&](const std::string& k, const std::string& v) { res.emplace_back(k, v); };
    auto num = [&](const std::string& k, double v) { put(k, format_double(v)); };
    auto flag = [&](const std::string& k, bool v) { put(k, v ? "true" : "false"); };
    put("scenario.name", cfg.name);
    put("regime", std::string(to_string(cfg.regime)));
    if (cfg.frequency) {
        num("wave.frequency", *cfg.frequency);
    } else {
        num("wave.wavelength", cfg.wave.wavelength);
    }
    if (acoustic) {
        num("medium.sound_speed", cfg.medium.sound_speed);
        num("medium.density", cfg.medium.density);
    }
    if (quantum) {
        num("particle.mass", cfg.particle.mass);
        num("particle.hbar", cfg.particle.hbar);
        flag("particle.natural_units", cfg.natural_units);
    }
    put("aperture.normalization", cfg.aperture.normalization == Normalization::as_written ? "as-written" : "renormalized");
    for (std::size_t i = 0; i < cfg.aperture.slits.size(); ++i) {
        const auto& s = cfg.aperture.slits[i];
        const std::string p = "aperture.slit" + std::to_string(i + 1) + ".";
        num(p + "center", s.center);
        if (s.gaussian_width) {
            num(p + "gaussian_width", *s.gaussian_width);
        }
        num(p + "half_support", s.half_support);
        num(p + "amplitude_re", s.amplitude.real());
        num(p + "amplitude_im", s.amplitude.imag());
    }
    if (em) {
        num("polarization.A", cfg.polarization.A);
        num("polarization.B", cfg.polarization.B);
        num("polarization.phase", cfg.polarization.phase);
        num("polarizer.theta1", cfg.polarizers[0]);
        num("polarizer.theta2", cfg.polarizers[1]);
    }
    put("quadrature.method", method);
    num("quadrature.panels_per_wavelength_of_phase", cfg.quadrature.panels_per_wavelength_of_phase);
    num("quadrature.absolute_floor", cfg.quadrature.absolute_floor);
    put("quadrature.max_panels", std::to_string(cfg.quadrature.max_panels));
    put("quadrature.simpson_intervals", std::to_string(cfg.quadrature.simpson_intervals));
    num("tracer.step", t.step);
    num("tracer.max_arc_length", t.max_arc_length);
    num("tracer.degenerate_floor", t.degenerate_floor);
    num("tracer.x_min", t.bounds.x_min);
    num("tracer.x_max", t.bounds.x_max);
    num("tracer.y_min", t.bounds.y_min);
    num("tracer.y_max", t.bounds.y_max);
    num("launch.y", cfg.launch.y);
    put("launch.lines_per_slit", std::to_string(cfg.launch.lines_per_slit));
    put("launch.mode", std::string(to_string(cfg.launch.mode)));
    put("launch.seed", std::to_string(cfg.launch.seed));
    num("launch.support_scale", cfg.launch.support_scale);
    flag("output.trajectories", o.trajectories);
    {
        std::string ys;
        for (double y : o.profile_y) {
            ys += (ys.empty() ? "" : ", ") + format_double(y);
        }
        if (!ys.empty()) {
            put("output.profile_y", ys);
        }
    }
    if (o.profile_x_min) {
        num("output.profile_x_min", *o.profile_x_min);
        num("output.profile_x_max", *o.profile_x_max);
    }
    if (o.profile_points) {
        put("output.profile_points", std::to_string(*o.profile_points));
    }
    flag("output.fringe_report", o.fringe_report);
    if (o.fringe_y) {
        num("output.fringe_y", *o.fringe_y);
    }
    put("output.fringe_reference", ref);
    flag("output.crossing_report", o.crossing_report);
    flag("output.svg", o.svg);
    flag("output.svg_timestamp", o.svg_timestamp);
    return cfg;
}

// Pipeline

/// The regime's flux field for the whole aperture.
inline FluxField build_flux_field(const ScenarioConfig& cfg)
{
    switch (cfg.regime) {
    case Regime::acoustic: return acoustic_flux_field(cfg.aperture, cfg.wave, cfg.quadrature, cfg.medium);
    case Regime::electromagnetic:
        return em_flux_field(cfg.aperture, cfg.polarization, cfg.polarizers, cfg.wave, cfg.quadrature);
    case Regime::quantum: return bohmian_velocity_field(cfg.aperture, cfg.particle);
    }
    throw DomainError("unknown regime");
}

/// Flux field with only slit i open (its polarizer kept).
inline FluxField build_single_slit_field(const ScenarioConfig& cfg, std::size_t i)
{
    ScenarioConfig one = cfg;
    one.aperture = cfg.aperture.only(i);
    if (cfg.regime == Regime::electromagnetic) {
        one.polarizers = {cfg.polarizers.at(i)};
    }
    return build_flux_field(one);
}

/// Transverse profile value: |S| in the wave regimes, |Psi|^2 in the
/// quantum regime.
inline double profile_value(const ScenarioConfig& cfg, const FluxField& f, double x, double y)
{
    const FluxSample s = f.sample_at(x, y);
    return cfg.regime == Regime::quantum ? s.density : s.flux.norm();
}

struct Profile
{
    double y = 0.0;
    std::vector<double> x;
    std::vector<double> intensity;
    std::vector<double> reference; ///< incoherent single-slit sum
};

inline Profile compute_profile(const ScenarioConfig& cfg, const FluxField& field,
                               const std::vector<FluxField>& singles, double y)
{
    const auto [lo, hi] = profile_range_at(cfg, y);
    const std::size_t n = profile_points_at(cfg, y, lo, hi);
    Profile p;
    p.y = y;
    p.x.resize(n);
    p.intensity.resize(n);
    p.reference.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // symmetric about the midpoint, so mirrored ranges give mirrored grids
        const double t = (double(i) - 0.5 * double(n - 1)) / double(n - 1);
        const double x = 0.5 * (lo + hi) + t * (hi - lo);
        p.x[i] = x;
        p.intensity[i] = profile_value(cfg, field, x, y);
        double ref = 0.0;
        for (const auto& s : singles) {
            ref += profile_value(cfg, s, x, y);
        }
        p.reference[i] = ref;
    }
    return p;
}

inline std::vector<LaunchPoint> build_launches(const ScenarioConfig& cfg, const FluxField& field)
{
    const auto intervals = slit_intervals(cfg.aperture, cfg.launch.support_scale);
    const double y0 = cfg.launch.y;
    const auto density = [&field, y0](double x) { return field.density_at(x, y0); };
    return launch_positions(intervals, cfg.launch.lines_per_slit, cfg.launch.mode, y0, density, cfg.launch.seed);
}

struct ScenarioResult
{
    std::vector<FlowLine> lines;
    std::vector<Profile> profiles;
    std::optional<FringeReport> fringe;
    std::optional<CrossingReport> crossings;
    double launch_peak_density = 0.0;
};

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads = 0)
{
    ScenarioResult out;
    const FluxField field = build_flux_field(cfg);
    const auto launches = build_launches(cfg, field);
    const double extent = config_detail::max_extent(cfg.aperture) * std::max(1.0, cfg.launch.support_scale);
    out.launch_peak_density = launch_plane_peak(field, cfg.launch.y, -extent, extent, launches);
    out.lines = trace_bundle(field, launches, cfg.tracer, out.launch_peak_density, threads);

    std::vector<FluxField> singles;
    if (!cfg.outputs.profile_y.empty()) {
        for (std::size_t i = 0; i < cfg.aperture.slits.size(); ++i) {
            singles.push_back(build_single_slit_field(cfg, i));
        }
    }
    for (double y : cfg.outputs.profile_y) {
        out.profiles.push_back(compute_profile(cfg, field, singles, y));
    }
    if (cfg.outputs.fringe_report) {
        const double y = *cfg.outputs.fringe_y;
        const auto it = std::find_if(out.profiles.begin(), out.profiles.end(), [y](const Profile& p) { return p.y == y; });
        const double half = fringe_half_window(cfg, y);
        const FringeWindow window{-half, half};
        if (cfg.outputs.fringe_reference == FringeReference::single_slit_sum) {
            out.fringe = measure_fringes(it->x, it->intensity, window, it->reference);
        } else {
            out.fringe = measure_fringes(it->x, it->intensity, window);
        }
    }
    if (cfg.outputs.crossing_report) {
        out.crossings = detect_crossings(out.lines);
    }
    return out;
}

} // namespace flowlines
