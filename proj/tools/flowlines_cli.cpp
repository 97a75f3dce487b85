// flowlines command-line front end.
//
//   flowlines run <config> [--out DIR] [--threads N] [--no-svg]
//   flowlines validate <config>
//   flowlines presets list | copy <name> [--to PATH]
//
// Exit codes: 0 success, 1 config parse error, 2 validation error,
// 3 numerical error during the run, 4 I/O or usage error.

#include "flowlines/flowlines.hpp"
#include "flowlines/embedded_presets.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace flowlines;

namespace
{

enum Exit : int
{
    ok = 0,
    parse_error = 1,
    validation_error = 2,
    numerical_error = 3,
    io_error = 4,
};

std::string sha256_hex(const std::string& data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + p.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Loads and validates; prints the error and returns the exit code on failure.
std::optional<ScenarioConfig> load(const std::string& path, int& code)
{
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        code = io_error;
        return std::nullopt;
    }
    try {
        return parse_config(text);
    } catch (const ConfigParseError& e) {
        std::cerr << path << ": parse error: " << e.what() << '\n';
        code = parse_error;
    } catch (const ConfigValidationError& e) {
        std::cerr << path << ": invalid config: " << e.what() << '\n';
        code = validation_error;
    }
    return std::nullopt;
}

fs::path default_out_dir(const ScenarioConfig& cfg)
{
    if (const char* env = std::getenv("FLOWLINES_OUT_DIR"); env && *env) {
        return fs::path(env) / cfg.name;
    }
    return fs::path("flowlines_out") / cfg.name;
}

std::string utc_now()
{
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

int run(const std::string& path, const std::string& out_opt, unsigned threads, bool no_svg)
{
    int code = ok;
    auto cfg = load(path, code);
    if (!cfg) {
        return code;
    }
    if (no_svg) {
        cfg->outputs.svg = false;
    }

    // Everything is computed before the first file is written, so a failed
    // run leaves no partial outputs behind.
    ScenarioResult result;
    try {
        result = run_scenario(*cfg, threads);
    } catch (const DomainError& e) {
        std::cerr << "numerical error (domain): " << e.what() << '\n';
        return numerical_error;
    } catch (const QuadratureError& e) {
        std::cerr << "numerical error (quadrature): " << e.what() << '\n';
        return numerical_error;
    } catch (const NonConvergence& e) {
        std::cerr << "numerical error (convergence): " << e.what() << '\n';
        return numerical_error;
    } catch (const LaunchError& e) {
        std::cerr << "numerical error (launch): " << e.what() << '\n';
        return numerical_error;
    } catch (const InsufficientResolution& e) {
        std::cerr << "numerical error (fringe resolution): " << e.what() << '\n';
        return numerical_error;
    }

    std::vector<std::pair<std::string, std::string>> files;
    if (cfg->outputs.trajectories) {
        std::ostringstream s;
        write_trajectories_csv(s, result.lines);
        files.emplace_back("trajectories.csv", s.str());
    }
    if (!result.profiles.empty()) {
        std::ostringstream s;
        write_profiles_csv(s, result.profiles);
        files.emplace_back("profiles.csv", s.str());
    }
    if (result.fringe) {
        files.emplace_back("fringe_report.json",
                           fringe_report_json(*result.fringe, *cfg->outputs.fringe_y).dump(2) + "\n");
    }
    if (result.crossings) {
        files.emplace_back("crossing_report.json", crossing_report_json(*result.crossings).dump(2) + "\n");
    }
    if (cfg->outputs.svg && !result.lines.empty()) {
        SvgStyle style;
        style.title = cfg->name + " (" + std::string(to_string(cfg->regime)) + ")";
        if (cfg->outputs.svg_timestamp) {
            style.timestamp = utc_now();
        }
        const Profile* panel = nullptr;
        for (const auto& p : result.profiles) {
            if (cfg->outputs.fringe_y && p.y == *cfg->outputs.fringe_y) {
                panel = &p;
            }
        }
        if (!panel && !result.profiles.empty()) {
            panel = &result.profiles.back();
        }
        files.emplace_back("flowlines.svg", emit_svg(result.lines, panel, style));
    }

    nlohmann::ordered_json manifest;
    manifest["scenario"] = cfg->name;
    manifest["regime"] = std::string(to_string(cfg->regime));
    manifest["natural_units"] = cfg->natural_units;
    auto& resolved = manifest["resolved_config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg->resolved) {
        resolved[k] = v;
    }
    manifest["derived"] = {
        {"wavelength_m", cfg->wave.wavelength},
        {"wavenumber_per_m", cfg->wave.wavenumber},
        {"angular_frequency_per_s", cfg->wave.angular_frequency},
        {"step_bound_m", cfg->regime == Regime::quantum ? 0.0 : wave_step_bound(cfg->wave, cfg->aperture)},
        {"launch_peak_density", result.launch_peak_density},
        {"lines", result.lines.size()},
    };
    if (cfg->regime == Regime::quantum) {
        manifest["derived"]["forward_speed_m_per_s"] = cfg->particle.forward_speed;
    }
    auto& outs = manifest["outputs"] = nlohmann::ordered_json::object();
    for (const auto& [name, data] : files) {
        outs[name] = {{"sha256", sha256_hex(data)}, {"bytes", data.size()}};
    }

    const fs::path dir = out_opt.empty() ? default_out_dir(*cfg) : fs::path(out_opt);
    try {
        fs::create_directories(dir);
        files.emplace_back("manifest.json", manifest.dump(2) + "\n");
        for (const auto& [name, data] : files) {
            std::ofstream f(dir / name, std::ios::binary);
            f << data;
            if (!f) {
                throw std::runtime_error("cannot write " + (dir / name).string());
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io_error;
    }

    std::cout << cfg->name << ": " << result.lines.size() << " lines";
    if (result.crossings) {
        std::cout << ", axis crossings slit1=" << result.crossings->slit1_crossed
                  << " slit2=" << result.crossings->slit2_crossed;
    }
    if (result.fringe) {
        std::cout << ", visibility " << result.fringe->visibility;
    }
    std::cout << "\nwrote " << files.size() << " files to " << dir.string() << '\n';
    return ok;
}

int validate(const std::string& path)
{
    int code = ok;
    auto cfg = load(path, code);
    if (!cfg) {
        return code;
    }
    std::cout << path << ": ok (" << to_string(cfg->regime) << ", " << cfg->aperture.slits.size() << " slits, "
              << cfg->launch.lines_per_slit * cfg->aperture.slits.size() << " lines)\n";
    return ok;
}

int presets_list()
{
    for (const auto& [name, text] : presets::embedded) {
        std::cout << name << '\n';
    }
    return ok;
}

int presets_copy(const std::string& name, const std::string& to)
{
    for (const auto& [n, text] : presets::embedded) {
        if (n == name) {
            const fs::path dest = to.empty() ? fs::path(name + ".cfg") : fs::path(to);
            if (fs::exists(dest)) {
                std::cerr << "error: " << dest.string() << " already exists\n";
                return io_error;
            }
            std::ofstream f(dest, std::ios::binary);
            f << text;
            if (!f) {
                std::cerr << "error: cannot write " << dest.string() << '\n';
                return io_error;
            }
            std::cout << "wrote " << dest.string() << '\n';
            return ok;
        }
    }
    std::cerr << "error: no preset named `" << name << "` (see `flowlines presets list`)\n";
    return io_error;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy and probability flow lines behind two-slit gratings"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    unsigned threads = 0;
    bool no_svg = false;
    auto* run_cmd = app.add_subcommand("run", "run a scenario and write its outputs");
    run_cmd->add_option("config", config, "scenario config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default $FLOWLINES_OUT_DIR/<name> or flowlines_out/<name>)");
    run_cmd->add_option("--threads", threads, "worker threads for tracing (0 = all cores)");
    run_cmd->add_flag("--no-svg", no_svg, "skip the SVG figure");

    auto* validate_cmd = app.add_subcommand("validate", "parse and validate a scenario config");
    validate_cmd->add_option("config", config, "scenario config file")->required();

    auto* presets_cmd = app.add_subcommand("presets", "list or copy the bundled presets");
    presets_cmd->require_subcommand(1);
    presets_cmd->add_subcommand("list", "list preset names");
    std::string preset_name;
    std::string preset_to;
    auto* copy_cmd = presets_cmd->add_subcommand("copy", "write a preset config to a file");
    copy_cmd->add_option("name", preset_name, "preset name")->required();
    copy_cmd->add_option("--to", preset_to, "destination path (default <name>.cfg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : io_error;
    }

    if (run_cmd->parsed()) {
        return run(config, out_dir, threads, no_svg);
    }
    if (validate_cmd->parsed()) {
        return validate(config);
    }
    if (copy_cmd->parsed()) {
        return presets_copy(preset_name, preset_to);
    }
    return presets_list();
}
