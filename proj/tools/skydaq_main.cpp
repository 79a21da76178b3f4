// Command-line front door: every pipeline stage as a batch subcommand.
// Data goes to standard output, diagnostics to standard error. Exit codes:
// 0 success, 1 validation findings, 2 usage error, 3 processing error.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skydaq/capture_sim.hpp"
#include "skydaq/dataset_io.hpp"
#include "skydaq/errors.hpp"
#include "skydaq/exposure_fusion.hpp"
#include "skydaq/frame_processing.hpp"
#include "skydaq/solar_geometry.hpp"

namespace fs = std::filesystem;
using namespace skydaq;

namespace {

// Shortest decimal that parses back to the same double; matches the archive
// CSV format so printed tables are byte-compatible with written ones.
std::string fmt(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

struct SiteOptions {
    double latitude = 35.0821;
    double longitude = -106.6259;
    double gmt_offset = -7.0;

    GeoLocation location() const { return {latitude, longitude, gmt_offset}; }

    void attach(CLI::App* cmd) {
        cmd->add_option("--lat", latitude, "site latitude, degrees north");
        cmd->add_option("--lon", longitude, "site longitude, degrees east");
        cmd->add_option("--gmt", gmt_offset, "site GMT offset, hours");
    }
};

std::vector<Frame> read_burst_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Frame> burst;
    burst.reserve(files.size());
    for (const fs::path& f : files) burst.push_back(read_image(f));
    return burst;
}

int cmd_sunpos(double lat, double lon, double gmt, double unix_s) {
    SolarAngles a = solar_position({lat, lon, gmt}, unix_s);
    std::cout << "elevation " << fmt(a.elevation_deg) << "\n"
              << "azimuth " << fmt(a.azimuth_deg) << "\n"
              << "zenith " << fmt(a.zenith_deg) << "\n";
    return 0;
}

int cmd_window(const SiteOptions& site, const std::string& date_text) {
    CalendarDate date = parse_date(date_text);
    GeoLocation loc = site.location();
    int doy = day_of_year(date);
    SunriseSunset srss = sunrise_sunset(loc, doy);
    std::cout << "date " << date_file_stem(date) << "\n"
              << "sunrise " << fmt(srss.sunrise_hours) << "\n"
              << "sunset " << fmt(srss.sunset_hours) << "\n";
    for (SessionPolicy policy : {SessionPolicy::Offset1h, SessionPolicy::Elevation15deg}) {
        SessionWindow w = session_window(loc, doy, policy);
        std::cout << to_string(policy) << " " << fmt(w.start_hours) << " " << fmt(w.end_hours)
                  << "\n";
    }
    return 0;
}

int cmd_denoise(const fs::path& dir, fs::path out, const FilterOptions& filter) {
    std::vector<Frame> burst = read_burst_directory(dir);
    if (burst.empty()) throw IoError("no .png frames in " + dir.string());
    if (out.empty()) out = dir / "denoised.png";
    FilterSelection selection = select_frames(burst, filter);
    write_image(denoise(burst, filter), out);
    std::cout << "frames " << burst.size() << "\n"
              << "kept " << selection.kept.size() << "\n"
              << "duplicates " << selection.duplicate_drops.size() << "\n"
              << "defects " << selection.defect_drops.size() << "\n"
              << "written " << out.string() << "\n";
    return 0;
}

int cmd_fuse(const std::vector<std::string>& inputs, fs::path out, const FusionConfig& config) {
    ExposureSet set;
    for (const std::string& name : inputs)
        set.frames.push_back(regularize(read_image(name), config.regularizer));
    set.capture_instant = set.frames.front().timestamp;
    FusionTables tables = build_tables(config);
    FusionStats stats;
    Frame fused = fuse(set, tables, &stats);
    if (out.empty()) out = "fused.png";
    write_image(fused, out);
    for (int e = 0; e < 4; ++e)
        std::cout << "alpha" << e + 1 << " " << fmt(stats.weights.alphas[e]) << "\n";
    std::cout << "saturated_fraction " << fmt(stats.saturated_fraction) << "\n"
              << "written " << out.string() << "\n";
    if (stats.saturation_warning) std::cerr << "warning: saturation above one percent\n";
    return 0;
}

int cmd_sunpos_table(const SiteOptions& site, const fs::path& pyranometer_csv,
                     const fs::path& out) {
    auto records = read_pyranometer_csv(pyranometer_csv);
    std::vector<double> times;
    times.reserve(records.size());
    for (const auto& r : records) times.push_back(r.unix_seconds);
    SunPositionTable table = sun_position_table(times, site.location());
    if (!out.empty()) {
        write_sun_position_csv(table.records, out);
    } else {
        for (const auto& r : table.records)
            std::cout << fmt(r.unix_seconds) << "," << fmt(r.elevation_deg) << ","
                      << fmt(r.azimuth_deg) << "\n";
    }
    for (const auto& s : table.skipped)
        std::cerr << "skipped " << fmt(s.unix_seconds) << " " << s.reason << "\n";
    return 0;
}

int cmd_interp_weather(const fs::path& raw_csv, const fs::path& targets_csv, const fs::path& out) {
    auto raw = read_weather_csv(raw_csv);
    auto targets = read_pyranometer_csv(targets_csv);
    std::vector<double> times;
    times.reserve(targets.size());
    for (const auto& t : targets) times.push_back(t.unix_seconds);
    auto resampled = interpolate_weather(raw, times);
    if (!out.empty()) {
        write_weather_csv(resampled, out);
    } else {
        for (const auto& w : resampled)
            std::cout << fmt(w.unix_seconds) << "," << fmt(w.temperature_c) << ","
                      << fmt(w.dew_point_c) << "," << fmt(w.pressure_mmhg) << ","
                      << fmt(w.wind_direction_rad) << "," << fmt(w.wind_velocity) << ","
                      << fmt(w.relative_humidity) << "\n";
    }
    return 0;
}

int cmd_validate(const SiteOptions& site, bool no_site, const std::string& policy_name,
                 const fs::path& root, const std::string& date_text) {
    CalendarDate date = parse_date(date_text);
    GeoLocation loc = site.location();
    SessionPolicy policy = parse_session_policy(policy_name);
    ValidationReport report = validate_day(root, date, no_site ? nullptr : &loc, policy);
    for (const auto& s : report.summaries)
        std::cout << "summary " << s.stream << " files " << s.file_count << " records "
                  << s.record_count << "\n";
    for (const auto& f : report.findings)
        std::cout << "finding " << f.stream << " " << fmt(f.unix_seconds) << " " << f.message
                  << "\n";
    std::cout << (report.ok() ? "ok" : "findings " + std::to_string(report.findings.size()))
              << "\n";
    return report.ok() ? 0 : 1;
}

int cmd_simulate(const fs::path& config_path, const fs::path& output_root) {
    SessionConfig cfg = load_session_config(config_path);
    SessionReport report;
    DayArchive day = run_session(cfg, output_root, &report);
    std::cout << "day " << day.day_dir.string() << "\n"
              << "window " << fmt(report.window_start_unix) << " "
              << fmt(report.window_end_unix) << "\n"
              << "instants " << report.instants_attempted << " written "
              << report.instants_written << " skipped " << report.skipped.size() << "\n"
              << "pyranometer_records " << report.pyranometer_records << "\n";
    for (const auto& s : report.skipped)
        std::cerr << "skipped " << s.unix_seconds << " " << s.reason << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solar-tracking sky-imaging DAQ toolkit"};
    app.require_subcommand(1);

    // sunpos <lat> <lon> <gmt-offset> <unix>
    double lat = 0, lon = 0, gmt = 0, unix_s = 0;
    CLI::App* sunpos = app.add_subcommand("sunpos", "sun position for a site and instant");
    sunpos->add_option("lat", lat, "latitude, degrees north")->required();
    sunpos->add_option("lon", lon, "longitude, degrees east")->required();
    sunpos->add_option("gmt_offset", gmt, "GMT offset, hours")->required();
    sunpos->add_option("unix", unix_s, "unix timestamp, seconds")->required();

    // window <date>
    std::string window_date;
    SiteOptions window_site;
    CLI::App* window = app.add_subcommand("window", "sunrise, sunset, and session windows");
    window->add_option("date", window_date, "calendar date, e.g. 2018-06-21")->required();
    window_site.attach(window);

    // denoise <dir> [out.png]
    std::string denoise_dir, denoise_out;
    FilterOptions filter{1e-6, 0.9, DeviationMode::PerFrameMean};
    bool ensemble = false;
    CLI::App* denoise_cmd = app.add_subcommand("denoise", "filter and average a burst directory");
    denoise_cmd->add_option("dir", denoise_dir, "directory of <unix>.png frames")->required();
    denoise_cmd->add_option("out", denoise_out, "output image (default <dir>/denoised.png)");
    denoise_cmd->add_option("--duplicate-tol", filter.duplicate_tol, "near-duplicate tolerance");
    denoise_cmd->add_option("--defect-threshold", filter.defect_threshold,
                            "mean-correlation defect threshold");
    denoise_cmd->add_flag("--ensemble", ensemble, "deviations against the stack mean");

    // fuse <e1.png> <e2.png> <e3.png> <e4.png> [--out out.png]
    std::vector<std::string> fuse_inputs;
    std::string fuse_out;
    FusionConfig fusion_config;
    CLI::App* fuse_cmd = app.add_subcommand("fuse", "blend four exposures into one frame");
    fuse_cmd->add_option("frames", fuse_inputs, "four images, shortest exposure first")
        ->expected(4);
    fuse_cmd->add_option("--out", fuse_out, "output image (default fused.png)");
    fuse_cmd->add_option("--max-amplitude", fusion_config.max_amplitude,
                         "fused value mapping to full scale");
    fuse_cmd->add_option("--sigma", fusion_config.gaussian_sigma, "blending kernel sigma");
    fuse_cmd->add_option("--kernel-size", fusion_config.kernel_size, "blending kernel side");

    // sunpos-table <pyranometer.csv> [out.csv]
    std::string table_csv, table_out;
    SiteOptions table_site;
    CLI::App* table = app.add_subcommand("sunpos-table",
                                         "sun positions at a pyranometer file's timestamps");
    table->add_option("pyranometer", table_csv, "pyranometer CSV")->required();
    table->add_option("out", table_out, "output CSV (default standard output)");
    table_site.attach(table);

    // interp-weather <raw.csv> <targets.csv> [out.csv]
    std::string weather_raw, weather_targets, weather_out;
    CLI::App* weather = app.add_subcommand("interp-weather",
                                           "resample weather onto pyranometer timestamps");
    weather->add_option("raw", weather_raw, "weather-station CSV")->required();
    weather->add_option("targets", weather_targets, "pyranometer CSV supplying timestamps")
        ->required();
    weather->add_option("out", weather_out, "output CSV (default standard output)");

    // validate <root> <date>
    std::string validate_root, validate_date, validate_policy = "elevation15";
    SiteOptions validate_site;
    bool no_site = false;
    CLI::App* validate = app.add_subcommand("validate", "check one archived day");
    validate->add_option("root", validate_root, "archive root directory")->required();
    validate->add_option("date", validate_date, "day to check, e.g. 2018-06-21")->required();
    validate->add_option("--policy", validate_policy, "session policy (offset1h | elevation15)");
    validate->add_flag("--no-site", no_site, "skip the session-window check");
    validate_site.attach(validate);

    // simulate <config> [output_root]
    std::string sim_config, sim_root = ".";
    CLI::App* simulate = app.add_subcommand("simulate", "run one synthetic acquisition day");
    simulate->add_option("config", sim_config, "key = value session configuration")->required();
    simulate->add_option("output_root", sim_root, "archive root (default current directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // help text on standard output, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*sunpos) return cmd_sunpos(lat, lon, gmt, unix_s);
        if (*window) return cmd_window(window_site, window_date);
        if (*denoise_cmd) {
            if (ensemble) filter.mode = DeviationMode::EnsembleMean;
            return cmd_denoise(denoise_dir, denoise_out, filter);
        }
        if (*fuse_cmd) return cmd_fuse(fuse_inputs, fuse_out, fusion_config);
        if (*table) return cmd_sunpos_table(table_site, table_csv, table_out);
        if (*weather) return cmd_interp_weather(weather_raw, weather_targets, weather_out);
        if (*validate)
            return cmd_validate(validate_site, no_site, validate_policy, validate_root,
                                validate_date);
        if (*simulate) return cmd_simulate(sim_config, sim_root);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
