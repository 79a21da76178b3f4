#include "skydaq/capture_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "skydaq/errors.hpp"
#include "skydaq/rng.hpp"

namespace skydaq {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stream tags keeping the hash keys of unrelated draws apart.
constexpr std::uint64_t kStreamClouds = 0x11;
constexpr std::uint64_t kStreamVisible = 0x22;
constexpr std::uint64_t kStreamInfrared = 0x33;
constexpr std::uint64_t kFaultSalt = 0x44;

// Uniform [0, 1) for one pixel of one frame; the frame key carries all the
// coordinates above the pixel, so the draw is order-independent.
inline double px_u01(std::uint64_t frame_key, std::uint64_t px) {
    return u01(splitmix64(frame_key + 0x9e3779b97f4a7c15ull * (px + 1)));
}

// Zero-mean uniform noise with standard deviation sigma.
inline float px_noise(std::uint64_t frame_key, std::uint64_t px, double sigma) {
    return static_cast<float>((2.0 * px_u01(frame_key, px) - 1.0) * sigma * 1.7320508075688772);
}

std::uint64_t frame_key(std::uint64_t seed, std::uint64_t stream, std::int64_t instant,
                        int frame_index) {
    std::uint64_t k = mix_key(seed, stream);
    k = mix_key(k, static_cast<std::uint64_t>(instant));
    return mix_key(k, static_cast<std::uint64_t>(frame_index));
}

struct CloudBlob {
    double x0, y0;      // position at t = 0, unit sky coordinates
    double vx, vy;      // drift, unit per second
    double sigma;
    double attenuation;
};

std::vector<CloudBlob> cloud_blobs(const VirtualSky& sky) {
    std::vector<CloudBlob> blobs(static_cast<std::size_t>(sky.cloud_count));
    for (int j = 0; j < sky.cloud_count; ++j) {
        Rng rng(mix_key(mix_key(sky.seed, kStreamClouds), static_cast<std::uint64_t>(j)));
        CloudBlob& b = blobs[static_cast<std::size_t>(j)];
        b.x0 = rng.uniform();
        b.y0 = rng.uniform();
        double heading = rng.uniform(0.0, 2.0 * kPi);
        double speed = sky.cloud_drift_per_s * (0.5 + rng.uniform());
        b.vx = speed * std::cos(heading);
        b.vy = speed * std::sin(heading);
        b.sigma = sky.cloud_sigma * (0.7 + 0.6 * rng.uniform());
        b.attenuation = sky.cloud_attenuation * (0.5 + 0.5 * rng.uniform());
    }
    return blobs;
}

inline double wrap01(double x) { return x - std::floor(x); }

// Transmittance of the prepared blob list; blobs live on the unit torus so
// they drift back across the sky instead of leaving it.
double transmittance_of(const std::vector<CloudBlob>& blobs, double u, double v,
                        double unix_seconds) {
    double trans = 1.0;
    for (const CloudBlob& b : blobs) {
        double cu = wrap01(b.x0 + b.vx * unix_seconds);
        double cv = wrap01(b.y0 + b.vy * unix_seconds);
        double du = std::fabs(u - cu);
        du = std::min(du, 1.0 - du);
        double dv = std::fabs(v - cv);
        dv = std::min(dv, 1.0 - dv);
        double g = std::exp(-(du * du + dv * dv) / (2.0 * b.sigma * b.sigma));
        trans *= 1.0 - b.attenuation * g;
    }
    return trans;
}

// Visible-band radiance at the shortest exposure, shared by every frame of a
// capture instant: centered glare over a diffuse base, dimmed by the clouds.
std::vector<float> visible_radiance(const VirtualSky& sky, const FusionConfig& optics,
                                    const std::vector<CloudBlob>& blobs, double unix_seconds) {
    int size = optics.image_size;
    double cx = optics.center_x(), cy = optics.center_y();
    double inv_two_sigma2 = 1.0 / (2.0 * sky.glare_sigma_px * sky.glare_sigma_px);
    double unit = size > 1 ? 1.0 / (size - 1) : 1.0;
    std::vector<float> radiance(static_cast<std::size_t>(size) * size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double dx = x - cx, dy = y - cy;
            double level = sky.sky_base + sky.glare_amplitude *
                                              std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
            level *= transmittance_of(blobs, x * unit, y * unit, unix_seconds);
            radiance[static_cast<std::size_t>(y) * size + x] = static_cast<float>(level);
        }
    }
    return radiance;
}

// Fill one sensor frame: scene scaled by the exposure ratio plus read noise,
// clamped to the 16-bit container.
Frame sensor_frame(const std::vector<float>& scene, int width, int height, double scale,
                   double sigma, std::uint64_t key, double timestamp) {
    Frame f = Frame::make(width, height, 1, 0.0f, timestamp);
    for (std::size_t k = 0; k < f.pixels.size(); ++k) {
        double v = scene[k] * scale + px_noise(key, k, sigma);
        f.pixels[k] = static_cast<float>(std::clamp(v, 0.0, 65535.0));
    }
    return f;
}

Frame garbage_frame(int width, int height, std::uint64_t key, double timestamp) {
    Frame f = Frame::make(width, height, 1, 0.0f, timestamp);
    for (std::size_t k = 0; k < f.pixels.size(); ++k)
        f.pixels[k] = static_cast<float>(px_u01(key, k) * 65535.0);
    return f;
}

// Apply the per-frame fault draw: sometimes the camera link corrupts a frame
// wholesale, sometimes the driver hands back the previous frame again.
// `previous` is the already-emitted frame of the same group, or null for the
// first one.
Frame with_faults(Frame clean, const VirtualSky& sky, std::uint64_t key, const Frame* previous) {
    double draw = u01(mix_key(key, kFaultSalt));
    if (draw < sky.defect_probability)
        return garbage_frame(clean.width, clean.height, mix_key(key, kFaultSalt + 1),
                             clean.timestamp);
    if (previous != nullptr && draw < sky.defect_probability + sky.duplicate_probability) {
        Frame dup = *previous;
        dup.timestamp = clean.timestamp;
        return dup;
    }
    return clean;
}

double exposure_time_ms(const ExposureSet& reference, int index) {
    if (index < static_cast<int>(reference.exposure_times_ms.size()))
        return reference.exposure_times_ms[static_cast<std::size_t>(index)];
    // off-plan exposure counts keep a strictly increasing continuation
    return reference.exposure_times_ms.back() * (index - 1);
}

std::string format_angle(double deg) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, deg, std::chars_format::fixed, 3);
    return ec == std::errc() ? std::string(buf, end) : std::string("?");
}

// Synthetic weather-station reading: smooth daily cycles, dew point pinned
// below temperature, wind direction drifting across north so the circular
// wrap actually gets exercised.
WeatherRecord synthetic_weather(double unix_seconds) {
    double phase = 2.0 * kPi * (unix_seconds / 86400.0 - std::floor(unix_seconds / 86400.0));
    WeatherRecord w;
    w.unix_seconds = unix_seconds;
    w.temperature_c = 21.0 + 8.0 * std::sin(phase - 2.2);
    w.dew_point_c = w.temperature_c - (9.0 + 2.0 * std::sin(2.0 * phase));
    w.pressure_mmhg = 631.0 + 1.5 * std::sin(phase + 0.7);
    double dir = 0.4 + 0.5 * std::sin(3.0 * phase + 1.1);
    w.wind_direction_rad = dir - 2.0 * kPi * std::floor(dir / (2.0 * kPi));
    w.wind_velocity = 0.006 + 0.003 * std::sin(2.0 * phase + 0.3);
    w.relative_humidity = 45.0 + 25.0 * std::sin(phase - 1.0);
    return w;
}

}  // namespace

// --- schedule -------------------------------------------------------------------

void validate_schedule(const CaptureSchedule& s) {
    if (!(s.image_interval_s > 0.0)) throw DomainError("image interval must be positive");
    if (std::fabs(s.image_interval_s - std::llround(s.image_interval_s)) > 1e-9)
        throw DomainError("image interval must be a whole number of seconds");
    if (s.ir_burst_frames < 1) throw DomainError("infrared burst needs at least one frame");
    if (s.vi_exposure_count < 1 || s.vi_repeats < 1)
        throw DomainError("visible plan needs at least one exposure and one repeat");
    if (!(s.ir_burst_fps > 0.0) || !(s.vi_fps > 0.0))
        throw DomainError("frame rates must be positive");
    if (!(s.tracker_update_s > 0.0)) throw DomainError("tracker update period must be positive");
    if (!(s.pyranometer_rate_hz > 0.0)) throw DomainError("pyranometer rate must be positive");
    if ((s.ir_burst_frames - 1) / s.ir_burst_fps >= s.image_interval_s)
        throw DomainError("infrared burst must finish within the image interval");
    double vi_frames = static_cast<double>(s.vi_exposure_count) * s.vi_repeats;
    if ((vi_frames - 1.0) / s.vi_fps >= s.image_interval_s)
        throw DomainError("visible plan must finish within the image interval");
}

// --- virtual sky ------------------------------------------------------------------

void validate_sky(const VirtualSky& sky) {
    if (!(sky.glare_sigma_px > 0.0) || !(sky.ir_sigma_px > 0.0) || !(sky.cloud_sigma > 0.0))
        throw DomainError("sky model widths must be positive");
    if (sky.glare_amplitude < 0.0 || sky.sky_base < 0.0 || sky.ir_base < 0.0 ||
        sky.ir_amplitude < 0.0 || sky.ir_cloud_gain < 0.0)
        throw DomainError("sky model levels must be non-negative");
    if (sky.noise_sigma < 0.0 || sky.ir_noise_sigma < 0.0)
        throw DomainError("noise levels must be non-negative");
    if (sky.cloud_count < 0) throw DomainError("cloud count must be non-negative");
    if (sky.cloud_attenuation < 0.0 || sky.cloud_attenuation >= 1.0)
        throw DomainError("cloud attenuation must lie in [0, 1)");
    if (sky.cloud_drift_per_s < 0.0) throw DomainError("cloud drift must be non-negative");
    if (sky.duplicate_probability < 0.0 || sky.defect_probability < 0.0 ||
        sky.duplicate_probability + sky.defect_probability >= 1.0)
        throw DomainError("fault probabilities must be non-negative and sum below 1");
}

double cloud_transmittance(const VirtualSky& sky, double u, double v, double unix_seconds) {
    return transmittance_of(cloud_blobs(sky), u, v, unix_seconds);
}

double synthesize_irradiance(const VirtualSky& sky, double elevation_deg, double unix_seconds) {
    double clear = 1000.0 * std::max(0.0, std::sin(elevation_deg * kPi / 180.0));
    // the tracker keeps the sun at the sky center; clouds crossing it dim the
    // pyranometer ahead of the diffuse floor
    double trans = cloud_transmittance(sky, 0.5, 0.5, unix_seconds);
    return clear * (0.25 + 0.75 * trans);
}

std::vector<Frame> synthesize_infrared_burst(const VirtualSky& sky,
                                             const CaptureSchedule& schedule,
                                             std::int64_t unix_seconds) {
    validate_sky(sky);
    const int w = kInfraredWidth, h = kInfraredHeight;
    std::vector<CloudBlob> blobs = cloud_blobs(sky);

    // thermal scene: warm centered sun disc over a cool background, clouds
    // radiating warmer than clear sky
    std::vector<float> scene(static_cast<std::size_t>(w) * h);
    double cx = (w - 1) * 0.5, cy = (h - 1) * 0.5;
    double inv_two_sigma2 = 1.0 / (2.0 * sky.ir_sigma_px * sky.ir_sigma_px);
    double t = static_cast<double>(unix_seconds);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double dx = x - cx, dy = y - cy;
            double trans = transmittance_of(blobs, x / double(w - 1), y / double(h - 1), t);
            scene[static_cast<std::size_t>(y) * w + x] = static_cast<float>(
                sky.ir_base + sky.ir_amplitude * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2) +
                sky.ir_cloud_gain * (1.0 - trans));
        }
    }

    std::vector<Frame> burst;
    burst.reserve(static_cast<std::size_t>(schedule.ir_burst_frames));
    for (int k = 0; k < schedule.ir_burst_frames; ++k) {
        double stamp = t + k / schedule.ir_burst_fps;
        std::uint64_t key = frame_key(sky.seed, kStreamInfrared, unix_seconds, k);
        Frame clean = sensor_frame(scene, w, h, 1.0, sky.ir_noise_sigma, key, stamp);
        burst.push_back(with_faults(std::move(clean), sky, key, k > 0 ? &burst.back() : nullptr));
    }
    return burst;
}

std::vector<std::vector<Frame>> synthesize_visible_capture(const VirtualSky& sky,
                                                           const CaptureSchedule& schedule,
                                                           std::int64_t unix_seconds,
                                                           const FusionConfig& optics) {
    validate_sky(sky);
    std::vector<CloudBlob> blobs = cloud_blobs(sky);
    std::vector<float> scene =
        visible_radiance(sky, optics, blobs, static_cast<double>(unix_seconds));

    const ExposureSet reference;  // canonical exposure plan, ms
    const double t1 = reference.exposure_times_ms.front();
    std::vector<std::vector<Frame>> groups(static_cast<std::size_t>(schedule.vi_exposure_count));
    for (auto& g : groups) g.reserve(static_cast<std::size_t>(schedule.vi_repeats));

    // the camera cycles through the exposures and repeats the cycle, so the
    // k-th shot overall is exposure (k mod E) of cycle (k div E)
    for (int r = 0; r < schedule.vi_repeats; ++r) {
        for (int e = 0; e < schedule.vi_exposure_count; ++e) {
            int k = r * schedule.vi_exposure_count + e;
            double stamp = static_cast<double>(unix_seconds) + k / schedule.vi_fps;
            double scale = exposure_time_ms(reference, e) / t1;
            std::uint64_t key = frame_key(sky.seed, kStreamVisible, unix_seconds, k);
            Frame clean = sensor_frame(scene, optics.image_size, optics.image_size, scale,
                                       sky.noise_sigma, key, stamp);
            auto& group = groups[static_cast<std::size_t>(e)];
            group.push_back(
                with_faults(std::move(clean), sky, key, r > 0 ? &group.back() : nullptr));
        }
    }
    return groups;
}

// --- solar tracker -----------------------------------------------------------------

TrackerTrace tracker_trace(const GeoLocation& loc, const CalendarDate& date,
                           SessionPolicy policy, double update_s) {
    validate(loc);
    if (!(update_s > 0.0)) throw DomainError("tracker update period must be positive");

    SessionWindow w = session_window(loc, day_of_year(date), policy);
    double midnight = local_midnight_unix(date, loc.gmt_offset_hours);
    double start = midnight + w.start_hours * 3600.0;
    double end = midnight + w.end_hours * 3600.0;

    TrackerTrace trace;
    for (double t = std::ceil(start); t <= end + 1e-9; t += update_s) {
        SolarAngles sun = solar_position(loc, t);
        double pan = sun.azimuth_deg - 180.0;  // mount zero faces south, west positive
        double tilt = sun.elevation_deg + kTiltMountOffsetDeg;
        TrackerSample s{t, pan, tilt};
        if (s.pan_deg < -kPanLimitDeg || s.pan_deg > kPanLimitDeg) {
            s.pan_deg = std::clamp(s.pan_deg, -kPanLimitDeg, kPanLimitDeg);
            trace.limit_reports.push_back("t=" + std::to_string(static_cast<std::int64_t>(t)) +
                                          " pan " + format_angle(pan) + " clipped to " +
                                          format_angle(s.pan_deg));
        }
        if (s.tilt_deg < kTiltMinDeg || s.tilt_deg > kTiltMaxDeg) {
            s.tilt_deg = std::clamp(s.tilt_deg, kTiltMinDeg, kTiltMaxDeg);
            trace.limit_reports.push_back("t=" + std::to_string(static_cast<std::int64_t>(t)) +
                                          " tilt " + format_angle(tilt) + " clipped to " +
                                          format_angle(s.tilt_deg));
        }
        trace.samples.push_back(s);
    }
    return trace;
}

// --- configuration -----------------------------------------------------------------

namespace {

double parse_double_value(const std::string& text, long line) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        throw ParseError("expected a number, found '" + text + "'", line);
    return v;
}

int parse_int_value(const std::string& text, long line) {
    int v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        throw ParseError("expected an integer, found '" + text + "'", line);
    return v;
}

std::uint64_t parse_seed_value(const std::string& text, long line) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        throw ParseError("expected an unsigned integer, found '" + text + "'", line);
    return v;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

SessionConfig load_session_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    SessionConfig cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string body = trim(line);
        if (body.empty()) continue;

        std::size_t eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty()) throw ParseError("expected key = value", lineno);

        try {
            if (key == "site_latitude_deg") cfg.site.latitude_deg = parse_double_value(value, lineno);
            else if (key == "site_longitude_deg") cfg.site.longitude_deg = parse_double_value(value, lineno);
            else if (key == "gmt_offset_hours") cfg.site.gmt_offset_hours = parse_double_value(value, lineno);
            else if (key == "date") cfg.date = parse_date(value);
            else if (key == "session_policy") cfg.policy = parse_session_policy(value);
            else if (key == "seed") cfg.sky.seed = parse_seed_value(value, lineno);
            else if (key == "window_cap_s") cfg.window_cap_s = parse_double_value(value, lineno);
            else if (key == "image_interval_s") cfg.schedule.image_interval_s = parse_double_value(value, lineno);
            else if (key == "ir_burst_frames") cfg.schedule.ir_burst_frames = parse_int_value(value, lineno);
            else if (key == "ir_burst_fps") cfg.schedule.ir_burst_fps = parse_double_value(value, lineno);
            else if (key == "vi_exposure_count") cfg.schedule.vi_exposure_count = parse_int_value(value, lineno);
            else if (key == "vi_repeats") cfg.schedule.vi_repeats = parse_int_value(value, lineno);
            else if (key == "vi_fps") cfg.schedule.vi_fps = parse_double_value(value, lineno);
            else if (key == "tracker_update_s") cfg.schedule.tracker_update_s = parse_double_value(value, lineno);
            else if (key == "pyranometer_rate_hz") cfg.schedule.pyranometer_rate_hz = parse_double_value(value, lineno);
            else if (key == "glare_amplitude") cfg.sky.glare_amplitude = parse_double_value(value, lineno);
            else if (key == "glare_sigma_px") cfg.sky.glare_sigma_px = parse_double_value(value, lineno);
            else if (key == "sky_base") cfg.sky.sky_base = parse_double_value(value, lineno);
            else if (key == "ir_base") cfg.sky.ir_base = parse_double_value(value, lineno);
            else if (key == "ir_amplitude") cfg.sky.ir_amplitude = parse_double_value(value, lineno);
            else if (key == "ir_sigma_px") cfg.sky.ir_sigma_px = parse_double_value(value, lineno);
            else if (key == "ir_cloud_gain") cfg.sky.ir_cloud_gain = parse_double_value(value, lineno);
            else if (key == "ir_noise_sigma") cfg.sky.ir_noise_sigma = parse_double_value(value, lineno);
            else if (key == "cloud_count") cfg.sky.cloud_count = parse_int_value(value, lineno);
            else if (key == "cloud_attenuation") cfg.sky.cloud_attenuation = parse_double_value(value, lineno);
            else if (key == "cloud_sigma") cfg.sky.cloud_sigma = parse_double_value(value, lineno);
            else if (key == "cloud_drift_per_s") cfg.sky.cloud_drift_per_s = parse_double_value(value, lineno);
            else if (key == "noise_sigma") cfg.sky.noise_sigma = parse_double_value(value, lineno);
            else if (key == "duplicate_probability") cfg.sky.duplicate_probability = parse_double_value(value, lineno);
            else if (key == "defect_probability") cfg.sky.defect_probability = parse_double_value(value, lineno);
            else if (key == "optics_image_size") cfg.optics.image_size = parse_int_value(value, lineno);
            else if (key == "optics_kernel_size") cfg.optics.kernel_size = parse_int_value(value, lineno);
            else if (key == "optics_gaussian_sigma") cfg.optics.gaussian_sigma = parse_double_value(value, lineno);
            else if (key == "optics_max_amplitude") cfg.optics.max_amplitude = parse_double_value(value, lineno);
            else throw ParseError("unknown key: " + key, lineno);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {  // e.g. a bad date or policy name
            throw ParseError(e.what(), lineno);
        }
    }
    return cfg;
}

// --- session -----------------------------------------------------------------------

DayArchive run_session(const SessionConfig& cfg, const fs::path& output_root,
                       SessionReport* report) {
    validate(cfg.site);
    validate_schedule(cfg.schedule);
    validate_sky(cfg.sky);
    validate_config(cfg.optics);
    if (cfg.window_cap_s < 0.0) throw DomainError("window cap must be non-negative");

    SessionWindow window = session_window(cfg.site, day_of_year(cfg.date), cfg.policy);
    double midnight = local_midnight_unix(cfg.date, cfg.site.gmt_offset_hours);
    double start = midnight + window.start_hours * 3600.0;
    double full_end = midnight + window.end_hours * 3600.0;
    double end = cfg.window_cap_s > 0.0 ? std::min(full_end, start + cfg.window_cap_s) : full_end;

    fs::path day_dir = prepare_day_directory(output_root, cfg.date);
    FusionTables tables = build_tables(cfg.optics);
    FilterOptions filter;
    filter.mode = DeviationMode::PerFrameMean;  // camera bursts: classical correlation

    SessionReport rep;
    rep.window_start_unix = start;
    rep.window_end_unix = end;
    rep.full_window_seconds = full_end - start;

    // capture loop: both cameras fire each interval; one instant's failure is
    // logged and the day carries on
    auto first_instant = static_cast<std::int64_t>(std::ceil(start));
    auto last_instant = static_cast<std::int64_t>(std::floor(end + 1e-9));
    auto step = static_cast<std::int64_t>(std::llround(cfg.schedule.image_interval_s));
    for (std::int64_t t = first_instant; t <= last_instant; t += step) {
        ++rep.instants_attempted;
        try {
            std::vector<Frame> burst = synthesize_infrared_burst(cfg.sky, cfg.schedule, t);
            // the selection is recomputed for the survivor tally; the frame
            // itself comes from the averaging entry point
            FilterSelection selection = select_frames(burst, filter);
            Frame infrared = denoise(burst, filter);

            auto raw = synthesize_visible_capture(cfg.sky, cfg.schedule, t, cfg.optics);
            Frame visible = process_visible_capture(raw, tables, filter);

            write_image(infrared, day_dir / "infrared" / image_filename(t));
            write_image(visible, day_dir / "visible" / image_filename(t));
            ++rep.instants_written;
            ++rep.ir_bursts;
            rep.ir_frames_kept += static_cast<long>(selection.kept.size());
        } catch (const std::exception& e) {
            rep.skipped.push_back({t, e.what()});
        }
    }

    // pyranometer cadence anchors every tabular stream
    std::vector<double> sample_times;
    double period = 1.0 / cfg.schedule.pyranometer_rate_hz;
    for (std::int64_t k = 0;; ++k) {
        double t = static_cast<double>(first_instant) + static_cast<double>(k) * period;
        if (t > end + 1e-9) break;
        sample_times.push_back(t);
    }

    std::vector<PyranometerRecord> pyranometer;
    pyranometer.reserve(sample_times.size());
    for (double t : sample_times) {
        SolarAngles sun = solar_position(cfg.site, t);
        pyranometer.push_back({t, synthesize_irradiance(cfg.sky, sun.elevation_deg, t)});
    }
    std::string csv_name = date_file_stem(cfg.date) + ".csv";
    write_pyranometer_csv(pyranometer, day_dir / "pyranometer" / csv_name);
    rep.pyranometer_records = pyranometer.size();

    SunPositionTable sun_table = sun_position_table(sample_times, cfg.site);
    write_sun_position_csv(sun_table.records, day_dir / "sun_position" / csv_name);

    // weather: 10-minute station readings padded one knot past each window
    // edge, resampled onto the pyranometer timestamps
    std::vector<WeatherRecord> readings;
    for (double t = static_cast<double>(first_instant) - 600.0; t <= end + 600.0; t += 600.0)
        readings.push_back(synthetic_weather(t));
    write_weather_csv(interpolate_weather(readings, sample_times),
                      day_dir / "weather_station" / csv_name);

    std::string manifest;
    for (const SkippedCapture& s : rep.skipped)
        manifest += "skipped " + std::to_string(s.unix_seconds) + " " + s.reason + "\n";
    std::ofstream out(day_dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + (day_dir / "manifest.txt").string());
    out << manifest;
    out.close();

    if (report) *report = rep;
    return load_day(output_root, cfg.date);
}

DayArchive run_session(const GeoLocation& loc, const CalendarDate& date,
                       const CaptureSchedule& schedule, const VirtualSky& sky,
                       const fs::path& output_root, SessionReport* report) {
    SessionConfig cfg;
    cfg.site = loc;
    cfg.date = date;
    cfg.schedule = schedule;
    cfg.sky = sky;
    return run_session(cfg, output_root, report);
}

}  // namespace skydaq
