#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "skydaq/capture_sim.hpp"
#include "support/tree_digest.hpp"

using namespace skydaq;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("skydaq_sim_" + tag + "_" + std::to_string(++counter));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

const GeoLocation kAlbuquerque{35.0821, -106.6259, -7.0};

bool same_pixels(const Frame& a, const Frame& b) { return a.pixels == b.pixels; }

double window_start_unix(const GeoLocation& loc, const CalendarDate& date, SessionPolicy p) {
    SessionWindow w = session_window(loc, day_of_year(date), p);
    return local_midnight_unix(date, loc.gmt_offset_hours) + w.start_hours * 3600.0;
}

}  // namespace

TEST_CASE("capture schedule validation") {
    CHECK_NOTHROW(validate_schedule(CaptureSchedule{}));

    CaptureSchedule s;
    s.image_interval_s = 0.0;
    CHECK_THROWS_AS(validate_schedule(s), DomainError);

    s = CaptureSchedule{};
    s.image_interval_s = 15.5;  // file names carry whole seconds
    CHECK_THROWS_AS(validate_schedule(s), DomainError);

    s = CaptureSchedule{};
    s.ir_burst_frames = 200;  // 22 s of burst does not fit a 15 s interval
    CHECK_THROWS_AS(validate_schedule(s), DomainError);

    s = CaptureSchedule{};
    s.vi_repeats = 40;  // 160 frames at 9 fps overruns the interval
    CHECK_THROWS_AS(validate_schedule(s), DomainError);

    s = CaptureSchedule{};
    s.pyranometer_rate_hz = -1.0;
    CHECK_THROWS_AS(validate_schedule(s), DomainError);
}

TEST_CASE("virtual sky validation") {
    CHECK_NOTHROW(validate_sky(VirtualSky{}));

    VirtualSky sky;
    sky.noise_sigma = -0.5;
    CHECK_THROWS_AS(validate_sky(sky), DomainError);

    sky = VirtualSky{};
    sky.cloud_attenuation = 1.0;  // would zero out the sky entirely
    CHECK_THROWS_AS(validate_sky(sky), DomainError);

    sky = VirtualSky{};
    sky.duplicate_probability = 0.6;
    sky.defect_probability = 0.5;
    CHECK_THROWS_AS(validate_sky(sky), DomainError);

    sky = VirtualSky{};
    sky.cloud_sigma = 0.0;
    CHECK_THROWS_AS(validate_sky(sky), DomainError);
}

TEST_CASE("cloud field: bounds, clear case, and drift") {
    VirtualSky sky;
    sky.seed = 11;

    for (int i = 0; i < 50; ++i) {
        double u = (i % 7) / 7.0, v = (i % 5) / 5.0;
        double t = 1529500000.0 + i * 100.0;
        double trans = cloud_transmittance(sky, u, v, t);
        CHECK(trans > 0.0);
        CHECK(trans <= 1.0);
    }

    VirtualSky clear = sky;
    clear.cloud_count = 0;
    CHECK(cloud_transmittance(clear, 0.5, 0.5, 1529500000.0) == 1.0);

    // blobs drift: over an hour the center of the sky cannot stay constant
    double t0 = 1529500000.0;
    bool moved = false;
    for (int m = 1; m <= 60 && !moved; ++m)
        moved = cloud_transmittance(sky, 0.5, 0.5, t0 + 60.0 * m) !=
                cloud_transmittance(sky, 0.5, 0.5, t0);
    CHECK(moved);
}

TEST_CASE("synthetic irradiance follows elevation and cloud cover") {
    VirtualSky clear;
    clear.cloud_count = 0;

    CHECK(synthesize_irradiance(clear, 90.0, 0.0) == Approx(1000.0).epsilon(1e-12));
    CHECK(synthesize_irradiance(clear, 30.0, 0.0) == Approx(500.0).epsilon(1e-12));
    CHECK(synthesize_irradiance(clear, 0.0, 0.0) == 0.0);
    CHECK(synthesize_irradiance(clear, -10.0, 0.0) == 0.0);

    VirtualSky cloudy;
    cloudy.seed = 3;
    cloudy.cloud_count = 5;
    for (int i = 0; i < 40; ++i) {
        double t = 1529500000.0 + 137.0 * i;
        double gsi = synthesize_irradiance(cloudy, 45.0, t);
        double ceiling = 1000.0 * std::sin(45.0 * 3.14159265358979324 / 180.0);
        CHECK(gsi >= 0.25 * ceiling - 1e-9);  // diffuse floor
        CHECK(gsi <= ceiling + 1e-9);
    }
}

TEST_CASE("synthesized bursts are seed-stable and shaped by the schedule") {
    VirtualSky sky;
    sky.seed = 21;
    CaptureSchedule schedule;
    std::int64_t t = 1529507123;

    auto a = synthesize_infrared_burst(sky, schedule, t);
    auto b = synthesize_infrared_burst(sky, schedule, t);
    REQUIRE(a.size() == 10);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].width == kInfraredWidth);
        CHECK(a[k].height == kInfraredHeight);
        CHECK(a[k].timestamp == Approx(t + k / 9.0).epsilon(1e-12));
        CHECK(same_pixels(a[k], b[k]));
    }

    // glare: the sun pixel outshines the corner in every clean frame
    const Frame& f0 = a[0];
    CHECK(f0.at(30, 40, 0) > f0.at(0, 0, 0) + 1000.0f);

    VirtualSky other = sky;
    other.seed = 22;
    auto c = synthesize_infrared_burst(other, schedule, t);
    CHECK(!same_pixels(a[0], c[0]));

    auto later = synthesize_infrared_burst(sky, schedule, t + 15);
    CHECK(!same_pixels(a[0], later[0]));
}

TEST_CASE("visible capture: grouping, timestamps, exposure scaling") {
    VirtualSky sky;
    sky.seed = 31;
    sky.noise_sigma = 0.0;  // isolate the deterministic scene
    sky.cloud_count = 2;
    CaptureSchedule schedule;
    FusionConfig optics;
    std::int64_t t = 1529510000;

    auto groups = synthesize_visible_capture(sky, schedule, t, optics);
    REQUIRE(groups.size() == 4);
    const ExposureSet reference;
    for (int e = 0; e < 4; ++e) {
        REQUIRE(groups[e].size() == 10);
        for (int r = 0; r < 10; ++r) {
            const Frame& f = groups[e][r];
            CHECK(f.width == 450);
            CHECK(f.height == 450);
            CHECK(f.channels == 1);
            // shot k = r * 4 + e of the cycling camera
            CHECK(f.timestamp == Approx(t + (r * 4 + e) / 9.0).epsilon(1e-12));
            // no noise, no faults: repeats are bitwise identical
            CHECK(same_pixels(f, groups[e][0]));
        }
        // intensity scales with exposure time
        double ratio = reference.exposure_times_ms[e] / reference.exposure_times_ms[0];
        for (int px : {0, 101 * 450 + 225, 225 * 450 + 225}) {
            float expect = static_cast<float>(groups[0][0].pixels[px] * ratio);
            CHECK(groups[e][0].pixels[px] == Approx(expect).epsilon(1e-6));
        }
    }

    auto again = synthesize_visible_capture(sky, schedule, t, optics);
    for (int e = 0; e < 4; ++e) CHECK(same_pixels(groups[e][3], again[e][3]));
}

TEST_CASE("injected duplicates are bitwise and the filter removes them") {
    VirtualSky sky;
    sky.seed = 41;
    sky.duplicate_probability = 0.4;
    sky.ir_noise_sigma = 30.0;
    CaptureSchedule schedule;
    FilterOptions classical{1e-6, 0.9, DeviationMode::PerFrameMean};

    int bursts_with_dups = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto burst = synthesize_infrared_burst(sky, schedule, 1529500000 + 15 * trial);
        int injected = 0;
        for (std::size_t k = 1; k < burst.size(); ++k)
            if (same_pixels(burst[k], burst[k - 1])) ++injected;
        if (injected > 0) ++bursts_with_dups;

        FilterSelection sel = select_frames(burst, classical);
        CHECK(static_cast<int>(sel.duplicate_drops.size()) == injected);
        CHECK(sel.defect_drops.empty());
        CHECK(sel.kept.size() + sel.duplicate_drops.size() == burst.size());
    }
    CHECK(bursts_with_dups > 20);  // p = 0.4 over 9 eligible frames
}

TEST_CASE("ten percent defect rate leaves bursts of about nine") {
    VirtualSky sky;
    sky.seed = 51;
    sky.defect_probability = 0.1;
    sky.ir_noise_sigma = 30.0;
    VirtualSky pristine = sky;
    pristine.defect_probability = 0.0;
    CaptureSchedule schedule;
    FilterOptions classical{1e-6, 0.9, DeviationMode::PerFrameMean};

    long survivors = 0;
    int bursts = 300, exact = 0;
    for (int trial = 0; trial < bursts; ++trial) {
        std::int64_t t = 1529500000 + 15 * trial;
        auto burst = synthesize_infrared_burst(sky, schedule, t);
        auto clean = synthesize_infrared_burst(pristine, schedule, t);

        std::vector<int> injected;
        for (std::size_t k = 0; k < burst.size(); ++k)
            if (!same_pixels(burst[k], clean[k])) injected.push_back(static_cast<int>(k));

        FilterSelection sel = select_frames(burst, classical);
        survivors += static_cast<long>(sel.kept.size());
        std::vector<int> dropped = sel.defect_drops;
        std::sort(dropped.begin(), dropped.end());
        if (dropped == injected) ++exact;
    }
    double mean_kept = static_cast<double>(survivors) / bursts;
    CHECK(mean_kept > 8.7);
    CHECK(mean_kept < 9.3);
    CHECK(exact >= bursts * 99 / 100);  // garbage frames are all but unmistakable
}

TEST_CASE("tracker trace follows the sun inside the mount limits") {
    CalendarDate summer{2018, 6, 21};
    TrackerTrace trace = tracker_trace(kAlbuquerque, summer);
    REQUIRE(trace.samples.size() > 30000);  // an eleven-hour window at 1 Hz

    double best_elev = -90.0;
    std::size_t noon_index = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const TrackerSample& s = trace.samples[i];
        CHECK(s.pan_deg >= -kPanLimitDeg);
        CHECK(s.pan_deg <= kPanLimitDeg);
        CHECK(s.tilt_deg >= kTiltMinDeg);
        CHECK(s.tilt_deg <= kTiltMaxDeg);
        if (i > 0) {
            CHECK(s.unix_seconds - trace.samples[i - 1].unix_seconds == Approx(1.0));
            // the sun moves at most a quarter degree per second; one-second
            // steps stay far inside the 60 deg/s slew capability
            CHECK(std::fabs(s.pan_deg - trace.samples[i - 1].pan_deg) < 1.0);
            CHECK(std::fabs(s.tilt_deg - trace.samples[i - 1].tilt_deg) < 1.0);
        }
        double elev = solar_position(kAlbuquerque, s.unix_seconds).elevation_deg;
        if (elev > best_elev) {
            best_elev = elev;
            noon_index = i;
        }
    }

    // at the elevation peak the mount faces south and the tilt equals the
    // noon elevation mapped into mount coordinates (clipped at the stop)
    const TrackerSample& noon = trace.samples[noon_index];
    CHECK(std::fabs(noon.pan_deg) < 0.5);
    double mapped = best_elev + kTiltMountOffsetDeg;
    CHECK(noon.tilt_deg == std::clamp(mapped, kTiltMinDeg, kTiltMaxDeg));

    // the summer noon sun sits above the upper tilt stop, which is reported
    CHECK(best_elev > 78.0);
    REQUIRE(!trace.limit_reports.empty());
    CHECK(trace.limit_reports.front().find("tilt") != std::string::npos);

    CalendarDate winter{2018, 12, 21};
    TrackerTrace cold = tracker_trace(kAlbuquerque, winter);
    CHECK(cold.samples.size() < trace.samples.size());
    CHECK(cold.limit_reports.empty());  // noon elevation 31.5 maps inside the stops
}

TEST_CASE("tracker slew stays gentle across the year") {
    for (int month = 1; month <= 12; ++month) {
        TrackerTrace trace =
            tracker_trace(kAlbuquerque, CalendarDate{2018, month, 21}, SessionPolicy::Offset1h,
                          30.0);  // half-minute cadence keeps the sweep cheap
        double worst = 0.0;
        for (std::size_t i = 1; i < trace.samples.size(); ++i) {
            double dt = trace.samples[i].unix_seconds - trace.samples[i - 1].unix_seconds;
            worst = std::max(worst,
                             std::fabs(trace.samples[i].pan_deg - trace.samples[i - 1].pan_deg) / dt);
            worst = std::max(worst, std::fabs(trace.samples[i].tilt_deg -
                                              trace.samples[i - 1].tilt_deg) / dt);
        }
        CHECK(worst < 0.25 + 0.05);  // the sun's own angular rate, with headroom
    }
}

TEST_CASE("tracker propagates window errors") {
    CHECK_THROWS_AS(tracker_trace({78.0, 15.0, 1.0}, CalendarDate{2018, 12, 21}), PolarNight);
    // sub-two-hour arctic day: the offset policy leaves nothing to observe
    CHECK_THROWS_AS(tracker_trace({66.0, 15.0, 1.0}, CalendarDate{2018, 12, 21},
                                  SessionPolicy::Offset1h),
                    EmptyWindow);
    CHECK_THROWS_AS(tracker_trace(kAlbuquerque, CalendarDate{2018, 6, 21},
                                  SessionPolicy::Elevation15deg, 0.0),
                    DomainError);
}

TEST_CASE("session config file round-trip") {
    TempDir tmp("cfg");
    fs::path file = tmp.path / "session.cfg";

    std::ofstream(file) << "# desk-scale run\r\n"
                           "site_latitude_deg = 35.0821\n"
                           "site_longitude_deg = -106.6259\n"
                           "gmt_offset_hours = -7\n"
                           "date = 2018-12-21\n"
                           "session_policy = offset1h   # whole daylight block\n"
                           "seed = 97\n"
                           "window_cap_s = 120\n"
                           "\n"
                           "image_interval_s = 30\n"
                           "ir_burst_frames = 8\n"
                           "vi_repeats = 6\n"
                           "pyranometer_rate_hz = 4\n"
                           "glare_amplitude = 150\n"
                           "cloud_count = 5\n"
                           "noise_sigma = 2.5\n"
                           "duplicate_probability = 0.01\n"
                           "defect_probability = 0.02\n"
                           "optics_image_size = 128\n";

    SessionConfig cfg = load_session_config(file);
    CHECK(cfg.site.latitude_deg == 35.0821);
    CHECK(cfg.site.longitude_deg == -106.6259);
    CHECK(cfg.site.gmt_offset_hours == -7.0);
    CHECK(cfg.date.year == 2018);
    CHECK(cfg.date.month == 12);
    CHECK(cfg.date.day == 21);
    CHECK(cfg.policy == SessionPolicy::Offset1h);
    CHECK(cfg.sky.seed == 97);
    CHECK(cfg.window_cap_s == 120.0);
    CHECK(cfg.schedule.image_interval_s == 30.0);
    CHECK(cfg.schedule.ir_burst_frames == 8);
    CHECK(cfg.schedule.vi_repeats == 6);
    CHECK(cfg.schedule.pyranometer_rate_hz == 4.0);
    CHECK(cfg.sky.glare_amplitude == 150.0);
    CHECK(cfg.sky.cloud_count == 5);
    CHECK(cfg.sky.noise_sigma == 2.5);
    CHECK(cfg.sky.duplicate_probability == 0.01);
    CHECK(cfg.sky.defect_probability == 0.02);
    CHECK(cfg.optics.image_size == 128);
    // untouched keys keep their defaults
    CHECK(cfg.schedule.vi_exposure_count == 4);
    CHECK(cfg.sky.ir_base == 2200.0);

    std::ofstream(file) << "seed = 5\nwheel_count = 3\n";
    try {
        load_session_config(file);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
        CHECK(std::string(e.what()).find("wheel_count") != std::string::npos);
    }

    std::ofstream(file) << "noise_sigma = loud\n";
    CHECK_THROWS_AS(load_session_config(file), ParseError);

    std::ofstream(file) << "date = 2018-13-01\n";
    CHECK_THROWS_AS(load_session_config(file), ParseError);

    CHECK_THROWS_AS(load_session_config(tmp.path / "absent.cfg"), IoError);
}

TEST_CASE("a capped session day is complete, valid, and reproducible") {
    SessionConfig cfg;
    cfg.site = kAlbuquerque;
    cfg.date = CalendarDate{2018, 6, 21};
    cfg.sky.seed = 77;
    cfg.sky.duplicate_probability = 0.02;
    cfg.sky.defect_probability = 0.05;
    cfg.window_cap_s = 60.0;

    TempDir tmp_a("run_a");
    SessionReport report;
    DayArchive day = run_session(cfg, tmp_a.path, &report);

    // the capture grid fills the capped window at the 15 s interval
    auto first = static_cast<std::int64_t>(std::ceil(report.window_start_unix));
    auto last = static_cast<std::int64_t>(std::floor(report.window_end_unix + 1e-9));
    auto expected = static_cast<std::size_t>((last - first) / 15 + 1);
    CHECK(report.instants_attempted == static_cast<int>(expected));
    CHECK(report.instants_written == report.instants_attempted);
    CHECK(report.skipped.empty());
    REQUIRE(day.visible.size() == expected);
    REQUIRE(day.infrared.size() == expected);
    for (std::size_t i = 0; i < expected; ++i) {
        CHECK(day.visible[i].unix_seconds == first + 15 * static_cast<std::int64_t>(i));
        CHECK(day.infrared[i].unix_seconds == day.visible[i].unix_seconds);
    }

    // tabular streams share the pyranometer clock
    auto rows = static_cast<std::size_t>(
                    std::floor((report.window_end_unix - first) * 5.0 + 1e-9)) + 1;
    CHECK(day.pyranometer.size() == rows);
    CHECK(day.sun_position.size() == rows);
    CHECK(day.weather.size() == rows);
    CHECK(report.pyranometer_records == rows);
    for (const PyranometerRecord& r : day.pyranometer) {
        CHECK(r.gsi_wm2 >= 0.0);
        CHECK(r.gsi_wm2 < 1500.0);
    }

    // bursts carried injected faults, yet the filters kept roughly nine of ten
    CHECK(report.ir_bursts == static_cast<long>(expected));
    CHECK(report.ir_frames_kept >= static_cast<long>(expected) * 8);
    CHECK(report.ir_frames_kept <= static_cast<long>(expected) * 10);

    // the simulated day passes the archive validator with nothing to report
    ValidationReport validation = validate_day(tmp_a.path, cfg.date, &cfg.site, cfg.policy);
    for (const ValidationFinding& f : validation.findings)
        MESSAGE(f.stream, " ", f.message);
    CHECK(validation.ok());

    // the manifest exists and records no skips
    fs::path manifest = day.day_dir / "manifest.txt";
    REQUIRE(fs::exists(manifest));
    CHECK(fs::file_size(manifest) == 0);

    // an identical configuration reproduces the archive byte for byte
    TempDir tmp_b("run_b");
    run_session(cfg, tmp_b.path);
    CHECK(support::tree_digest(tmp_a.path) == support::tree_digest(tmp_b.path));
}

TEST_CASE("a failing stage skips its instant and the day carries on") {
    SessionConfig cfg;
    cfg.site = kAlbuquerque;
    cfg.date = CalendarDate{2018, 6, 21};
    cfg.sky.seed = 7;
    cfg.schedule.vi_exposure_count = 3;  // fusion needs exactly four exposures
    cfg.window_cap_s = 45.0;

    TempDir tmp("contain");
    SessionReport report;
    DayArchive day = run_session(cfg, tmp.path, &report);

    CHECK(report.instants_attempted > 0);
    CHECK(report.instants_written == 0);
    CHECK(report.skipped.size() == static_cast<std::size_t>(report.instants_attempted));
    CHECK(day.visible.empty());
    CHECK(day.infrared.empty());  // the whole instant aborts, not just one stream
    CHECK(!day.pyranometer.empty());  // tabular streams are unaffected

    std::ifstream manifest(day.day_dir / "manifest.txt", std::ios::binary);
    std::string text(std::istreambuf_iterator<char>(manifest), {});
    CHECK(text.find("skipped") != std::string::npos);
    CHECK(text.find(std::to_string(report.skipped.front().unix_seconds)) != std::string::npos);
}

TEST_CASE("the spelled-out session overload runs the whole window") {
    CaptureSchedule schedule;
    schedule.image_interval_s = 3600.0;  // hourly keeps the full day cheap
    schedule.pyranometer_rate_hz = 0.01;
    VirtualSky sky;
    sky.seed = 13;
    CalendarDate date{2018, 12, 21};

    TempDir tmp("full");
    SessionReport report;
    DayArchive day = run_session(kAlbuquerque, date, schedule, sky, tmp.path, &report);

    double start = window_start_unix(kAlbuquerque, date, SessionPolicy::Elevation15deg);
    CHECK(report.window_start_unix == Approx(start).epsilon(1e-9));
    CHECK(report.full_window_seconds ==
          Approx(report.window_end_unix - report.window_start_unix).epsilon(1e-9));

    auto expected = static_cast<std::size_t>(
        (static_cast<std::int64_t>(std::floor(report.window_end_unix + 1e-9)) -
         static_cast<std::int64_t>(std::ceil(report.window_start_unix))) / 3600 + 1);
    CHECK(day.visible.size() == expected);
    CHECK(day.infrared.size() == expected);
    CHECK(report.skipped.empty());
}
