#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skydaq/dataset_io.hpp"
#include "skydaq/exposure_fusion.hpp"
#include "skydaq/frame.hpp"
#include "skydaq/frame_processing.hpp"
#include "skydaq/solar_geometry.hpp"

// Deterministic acquisition-day simulator. A virtual sky stands in for the
// two cameras and the pyranometer; everything downstream of it is the real
// pipeline (burst filtering, exposure fusion, archive writing), so a
// simulated day exercises the same code paths a field day would. Output
// bytes are a pure function of the configuration: frame noise is drawn by
// hashing (seed, instant, stream, frame, pixel) rather than from any shared
// generator state.

namespace skydaq {

// --- schedule -----------------------------------------------------------------

struct CaptureSchedule {
    double image_interval_s = 15.0;   // both cameras fire together
    int ir_burst_frames = 10;
    double ir_burst_fps = 9.0;
    int vi_exposure_count = 4;        // exposures cycled per capture
    int vi_repeats = 10;              // cycles per capture
    double vi_fps = 9.0;
    double tracker_update_s = 1.0;
    double pyranometer_rate_hz = 5.0;
};

// Cadences must be positive, frame counts at least one, the image interval a
// whole number of seconds (file names carry integer timestamps), and each
// camera burst must finish before the next interval starts.
void validate_schedule(const CaptureSchedule& schedule);

// --- virtual sky ----------------------------------------------------------------

struct VirtualSky {
    std::uint64_t seed = 1;

    // visible camera, sensor counts at the shortest exposure; the tracker
    // keeps the sun on the lens axis, so glare is centered
    double glare_amplitude = 190.0;
    double glare_sigma_px = 45.0;
    double sky_base = 18.0;

    // infrared camera, raw thermal counts; clouds read warm
    double ir_base = 2200.0;
    double ir_amplitude = 9000.0;
    double ir_sigma_px = 9.0;
    double ir_cloud_gain = 1500.0;
    double ir_noise_sigma = 40.0;

    // drifting cloud blobs, in normalized [0, 1]^2 sky coordinates shared by
    // both cameras and the irradiance model
    int cloud_count = 3;
    double cloud_attenuation = 0.55;   // peak fractional dimming per blob
    double cloud_sigma = 0.13;         // blob width, fraction of the sky
    double cloud_drift_per_s = 0.002;  // blob speed, fraction of the sky per second

    // sensor noise and burst fault injection
    double noise_sigma = 1.0;            // visible counts, per frame
    double duplicate_probability = 0.0;  // per frame after the first of a group
    double defect_probability = 0.0;     // per frame
};

void validate_sky(const VirtualSky& sky);

// Fraction of sunlight passing the cloud field at sky position (u, v) in
// [0, 1]^2 at the given instant; 1 means clear.
double cloud_transmittance(const VirtualSky& sky, double u, double v, double unix_seconds);

// Clear-sky irradiance 1000 * sin(elevation), dimmed by the cloud field at
// the sun's (tracked, centered) sky position. W / m^2, never negative.
double synthesize_irradiance(const VirtualSky& sky, double elevation_deg, double unix_seconds);

// One infrared burst at the capture instant: ir_burst_frames single-channel
// 80 x 60 frames at ir_burst_fps, with noise and injected faults.
std::vector<Frame> synthesize_infrared_burst(const VirtualSky& sky,
                                             const CaptureSchedule& schedule,
                                             std::int64_t unix_seconds);

// One visible capture: vi_exposure_count groups of vi_repeats single-channel
// D x D frames, exposures cycled frame by frame as the camera switches.
// Group e holds the frames of exposure_times_ms[e]; intensity scales
// linearly with exposure time.
std::vector<std::vector<Frame>> synthesize_visible_capture(const VirtualSky& sky,
                                                           const CaptureSchedule& schedule,
                                                           std::int64_t unix_seconds,
                                                           const FusionConfig& optics);

// --- solar tracker ---------------------------------------------------------------

inline constexpr double kPanLimitDeg = 159.0;        // symmetric travel
inline constexpr double kTiltMinDeg = -47.0;
inline constexpr double kTiltMaxDeg = 31.0;
inline constexpr double kSlewLimitDegPerS = 60.0;
// Mount tilt reads zero with the optical axis 47 degrees up, so the tilt
// stop span [-47, +31] covers elevations 0..78 degrees — the full solar arc
// at the site the ranges were chosen for.
inline constexpr double kTiltMountOffsetDeg = -47.0;

struct TrackerSample {
    double unix_seconds = 0.0;
    double pan_deg = 0.0;   // 0 faces true south, positive westward
    double tilt_deg = 0.0;
};

struct TrackerTrace {
    std::vector<TrackerSample> samples;          // one per update across the window
    std::vector<std::string> limit_reports;      // one line per clipped sample
};

// Follow the sun across the session window at the update cadence. Commands
// beyond the travel stops are clipped and reported, never fatal. Window
// errors (EmptyWindow, polar conditions) propagate.
TrackerTrace tracker_trace(const GeoLocation& loc, const CalendarDate& date,
                           SessionPolicy policy = SessionPolicy::Elevation15deg,
                           double update_s = 1.0);

// --- session ---------------------------------------------------------------------

struct SessionConfig {
    GeoLocation site{35.0821, -106.6259, -7.0};
    CalendarDate date{2018, 6, 21};
    SessionPolicy policy = SessionPolicy::Elevation15deg;
    CaptureSchedule schedule;
    VirtualSky sky;
    FusionConfig optics;
    double window_cap_s = 0.0;  // > 0 truncates the session after this many seconds
};

// Plain key = value text, '#' comments and blank lines ignored. Unknown keys
// and unparsable values raise ParseError with the line number; a missing
// file raises IoError. Keys not present keep their defaults.
SessionConfig load_session_config(const std::filesystem::path& path);

struct SkippedCapture {
    std::int64_t unix_seconds = 0;
    std::string reason;
};

struct SessionReport {
    double window_start_unix = 0.0;   // after any cap
    double window_end_unix = 0.0;
    double full_window_seconds = 0.0; // uncapped session length
    int instants_attempted = 0;
    int instants_written = 0;
    std::vector<SkippedCapture> skipped;
    long ir_bursts = 0;
    long ir_frames_kept = 0;          // burst-filter survivors, summed
    std::size_t pyranometer_records = 0;
};

// Simulate one acquisition day into output_root using the real processing
// pipeline: per capture instant an infrared burst is filtered and averaged
// and a visible capture is fused, both written as 16-bit PNGs; pyranometer,
// sun-position, and weather CSVs cover the window at the pyranometer rate
// (weather is resampled from 10-minute synthetic readings). A failure inside
// one instant skips that instant, is listed in the day's manifest.txt, and
// the day carries on. Returns the archive as read back from disk.
DayArchive run_session(const SessionConfig& config, const std::filesystem::path& output_root,
                       SessionReport* report = nullptr);

DayArchive run_session(const GeoLocation& loc, const CalendarDate& date,
                       const CaptureSchedule& schedule, const VirtualSky& sky,
                       const std::filesystem::path& output_root,
                       SessionReport* report = nullptr);

}  // namespace skydaq
