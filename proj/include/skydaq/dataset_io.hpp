#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skydaq/frame.hpp"
#include "skydaq/solar_geometry.hpp"

// On-disk archive: one directory per day named yyyy_mm_dd, holding the five
// streams visible/, infrared/, pyranometer/, sun_position/, weather_station/.
// Images are 16-bit grayscale PNG named <unix_seconds>.png; tabular streams
// are comma-separated files named yyyy_mm_dd.csv with no header row and
// shortest round-trip decimal formatting.

namespace skydaq {

struct PyranometerRecord {
    double unix_seconds = 0.0;  // fractional seconds allowed
    double gsi_wm2 = 0.0;       // global solar irradiance, W / m^2
};

struct WeatherRecord {
    double unix_seconds = 0.0;
    double temperature_c = 0.0;
    double dew_point_c = 0.0;
    double pressure_mmhg = 0.0;
    double wind_direction_rad = 0.0;  // [0, 2 pi), meteorological bearing
    double wind_velocity = 0.0;       // miles per second, as published
    double relative_humidity = 0.0;   // [0, 100] percent
};

// --- tabular streams ---------------------------------------------------------

// Readers parse '.'-decimal comma-separated rows. A single leading
// non-numeric line is tolerated as a header; any later unparsable line is a
// ParseError carrying its 1-based line number. Column-count disagreements
// raise SchemaMismatch, and timestamps must be non-decreasing
// (NonMonotoneTimestamps otherwise). Writers emit no header and refuse
// out-of-order records before touching the file; a read of what was written
// reproduces the records bit-exactly.
std::vector<PyranometerRecord> read_pyranometer_csv(const std::filesystem::path& path);
void write_pyranometer_csv(const std::vector<PyranometerRecord>& records,
                           const std::filesystem::path& path);

std::vector<SunPositionRecord> read_sun_position_csv(const std::filesystem::path& path);
void write_sun_position_csv(const std::vector<SunPositionRecord>& records,
                            const std::filesystem::path& path);

std::vector<WeatherRecord> read_weather_csv(const std::filesystem::path& path);
void write_weather_csv(const std::vector<WeatherRecord>& records,
                       const std::filesystem::path& path);

// --- image streams -----------------------------------------------------------

// "1518305015.png" -> 1518305015; anything but pure digits before ".png" is
// an UnparsableFilename.
std::int64_t parse_image_timestamp(const std::string& filename);

std::string image_filename(std::int64_t unix_seconds);

// Writes rounded, clamped 16-bit grayscale PNG. Multi-channel frames are
// rejected (ChannelMismatch); integer-valued frames round-trip bit-exactly.
void write_image(const Frame& frame, const std::filesystem::path& path);

// Reads a 16-bit grayscale PNG; the frame timestamp comes from the filename.
// Throws BadBitDepth for other depths or color types, IoError for missing or
// undecodable files, UnparsableFilename for names that are not unix seconds.
Frame read_image(const std::filesystem::path& path);

// Throws BadDimensions unless the frame matches the expected width x height.
void check_dimensions(const Frame& frame, int width, int height);

// --- weather resampling ------------------------------------------------------

// Linear interpolation of every field onto the target timestamps; exact
// copies at knots. wind_direction travels the shortest arc around the circle
// and is wrapped back to [0, 2 pi). Raw timestamps must be strictly
// increasing; targets outside [first, last] raise TargetOutOfRange (no
// extrapolation).
std::vector<WeatherRecord> interpolate_weather(const std::vector<WeatherRecord>& raw,
                                               const std::vector<double>& targets);

// --- day archive -------------------------------------------------------------

inline constexpr int kVisibleSize = 450;       // square
inline constexpr int kInfraredWidth = 80;
inline constexpr int kInfraredHeight = 60;

struct ImageEntry {
    std::int64_t unix_seconds = 0;
    std::filesystem::path path;
};

struct DayArchive {
    CalendarDate date;
    std::filesystem::path day_dir;
    std::vector<ImageEntry> visible;
    std::vector<ImageEntry> infrared;
    std::vector<PyranometerRecord> pyranometer;
    std::vector<SunPositionRecord> sun_position;
    std::vector<WeatherRecord> weather;
};

std::filesystem::path day_directory(const std::filesystem::path& root, const CalendarDate& date);

// Creates the day directory and its five stream subdirectories.
std::filesystem::path prepare_day_directory(const std::filesystem::path& root,
                                            const CalendarDate& date);

// Indexes the images (sorted by timestamp) and loads the three tabular
// streams. Missing streams stay empty; unreadable tabular data propagates.
DayArchive load_day(const std::filesystem::path& root, const CalendarDate& date);

// --- validation --------------------------------------------------------------

struct ValidationFinding {
    std::string stream;          // which of the five streams
    double unix_seconds = 0.0;   // anchor timestamp, 0 when not applicable
    std::string message;
};

struct StreamSummary {
    std::string stream;
    std::size_t file_count = 0;    // files on disk for the stream
    std::size_t record_count = 0;  // images or rows
};

struct ValidationReport {
    std::vector<StreamSummary> summaries;   // one per stream, fixed order
    std::vector<ValidationFinding> findings;  // sorted by stream, timestamp, text
    bool ok() const { return findings.empty(); }
};

// Scans one day tree: stream presence, image decodability, dimensions and
// bit depth (450x450 visible, 80x60 infrared), filename parsing, timestamp
// order, gaps above twice the nominal cadence (15 s images, 0.25 s tabular
// rows), and physical-range checks on the tabular fields. When a site is
// given, image timestamps must also fall inside that day's session window
// (elevation policy). Problems become report findings, never exceptions, and
// the report is deterministic for a given tree.
ValidationReport validate_day(const std::filesystem::path& root, const CalendarDate& date,
                              const GeoLocation* site = nullptr,
                              SessionPolicy policy = SessionPolicy::Elevation15deg);

}  // namespace skydaq
