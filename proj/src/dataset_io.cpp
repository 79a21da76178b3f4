#include "skydaq/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <system_error>

namespace skydaq {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// --- CSV core ---------------------------------------------------------------

enum class RowStatus { Ok, BadCount, BadNumber };

// Parses one comma-separated line of exactly N doubles.
template <std::size_t N>
RowStatus parse_row(const std::string& line, std::array<double, N>& out, std::size_t& fields_seen) {
    const char* end = line.data() + line.size();
    std::array<std::pair<const char*, const char*>, N> spans;
    std::size_t col = 0;
    const char* p = line.data();
    while (true) {
        const char* comma = std::find(p, end, ',');
        if (col < N) spans[col] = {p, comma};
        ++col;
        if (comma == end) break;
        p = comma + 1;
    }
    fields_seen = col;
    if (col != N) return RowStatus::BadCount;
    for (std::size_t c = 0; c < N; ++c) {
        auto [first, last] = spans[c];
        auto [next, ec] = std::from_chars(first, last, out[c]);
        if (ec != std::errc() || next != last) return RowStatus::BadNumber;
    }
    return RowStatus::Ok;
}

template <std::size_t N>
std::vector<std::array<double, N>> read_table(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::vector<std::array<double, N>> rows;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;

        std::array<double, N> row{};
        std::size_t fields = 0;
        RowStatus status = parse_row<N>(line, row, fields);
        if (status == RowStatus::Ok) {
            rows.push_back(row);
            continue;
        }
        if (line_number == 1) continue;  // tolerated header line
        if (status == RowStatus::BadCount)
            throw SchemaMismatch("expected " + std::to_string(N) + " columns, found " +
                                 std::to_string(fields) + " at line " + std::to_string(line_number) +
                                 " of " + path.string());
        throw ParseError("malformed numeric field at line " + std::to_string(line_number) + " of " +
                             path.string(),
                         line_number);
    }
    return rows;
}

void check_timestamps(const std::vector<double>& times, const std::string& what) {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1])
            throw NonMonotoneTimestamps(what + ": timestamps decrease at row " + std::to_string(i + 1));
}

void append_value(std::string& out, double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw IoError("cannot format value");
    out.append(buf, end);
}

template <std::size_t N>
void write_table(const std::vector<std::array<double, N>>& rows, const fs::path& path) {
    std::string text;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < N; ++c) {
            if (c) text.push_back(',');
            append_value(text, row[c]);
        }
        text.push_back('\n');
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

// --- PNG plumbing -------------------------------------------------------------

// libpng's stock handlers print to stderr before jumping; the archive layer
// reports through exceptions only, so errors jump silently and warnings drop
void quiet_png_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void quiet_png_warning(png_structp, png_const_charp) {}

struct PngWriteGuard {
    FILE* file = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteGuard() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (file) std::fclose(file);
    }
};

struct PngReadGuard {
    FILE* file = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (file) std::fclose(file);
    }
};

}  // namespace

// --- tabular streams ----------------------------------------------------------

std::vector<PyranometerRecord> read_pyranometer_csv(const fs::path& path) {
    auto rows = read_table<2>(path);
    std::vector<PyranometerRecord> records;
    records.reserve(rows.size());
    std::vector<double> times;
    times.reserve(rows.size());
    for (const auto& r : rows) {
        records.push_back({r[0], r[1]});
        times.push_back(r[0]);
    }
    check_timestamps(times, path.string());
    return records;
}

void write_pyranometer_csv(const std::vector<PyranometerRecord>& records, const fs::path& path) {
    std::vector<std::array<double, 2>> rows;
    rows.reserve(records.size());
    std::vector<double> times;
    for (const auto& r : records) {
        rows.push_back({r.unix_seconds, r.gsi_wm2});
        times.push_back(r.unix_seconds);
    }
    check_timestamps(times, "pyranometer records");
    write_table(rows, path);
}

std::vector<SunPositionRecord> read_sun_position_csv(const fs::path& path) {
    auto rows = read_table<3>(path);
    std::vector<SunPositionRecord> records;
    records.reserve(rows.size());
    std::vector<double> times;
    for (const auto& r : rows) {
        records.push_back({r[0], r[1], r[2]});
        times.push_back(r[0]);
    }
    check_timestamps(times, path.string());
    return records;
}

void write_sun_position_csv(const std::vector<SunPositionRecord>& records, const fs::path& path) {
    std::vector<std::array<double, 3>> rows;
    rows.reserve(records.size());
    std::vector<double> times;
    for (const auto& r : records) {
        rows.push_back({r.unix_seconds, r.elevation_deg, r.azimuth_deg});
        times.push_back(r.unix_seconds);
    }
    check_timestamps(times, "sun position records");
    write_table(rows, path);
}

std::vector<WeatherRecord> read_weather_csv(const fs::path& path) {
    auto rows = read_table<7>(path);
    std::vector<WeatherRecord> records;
    records.reserve(rows.size());
    std::vector<double> times;
    for (const auto& r : rows) {
        records.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
        times.push_back(r[0]);
    }
    check_timestamps(times, path.string());
    return records;
}

void write_weather_csv(const std::vector<WeatherRecord>& records, const fs::path& path) {
    std::vector<std::array<double, 7>> rows;
    rows.reserve(records.size());
    std::vector<double> times;
    for (const auto& r : records) {
        rows.push_back({r.unix_seconds, r.temperature_c, r.dew_point_c, r.pressure_mmhg,
                        r.wind_direction_rad, r.wind_velocity, r.relative_humidity});
        times.push_back(r.unix_seconds);
    }
    check_timestamps(times, "weather records");
    write_table(rows, path);
}

// --- image streams --------------------------------------------------------------

std::int64_t parse_image_timestamp(const std::string& filename) {
    std::string_view name(filename);
    if (name.size() <= 4 || name.substr(name.size() - 4) != ".png")
        throw UnparsableFilename("image name must end in .png: " + filename);
    std::string_view stem = name.substr(0, name.size() - 4);
    std::int64_t value = 0;
    auto [next, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), value);
    if (ec != std::errc() || next != stem.data() + stem.size() || value < 0)
        throw UnparsableFilename("image name is not unix seconds: " + filename);
    return value;
}

std::string image_filename(std::int64_t unix_seconds) {
    return std::to_string(unix_seconds) + ".png";
}

void write_image(const Frame& frame, const fs::path& path) {
    if (frame.channels != 1) throw ChannelMismatch("image files hold single-channel frames");
    if (frame.width <= 0 || frame.height <= 0) throw DomainError("frame dimensions must be positive");

    // quantize before any libpng call so no C++ state mutates past the setjmp
    std::size_t stride = static_cast<std::size_t>(frame.width) * 2;
    std::vector<std::uint8_t> bytes(stride * frame.height);
    for (std::size_t k = 0; k < frame.pixels.size(); ++k) {
        double q = std::round(static_cast<double>(frame.pixels[k]));
        q = std::clamp(q, 0.0, 65535.0);
        auto v = static_cast<std::uint16_t>(q);
        bytes[2 * k] = static_cast<std::uint8_t>(v >> 8);  // network byte order
        bytes[2 * k + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
    std::vector<png_bytep> rows(frame.height);
    for (int y = 0; y < frame.height; ++y) rows[y] = bytes.data() + stride * y;

    PngWriteGuard g;
    g.file = std::fopen(path.string().c_str(), "wb");
    if (!g.file) throw IoError("cannot create " + path.string());
    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_png_error, quiet_png_warning);
    if (!g.png) throw IoError("png writer allocation failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw IoError("png writer allocation failed");

    if (setjmp(png_jmpbuf(g.png))) throw IoError("png write failed: " + path.string());
    png_init_io(g.png, g.file);
    png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(frame.width),
                 static_cast<png_uint_32>(frame.height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(g.png, 1);  // archives favor write speed, PNG stays lossless
    png_write_info(g.png, g.info);
    png_write_image(g.png, rows.data());
    png_write_end(g.png, nullptr);
}

Frame read_image(const fs::path& path) {
    std::int64_t timestamp = parse_image_timestamp(path.filename().string());

    PngReadGuard g;
    g.file = std::fopen(path.string().c_str(), "rb");
    if (!g.file) throw IoError("cannot open " + path.string());
    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_png_error, quiet_png_warning);
    if (!g.png) throw IoError("png reader allocation failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw IoError("png reader allocation failed");

    // first protected region: header only, no C++ buffers in flight yet
    png_uint_32 width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    if (setjmp(png_jmpbuf(g.png))) throw IoError("cannot decode " + path.string());
    png_init_io(g.png, g.file);
    png_read_info(g.png, g.info);
    png_get_IHDR(g.png, g.info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
        throw BadBitDepth("expected 16-bit grayscale, found depth " + std::to_string(bit_depth) +
                          " color type " + std::to_string(color_type) + ": " + path.string());

    // buffers are sized before re-arming the jump so a failure mid-decode
    // finds them fully constructed
    std::size_t stride = static_cast<std::size_t>(width) * 2;
    std::vector<std::uint8_t> bytes(stride * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = bytes.data() + stride * y;

    if (setjmp(png_jmpbuf(g.png))) throw IoError("cannot decode " + path.string());
    png_read_image(g.png, rows.data());
    png_read_end(g.png, nullptr);

    Frame out = Frame::make(static_cast<int>(width), static_cast<int>(height), 1, 0.0f,
                            static_cast<double>(timestamp), 16);
    for (std::size_t k = 0; k < out.pixels.size(); ++k)
        out.pixels[k] = static_cast<float>((bytes[2 * k] << 8) | bytes[2 * k + 1]);
    return out;
}

void check_dimensions(const Frame& frame, int width, int height) {
    if (frame.width != width || frame.height != height)
        throw BadDimensions("expected " + std::to_string(width) + "x" + std::to_string(height) +
                            ", found " + std::to_string(frame.width) + "x" +
                            std::to_string(frame.height));
}

// --- weather resampling ---------------------------------------------------------

namespace {

double wrap_direction(double value) {
    double v = std::fmod(value, kTwoPi);
    if (v < 0) v += kTwoPi;
    return v;
}

double shortest_arc(double from, double to) {
    double d = std::fmod(to - from, kTwoPi);
    if (d <= -std::numbers::pi)
        d += kTwoPi;
    else if (d > std::numbers::pi)
        d -= kTwoPi;
    return d;
}

}  // namespace

std::vector<WeatherRecord> interpolate_weather(const std::vector<WeatherRecord>& raw,
                                               const std::vector<double>& targets) {
    if (raw.empty()) throw DomainError("no weather records to interpolate from");
    for (std::size_t i = 1; i < raw.size(); ++i)
        if (!(raw[i].unix_seconds > raw[i - 1].unix_seconds))
            throw NonMonotoneTimestamps("weather records must be strictly increasing");

    std::vector<WeatherRecord> out;
    out.reserve(targets.size());
    for (double t : targets) {
        if (t < raw.front().unix_seconds || t > raw.back().unix_seconds)
            throw TargetOutOfRange("target " + std::to_string(t) +
                                   " lies outside the raw weather span");
        auto it = std::lower_bound(raw.begin(), raw.end(), t,
                                   [](const WeatherRecord& r, double v) { return r.unix_seconds < v; });
        if (it != raw.end() && it->unix_seconds == t) {
            out.push_back(*it);  // knots reproduce exactly
            continue;
        }
        const WeatherRecord& b = *it;
        const WeatherRecord& a = *std::prev(it);
        double frac = (t - a.unix_seconds) / (b.unix_seconds - a.unix_seconds);
        WeatherRecord r;
        r.unix_seconds = t;
        r.temperature_c = a.temperature_c + frac * (b.temperature_c - a.temperature_c);
        r.dew_point_c = a.dew_point_c + frac * (b.dew_point_c - a.dew_point_c);
        r.pressure_mmhg = a.pressure_mmhg + frac * (b.pressure_mmhg - a.pressure_mmhg);
        r.wind_direction_rad =
            wrap_direction(a.wind_direction_rad +
                           frac * shortest_arc(a.wind_direction_rad, b.wind_direction_rad));
        r.wind_velocity = a.wind_velocity + frac * (b.wind_velocity - a.wind_velocity);
        r.relative_humidity = a.relative_humidity + frac * (b.relative_humidity - a.relative_humidity);
        out.push_back(r);
    }
    return out;
}

// --- day archive -------------------------------------------------------------------

std::filesystem::path day_directory(const fs::path& root, const CalendarDate& date) {
    return root / date_file_stem(date);
}

std::filesystem::path prepare_day_directory(const fs::path& root, const CalendarDate& date) {
    fs::path day = day_directory(root, date);
    std::error_code ec;
    for (const char* stream : {"visible", "infrared", "pyranometer", "sun_position", "weather_station"}) {
        fs::create_directories(day / stream, ec);
        if (ec) throw IoError("cannot create " + (day / stream).string() + ": " + ec.message());
    }
    return day;
}

namespace {

std::vector<ImageEntry> index_images(const fs::path& dir) {
    std::vector<ImageEntry> entries;
    if (!fs::exists(dir)) return entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        entries.push_back({parse_image_timestamp(e.path().filename().string()), e.path()});
    }
    std::sort(entries.begin(), entries.end(),
              [](const ImageEntry& a, const ImageEntry& b) { return a.unix_seconds < b.unix_seconds; });
    return entries;
}

}  // namespace

DayArchive load_day(const fs::path& root, const CalendarDate& date) {
    DayArchive day;
    day.date = date;
    day.day_dir = day_directory(root, date);
    day.visible = index_images(day.day_dir / "visible");
    day.infrared = index_images(day.day_dir / "infrared");

    std::string csv = date_file_stem(date) + ".csv";
    fs::path p = day.day_dir / "pyranometer" / csv;
    if (fs::exists(p)) day.pyranometer = read_pyranometer_csv(p);
    p = day.day_dir / "sun_position" / csv;
    if (fs::exists(p)) day.sun_position = read_sun_position_csv(p);
    p = day.day_dir / "weather_station" / csv;
    if (fs::exists(p)) day.weather = read_weather_csv(p);
    return day;
}

// --- validation ------------------------------------------------------------------------

namespace {

constexpr double kImageCadence = 15.0;    // seconds between captures
constexpr double kTabularCadence = 0.25;  // slowest stated sampling interval

struct WindowBounds {
    bool available = false;
    double start_unix = 0.0;
    double end_unix = 0.0;
};

}  // namespace

ValidationReport validate_day(const fs::path& root, const CalendarDate& date,
                              const GeoLocation* site, SessionPolicy policy) {
    ValidationReport report;
    fs::path day = day_directory(root, date);
    std::string csv = date_file_stem(date) + ".csv";

    auto add = [&report](const std::string& stream, double ts, const std::string& msg) {
        report.findings.push_back({stream, ts, msg});
    };

    WindowBounds window;
    if (site) {
        try {
            SessionWindow w = session_window(*site, day_of_year(date), policy);
            double midnight = local_midnight_unix(date, site->gmt_offset_hours);
            window.start_unix = midnight + w.start_hours * 3600.0;
            window.end_unix = midnight + w.end_hours * 3600.0;
            window.available = true;
        } catch (const Error& e) {
            add("visible", 0.0, std::string("session window unavailable: ") + e.what());
        }
    }

    struct ImageStream {
        const char* name;
        int width;
        int height;
    };
    for (const ImageStream& s : {ImageStream{"infrared", kInfraredWidth, kInfraredHeight},
                                 ImageStream{"visible", kVisibleSize, kVisibleSize}}) {
        fs::path dir = day / s.name;
        StreamSummary summary{s.name, 0, 0};
        if (!fs::exists(dir)) {
            add(s.name, 0.0, "stream directory missing");
            report.summaries.push_back(summary);
            continue;
        }
        std::vector<ImageEntry> entries;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (!e.is_regular_file()) continue;
            ++summary.file_count;
            std::string name = e.path().filename().string();
            try {
                entries.push_back({parse_image_timestamp(name), e.path()});
            } catch (const UnparsableFilename&) {
                add(s.name, 0.0, "unexpected file: " + name);
            }
        }
        std::sort(entries.begin(), entries.end(), [](const ImageEntry& a, const ImageEntry& b) {
            return a.unix_seconds < b.unix_seconds;
        });
        summary.record_count = entries.size();
        report.summaries.push_back(summary);

        for (std::size_t i = 0; i < entries.size(); ++i) {
            double ts = static_cast<double>(entries[i].unix_seconds);
            if (i > 0) {
                double gap = ts - static_cast<double>(entries[i - 1].unix_seconds);
                if (gap > 2.0 * kImageCadence)
                    add(s.name, ts, "gap of " + std::to_string(gap) + " s before this capture");
            }
            if (window.available &&
                (ts < window.start_unix - 1e-9 || ts > window.end_unix + 1e-9))
                add(s.name, ts, "capture outside the session window");
            try {
                Frame f = read_image(entries[i].path);
                check_dimensions(f, s.width, s.height);
            } catch (const Error& e) {
                add(s.name, ts, e.what());
            }
        }
    }

    // tabular streams: existence, parse, cadence, physical ranges
    auto tabular = [&](const char* name, auto reader, auto&& inspect) {
        fs::path path = day / name / csv;
        StreamSummary summary{name, 0, 0};
        if (!fs::exists(path)) {
            add(name, 0.0, "stream file missing: " + csv);
            report.summaries.push_back(summary);
            return;
        }
        summary.file_count = 1;
        try {
            auto records = reader(path);
            summary.record_count = records.size();
            double prev = 0.0;
            bool have_prev = false;
            for (const auto& r : records) {
                if (have_prev && r.unix_seconds - prev > 2.0 * kTabularCadence)
                    add(name, r.unix_seconds,
                        "gap of " + std::to_string(r.unix_seconds - prev) + " s before this row");
                prev = r.unix_seconds;
                have_prev = true;
                inspect(r);
            }
        } catch (const Error& e) {
            add(name, 0.0, e.what());
        }
        report.summaries.push_back(summary);
    };

    tabular("pyranometer", read_pyranometer_csv, [&](const PyranometerRecord& r) {
        if (!(r.gsi_wm2 >= 0.0 && r.gsi_wm2 < 1500.0))
            add("pyranometer", r.unix_seconds, "irradiance out of range: " + std::to_string(r.gsi_wm2));
    });
    tabular("sun_position", read_sun_position_csv, [&](const SunPositionRecord& r) {
        if (!(r.elevation_deg >= -90.0 && r.elevation_deg <= 90.0))
            add("sun_position", r.unix_seconds,
                "elevation out of range: " + std::to_string(r.elevation_deg));
        if (!(r.azimuth_deg >= 0.0 && r.azimuth_deg < 360.0))
            add("sun_position", r.unix_seconds,
                "azimuth out of range: " + std::to_string(r.azimuth_deg));
    });
    tabular("weather_station", read_weather_csv, [&](const WeatherRecord& r) {
        if (!(r.relative_humidity >= 0.0 && r.relative_humidity <= 100.0))
            add("weather_station", r.unix_seconds,
                "relative humidity out of range: " + std::to_string(r.relative_humidity));
        if (!(r.wind_direction_rad >= 0.0 && r.wind_direction_rad < kTwoPi))
            add("weather_station", r.unix_seconds,
                "wind direction out of range: " + std::to_string(r.wind_direction_rad));
        if (r.dew_point_c > r.temperature_c)
            add("weather_station", r.unix_seconds, "dew point exceeds temperature");
    });

    std::sort(report.summaries.begin(), report.summaries.end(),
              [](const StreamSummary& a, const StreamSummary& b) { return a.stream < b.stream; });
    std::sort(report.findings.begin(), report.findings.end(),
              [](const ValidationFinding& a, const ValidationFinding& b) {
                  if (a.stream != b.stream) return a.stream < b.stream;
                  if (a.unix_seconds != b.unix_seconds) return a.unix_seconds < b.unix_seconds;
                  return a.message < b.message;
              });
    return report;
}

}  // namespace skydaq
