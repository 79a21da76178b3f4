#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skydaq/errors.hpp"

// Sun-position model for a fixed ground site. Time flows unix seconds ->
// local clock time (fixed GMT offset, no DST) -> local solar time -> hour
// angle; angles come out of the classic harmonic declination / equation-of-
// time approximations. All public angles are degrees; radians never cross an
// API boundary.

namespace skydaq {

struct GeoLocation {
    double latitude_deg = 0.0;     // [-90, 90], north positive
    double longitude_deg = 0.0;    // [-180, 180], east positive
    double gmt_offset_hours = 0.0; // fixed standard offset, [-12, 14]
};

void validate(const GeoLocation& loc);  // throws DomainError

// --- calendar helpers (proleptic Gregorian, fixed-offset local time) ---

struct CalendarDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
};

CalendarDate civil_from_days(std::int64_t days_since_epoch);
std::int64_t days_from_civil(const CalendarDate& d);
int day_of_year(const CalendarDate& d);                  // 1..366
CalendarDate parse_date(const std::string& text);        // "2018-02-10" or "2018_02_10"
std::string date_file_stem(const CalendarDate& d);       // "2018_02_10"
double local_midnight_unix(const CalendarDate& d, double gmt_offset_hours);

struct TimeParts {
    int day_of_year = 1;            // 1..366, in local time
    double local_time_hours = 0.0;  // [0, 24)
};

// Split a unix timestamp into local day-of-year and local clock hours.
TimeParts decompose_time(double unix_seconds, double gmt_offset_hours);

// --- scalar pieces of the time chain ---

double lstm_degrees(double gmt_offset_hours);                       // 15 deg/hour
double b_degrees(int day_of_year);                                  // seasonal phase
double equation_of_time_minutes(int day_of_year);
double time_correction_minutes(double longitude_deg, double gmt_offset_hours,
                               int day_of_year);
double local_solar_time_hours(double local_time_hours, double tc_minutes);
double hour_angle_deg(double lst_hours);                            // 15 deg/hour past noon
double declination_deg(int day_of_year);

struct SolarTime {
    double unix_seconds = 0.0;
    int day_of_year = 1;
    double local_time_hours = 0.0;
    double lstm_deg = 0.0;
    double b_deg = 0.0;
    double eot_minutes = 0.0;
    double tc_minutes = 0.0;
    double lst_hours = 0.0;
    double hra_deg = 0.0;
};

SolarTime solar_time(const GeoLocation& loc, double unix_seconds);

struct SolarAngles {
    double elevation_deg = 0.0;  // [-90, 90]
    double zenith_deg = 90.0;    // 90 - elevation, by construction
    double azimuth_deg = 0.0;    // [0, 360), clockwise from true north
};

// Core angle solver; exposed so properties can be checked on (delta, phi, HRA)
// directly. Throws DegeneratePosition near the zenith (azimuth undefined).
SolarAngles angles_from(double declination_deg, double latitude_deg, double hra_deg);

SolarAngles solar_position(const GeoLocation& loc, double unix_seconds);

struct SunriseSunset {
    double sunrise_hours = 0.0;  // local clock hours
    double sunset_hours = 0.0;
};

// Throws PolarDay / PolarNight when the half-day angle has no solution.
SunriseSunset sunrise_sunset(const GeoLocation& loc, int day_of_year);

enum class SessionPolicy {
    Offset1h,       // sunrise + 1 h .. sunset - 1 h
    Elevation15deg, // sun elevation above 15 deg
};

SessionPolicy parse_session_policy(const std::string& name);
std::string to_string(SessionPolicy p);

struct SessionWindow {
    double sunrise_hours = 0.0;
    double sunset_hours = 0.0;
    double start_hours = 0.0;
    double end_hours = 0.0;
    SessionPolicy policy = SessionPolicy::Elevation15deg;
};

// Observation window for one day; throws EmptyWindow when start >= end.
SessionWindow session_window(const GeoLocation& loc, int day_of_year, SessionPolicy policy);

// Elevation threshold used by SessionPolicy::Elevation15deg.
inline constexpr double kSessionElevationDeg = 15.0;

struct SunPositionRecord {
    double unix_seconds = 0.0;
    double elevation_deg = 0.0;
    double azimuth_deg = 0.0;
};

struct SkippedInstant {
    double unix_seconds = 0.0;
    std::string reason;
};

struct SunPositionTable {
    std::vector<SunPositionRecord> records;
    std::vector<SkippedInstant> skipped;  // degenerate instants, reported not fatal
};

// Evaluate the sun position for each timestamp (ascending). Degenerate
// instants are reported in `skipped`; everything else is fatal.
SunPositionTable sun_position_table(const std::vector<double>& unix_times,
                                    const GeoLocation& loc);

}  // namespace skydaq
