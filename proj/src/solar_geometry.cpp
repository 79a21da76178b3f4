#include "skydaq/solar_geometry.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace skydaq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegPerRad = 180.0 / kPi;
// Inverse-trig arguments may overshoot [-1, 1] by rounding noise; anything
// beyond this is treated as a real inconsistency, not noise.
constexpr double kTrigClampTol = 1e-6;
// Below this |cos(zenith angle proxy)| the azimuth denominator is meaningless.
constexpr double kZenithCosFloor = 1e-9;

double rad(double deg) { return deg * (kPi / 180.0); }
double sin_deg(double d) { return std::sin(rad(d)); }
double cos_deg(double d) { return std::cos(rad(d)); }
double tan_deg(double d) { return std::tan(rad(d)); }
double asin_deg(double x) { return std::asin(x) * kDegPerRad; }
double acos_deg(double x) { return std::acos(x) * kDegPerRad; }

// Clamp an inverse-trig argument to [-1, 1]; larger violations are errors.
double clamp_unit(double x, const char* what) {
    if (x > 1.0) {
        if (x > 1.0 + kTrigClampTol)
            throw DegeneratePosition(std::string(what) + " argument exceeds 1 beyond tolerance");
        return 1.0;
    }
    if (x < -1.0) {
        if (x < -1.0 - kTrigClampTol)
            throw DegeneratePosition(std::string(what) + " argument below -1 beyond tolerance");
        return -1.0;
    }
    return x;
}

void check_day(int day_of_year) {
    if (day_of_year < 1 || day_of_year > 366)
        throw DomainError("day_of_year must be in [1, 366]");
}

}  // namespace

void validate(const GeoLocation& loc) {
    if (!(loc.latitude_deg >= -90.0 && loc.latitude_deg <= 90.0))
        throw DomainError("latitude must be in [-90, 90]");
    if (!(loc.longitude_deg >= -180.0 && loc.longitude_deg <= 180.0))
        throw DomainError("longitude must be in [-180, 180]");
    if (!(loc.gmt_offset_hours >= -12.0 && loc.gmt_offset_hours <= 14.0))
        throw DomainError("gmt offset must be in [-12, 14]");
}

CalendarDate civil_from_days(std::int64_t days_since_epoch) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{days_since_epoch}}};
    return {static_cast<int>(ymd.year()), static_cast<int>(unsigned(ymd.month())),
            static_cast<int>(unsigned(ymd.day()))};
}

std::int64_t days_from_civil(const CalendarDate& d) {
    using namespace std::chrono;
    year_month_day ymd{year{d.year}, month{static_cast<unsigned>(d.month)},
                       day{static_cast<unsigned>(d.day)}};
    if (!ymd.ok()) throw DomainError("invalid calendar date");
    return sys_days{ymd}.time_since_epoch().count();
}

int day_of_year(const CalendarDate& d) {
    return static_cast<int>(days_from_civil(d) - days_from_civil({d.year, 1, 1})) + 1;
}

CalendarDate parse_date(const std::string& text) {
    CalendarDate d;
    char sep1 = 0, sep2 = 0;
    if (std::sscanf(text.c_str(), "%d%c%d%c%d", &d.year, &sep1, &d.month, &sep2, &d.day) != 5 ||
        !((sep1 == '-' && sep2 == '-') || (sep1 == '_' && sep2 == '_')))
        throw DomainError("expected date as yyyy-mm-dd or yyyy_mm_dd: " + text);
    days_from_civil(d);  // validates
    return d;
}

std::string date_file_stem(const CalendarDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d_%02d_%02d", d.year, d.month, d.day);
    return buf;
}

double local_midnight_unix(const CalendarDate& d, double gmt_offset_hours) {
    return static_cast<double>(days_from_civil(d)) * 86400.0 - gmt_offset_hours * 3600.0;
}

TimeParts decompose_time(double unix_seconds, double gmt_offset_hours) {
    if (!std::isfinite(unix_seconds) || unix_seconds < 0.0)
        throw DomainError("unix_seconds must be finite and non-negative");
    double local = unix_seconds + gmt_offset_hours * 3600.0;
    auto day = static_cast<std::int64_t>(std::floor(local / 86400.0));
    double second_of_day = local - static_cast<double>(day) * 86400.0;
    CalendarDate date = civil_from_days(day);
    return {day_of_year(date), second_of_day / 3600.0};
}

double lstm_degrees(double gmt_offset_hours) { return 15.0 * gmt_offset_hours; }

double b_degrees(int day_of_year) {
    check_day(day_of_year);
    return (360.0 / 365.0) * (day_of_year - 81);
}

double equation_of_time_minutes(int day_of_year) {
    double b = b_degrees(day_of_year);
    return 9.87 * sin_deg(2.0 * b) - 7.53 * cos_deg(b) - 1.5 * sin_deg(b);
}

double time_correction_minutes(double longitude_deg, double gmt_offset_hours,
                               int day_of_year) {
    return 4.0 * (longitude_deg - lstm_degrees(gmt_offset_hours)) +
           equation_of_time_minutes(day_of_year);
}

double local_solar_time_hours(double local_time_hours, double tc_minutes) {
    return local_time_hours + tc_minutes / 60.0;
}

double hour_angle_deg(double lst_hours) { return 15.0 * (lst_hours - 12.0); }

double declination_deg(int day_of_year) {
    check_day(day_of_year);
    return 23.45 * sin_deg((360.0 / 365.0) * (day_of_year - 81));
}

SolarTime solar_time(const GeoLocation& loc, double unix_seconds) {
    validate(loc);
    TimeParts t = decompose_time(unix_seconds, loc.gmt_offset_hours);
    SolarTime st;
    st.unix_seconds = unix_seconds;
    st.day_of_year = t.day_of_year;
    st.local_time_hours = t.local_time_hours;
    st.lstm_deg = lstm_degrees(loc.gmt_offset_hours);
    st.b_deg = b_degrees(t.day_of_year);
    st.eot_minutes = equation_of_time_minutes(t.day_of_year);
    st.tc_minutes = 4.0 * (loc.longitude_deg - st.lstm_deg) + st.eot_minutes;
    st.lst_hours = local_solar_time_hours(t.local_time_hours, st.tc_minutes);
    st.hra_deg = hour_angle_deg(st.lst_hours);
    return st;
}

SolarAngles angles_from(double declination_deg, double latitude_deg, double hra_deg) {
    if (!(declination_deg >= -90.0 && declination_deg <= 90.0))
        throw DomainError("declination must be in [-90, 90]");
    if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0))
        throw DomainError("latitude must be in [-90, 90]");

    // Fold the hour angle into [-180, 180) so the morning/afternoon test works.
    double hra = std::fmod(hra_deg + 180.0, 360.0);
    if (hra < 0.0) hra += 360.0;
    hra -= 180.0;

    double sd = sin_deg(declination_deg), cd = cos_deg(declination_deg);
    double sp = sin_deg(latitude_deg), cp = cos_deg(latitude_deg);
    double ch = cos_deg(hra);

    double se = clamp_unit(sd * sp + cd * cp * ch, "elevation asin");
    double elevation = asin_deg(se);

    SolarAngles a;
    a.elevation_deg = elevation;
    a.zenith_deg = 90.0 - elevation;

    // Incidence angle on the sun-tracking surface equals the zenith distance,
    // so its cosine is the azimuth denominator.
    double cos_xi = cos_deg(elevation);
    if (std::fabs(cos_xi) < kZenithCosFloor)
        throw DegeneratePosition("sun at zenith: azimuth undefined");

    double raw = (sd * cp - cd * sp * ch) / cos_xi;
    double a0 = acos_deg(clamp_unit(raw, "azimuth acos"));
    double az = (hra <= 0.0) ? a0 : 360.0 - a0;  // afternoon mirrors to the west
    a.azimuth_deg = std::fmod(az, 360.0);
    return a;
}

SolarAngles solar_position(const GeoLocation& loc, double unix_seconds) {
    SolarTime st = solar_time(loc, unix_seconds);
    return angles_from(declination_deg(st.day_of_year), loc.latitude_deg, st.hra_deg);
}

SunriseSunset sunrise_sunset(const GeoLocation& loc, int day_of_year) {
    validate(loc);
    double delta = declination_deg(day_of_year);
    double tc = time_correction_minutes(loc.longitude_deg, loc.gmt_offset_hours, day_of_year);
    double arg = -(sin_deg(loc.latitude_deg) * sin_deg(delta)) /
                 (cos_deg(loc.latitude_deg) * cos_deg(delta));
    if (arg > 1.0) throw PolarNight("sun never rises on this day at this latitude");
    if (arg < -1.0) throw PolarDay("sun never sets on this day at this latitude");
    double half_day_hours = acos_deg(arg) / 15.0;
    return {12.0 - half_day_hours - tc / 60.0, 12.0 + half_day_hours - tc / 60.0};
}

SessionPolicy parse_session_policy(const std::string& name) {
    if (name == "offset1h") return SessionPolicy::Offset1h;
    if (name == "elevation15") return SessionPolicy::Elevation15deg;
    throw DomainError("unknown session policy: " + name + " (offset1h | elevation15)");
}

std::string to_string(SessionPolicy p) {
    return p == SessionPolicy::Offset1h ? "offset1h" : "elevation15";
}

SessionWindow session_window(const GeoLocation& loc, int day_of_year, SessionPolicy policy) {
    SunriseSunset srss = sunrise_sunset(loc, day_of_year);
    SessionWindow w;
    w.sunrise_hours = srss.sunrise_hours;
    w.sunset_hours = srss.sunset_hours;
    w.policy = policy;

    if (policy == SessionPolicy::Offset1h) {
        w.start_hours = srss.sunrise_hours + 1.0;
        w.end_hours = srss.sunset_hours - 1.0;
    } else {
        double delta = declination_deg(day_of_year);
        double tc = time_correction_minutes(loc.longitude_deg, loc.gmt_offset_hours, day_of_year);
        double sp = sin_deg(loc.latitude_deg), cp = cos_deg(loc.latitude_deg);
        double sd = sin_deg(delta), cd = cos_deg(delta);
        auto elevation_at = [&](double lt) {
            double h = hour_angle_deg(local_solar_time_hours(lt, tc));
            double se = sd * sp + cd * cp * cos_deg(h);
            se = std::fmin(1.0, std::fmax(-1.0, se));
            return asin_deg(se);
        };
        double noon = 12.0 - tc / 60.0;  // LST == 12
        if (elevation_at(noon) <= kSessionElevationDeg)
            throw EmptyWindow("sun never clears the elevation threshold on this day");
        // Elevation rises monotonically from sunrise to solar noon and falls
        // after it; bisect each flank to one second.
        auto bisect = [&](double lo, double hi, bool rising) {
            while (hi - lo > 1.0 / 3600.0) {
                double mid = 0.5 * (lo + hi);
                bool below = elevation_at(mid) < kSessionElevationDeg;
                if (below == rising)
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        };
        w.start_hours = bisect(srss.sunrise_hours, noon, true);
        w.end_hours = bisect(noon, srss.sunset_hours, false);
    }

    if (!(w.start_hours < w.end_hours))
        throw EmptyWindow("observation window is empty on this day");
    return w;
}

SunPositionTable sun_position_table(const std::vector<double>& unix_times,
                                    const GeoLocation& loc) {
    validate(loc);
    for (std::size_t i = 1; i < unix_times.size(); ++i)
        if (!(unix_times[i - 1] < unix_times[i]))
            throw DomainError("timestamps must be strictly ascending");

    SunPositionTable table;
    table.records.reserve(unix_times.size());
    for (double t : unix_times) {
        try {
            SolarAngles a = solar_position(loc, t);
            table.records.push_back({t, a.elevation_deg, a.azimuth_deg});
        } catch (const DegeneratePosition& e) {
            table.skipped.push_back({t, e.what()});
        }
    }
    return table;
}

}  // namespace skydaq
