#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace faster {

/// Days since 1970-01-01 for "YYYY-MM-DD". Throws ValidationError.
int parse_date(const std::string& text);
/// 0 = Monday ... 6 = Sunday.
int day_of_week(int days_since_epoch);
std::string format_date(int days_since_epoch);

struct CalendarDay {
    std::string date;  // YYYY-MM-DD
    std::string event; // special-event tag, empty for ordinary days
    std::map<std::string, std::vector<double>> values; // station -> one value per time-of-day bin
};

/// Additive calendar hierarchy per station and time-of-day bin:
///   level 1  weekday or weekend profile (mean of that class's day-of-week means)
///   level 2  day-of-week residual over level 1
///   level 3  special-event residual over levels 1 + 2, keyed by event tag
/// Levels 1 and 2 are fit on ordinary days only.
struct CalendarModel {
    int bins = 0;
    std::map<std::string, std::vector<std::vector<double>>> level1; // station -> [weekday, weekend] -> bins
    std::map<std::string, std::vector<std::vector<double>>> level2; // station -> dow -> bins
    std::map<std::string, std::map<std::string, std::vector<double>>> level3; // tag -> station -> bins
    std::map<std::string, double> residual_std; // station -> pooled std of ordinary-day residuals

    /// Sum of the applicable levels. Unknown event tags use levels 1 + 2 only.
    /// Returns nullopt for an unknown station or a bin out of range.
    std::optional<double> predict(const std::string& date, const std::string& station, int bin,
                                  const std::string& event = "") const;
    double bin_seconds() const { return 86400.0 / bins; }
};

/// Needs at least 14 distinct days and every day of the week among ordinary days.
CalendarModel fit_calendar(const std::vector<CalendarDay>& history);

nlohmann::json to_json(const CalendarModel& model);
CalendarModel calendar_from_json(const nlohmann::json& doc);

/// {date, event?, values: {station: [...]}}
CalendarDay calendar_day_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const CalendarDay& day);

} // namespace faster
