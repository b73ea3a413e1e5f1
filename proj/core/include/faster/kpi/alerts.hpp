#pragma once

#include "faster/kpi/calendar.hpp"
#include "faster/kpi/fusion.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace faster {

enum class Severity { Medium, Severe };
const char* to_string(Severity s);

struct AlertConfig {
    double z_medium = 3.0;
    double z_severe = 5.0;
    int persistence = 3;
};

struct AlertEvent {
    enum class Kind { Open, Escalate, Close };
    Kind kind = Kind::Open;
    std::string kpi;
    std::string station;
    int step = 0;
    Severity severity = Severity::Medium;
    double value = 0.0;
};

const char* to_string(AlertEvent::Kind k);

struct AlertResult {
    std::vector<AlertEvent> events;
    int unmonitored = 0; // steps skipped for a missing value or baseline
};

/// Walks one station's series. An alert opens on the step where the value has been
/// above the medium threshold for `persistence` consecutive steps (crossing step +
/// persistence - 1), with the highest threshold crossed in that run as severity. An
/// open alert escalates when the severe threshold is crossed later and closes on the
/// first step back below medium. Steps with a NaN value or threshold break runs and
/// are counted as unmonitored. An alert still open at the end gets no close event.
AlertResult detect_anomaly(const std::vector<double>& values, const std::vector<double>& medium,
                           const std::vector<double>& severe, const AlertConfig& config = {},
                           const std::string& kpi = "", const std::string& station = "");

struct Thresholds {
    std::vector<double> medium;
    std::vector<double> severe;
};

/// Calendar baseline + z * pooled residual std for every step of one station's row
/// on `date`. NaN where the baseline is missing.
Thresholds calendar_thresholds(const CalendarModel& model, const KpiGrid& grid, const std::string& station,
                               const std::string& date, const AlertConfig& config = {}, const std::string& event = "");

/// Runs detect_anomaly on every station row of the series.
AlertResult detect_series(const KpiSeries& series, const CalendarModel& model, const std::string& date,
                          const AlertConfig& config = {}, const std::string& event = "");

nlohmann::json to_json(const AlertEvent& e, const KpiGrid* grid = nullptr);
/// Appends one line per event.
void append_alert_log(std::ostream& out, const std::vector<AlertEvent>& events, const KpiGrid* grid = nullptr);

} // namespace faster
