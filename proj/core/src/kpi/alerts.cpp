#include "faster/kpi/alerts.hpp"

#include "faster/common/error.hpp"

#include <cmath>

namespace faster {

const char* to_string(Severity s)
{
    return s == Severity::Severe ? "severe" : "medium";
}

const char* to_string(AlertEvent::Kind k)
{
    switch (k) {
    case AlertEvent::Kind::Open: return "open";
    case AlertEvent::Kind::Escalate: return "escalate";
    case AlertEvent::Kind::Close: return "close";
    }
    return "open";
}

AlertResult detect_anomaly(const std::vector<double>& values, const std::vector<double>& medium,
                           const std::vector<double>& severe, const AlertConfig& config, const std::string& kpi,
                           const std::string& station)
{
    require(values.size() == medium.size() && values.size() == severe.size(), "series and thresholds differ in length");
    require(config.persistence >= 1, "persistence must be >= 1");
    AlertResult out;
    int run = 0;
    bool run_severe = false;
    bool open = false;
    Severity level = Severity::Medium;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int step = static_cast<int>(i);
        const double v = values[i];
        if (std::isnan(v) || std::isnan(medium[i]) || std::isnan(severe[i])) {
            ++out.unmonitored;
            run = 0;
            run_severe = false;
            continue;
        }
        const bool above = v > medium[i];
        const bool above_severe = v > severe[i];
        if (open) {
            if (!above) {
                out.events.push_back({AlertEvent::Kind::Close, kpi, station, step, level, v});
                open = false;
                run = 0;
                run_severe = false;
            } else if (above_severe && level == Severity::Medium) {
                level = Severity::Severe;
                out.events.push_back({AlertEvent::Kind::Escalate, kpi, station, step, level, v});
            }
            continue;
        }
        if (!above) {
            run = 0;
            run_severe = false;
            continue;
        }
        ++run;
        run_severe = run_severe || above_severe;
        if (run >= config.persistence) {
            open = true;
            level = run_severe ? Severity::Severe : Severity::Medium;
            out.events.push_back({AlertEvent::Kind::Open, kpi, station, step, level, v});
        }
    }
    return out;
}

Thresholds calendar_thresholds(const CalendarModel& model, const KpiGrid& grid, const std::string& station,
                               const std::string& date, const AlertConfig& config, const std::string& event)
{
    Thresholds t;
    t.medium.assign(static_cast<std::size_t>(grid.steps), std::nan(""));
    t.severe = t.medium;
    auto sd = model.residual_std.find(station);
    if (sd == model.residual_std.end() || model.bins <= 0) return t;
    for (int k = 0; k < grid.steps; ++k) {
        double tod = std::fmod(grid.time_of(k), 86400.0);
        if (tod < 0) tod += 86400.0;
        const int bin = static_cast<int>(tod / model.bin_seconds());
        if (auto base = model.predict(date, station, bin, event)) {
            t.medium[k] = *base + config.z_medium * sd->second;
            t.severe[k] = *base + config.z_severe * sd->second;
        }
    }
    return t;
}

AlertResult detect_series(const KpiSeries& series, const CalendarModel& model, const std::string& date,
                          const AlertConfig& config, const std::string& event)
{
    AlertResult out;
    for (std::size_t st = 0; st < series.grid.stations.size(); ++st) {
        const auto& name = series.grid.stations[st];
        const auto th = calendar_thresholds(model, series.grid, name, date, config, event);
        std::vector<double> row(series.fused.begin() + static_cast<long>(series.grid.cell(st, 0)),
                                series.fused.begin() + static_cast<long>(series.grid.cell(st, 0)) + series.grid.steps);
        auto r = detect_anomaly(row, th.medium, th.severe, config, series.kpi, name);
        out.unmonitored += r.unmonitored;
        out.events.insert(out.events.end(), r.events.begin(), r.events.end());
    }
    return out;
}

nlohmann::json to_json(const AlertEvent& e, const KpiGrid* grid)
{
    nlohmann::json j{{"event", to_string(e.kind)}, {"kpi", e.kpi},    {"station", e.station},
                     {"step", e.step},             {"severity", to_string(e.severity)}, {"value", e.value}};
    if (grid) j["t"] = grid->time_of(e.step);
    return j;
}

void append_alert_log(std::ostream& out, const std::vector<AlertEvent>& events, const KpiGrid* grid)
{
    for (const auto& e : events) out << to_json(e, grid).dump() << '\n';
    out.flush();
}

} // namespace faster
