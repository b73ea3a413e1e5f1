#include "faster/kpi/calendar.hpp"

#include "faster/common/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

namespace faster {

int parse_date(const std::string& text)
{
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 || text.size() != 10)
        throw ValidationError("date '" + text + "' is not YYYY-MM-DD");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ValidationError("date '" + text + "' does not exist");
    return static_cast<int>(std::chrono::sys_days(ymd).time_since_epoch().count());
}

int day_of_week(int days)
{
    const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{days}}};
    return static_cast<int>((wd.c_encoding() + 6) % 7);
}

std::string format_date(int days)
{
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

namespace {

int day_class(int dow) { return dow >= 5 ? 1 : 0; }

} // namespace

std::optional<double> CalendarModel::predict(const std::string& date, const std::string& station, int bin,
                                             const std::string& event) const
{
    if (bin < 0 || bin >= bins) return std::nullopt;
    auto l1 = level1.find(station);
    if (l1 == level1.end()) return std::nullopt;
    const int dow = day_of_week(parse_date(date));
    double v = l1->second[day_class(dow)][bin] + level2.at(station)[dow][bin];
    if (!event.empty())
        if (auto e = level3.find(event); e != level3.end())
            if (auto s = e->second.find(station); s != e->second.end()) v += s->second[bin];
    return v;
}

CalendarModel fit_calendar(const std::vector<CalendarDay>& history)
{
    require(!history.empty(), "empty calendar history");
    std::set<int> dates;
    CalendarModel m;
    m.bins = -1;
    std::set<std::string> stations;
    for (const auto& day : history) {
        dates.insert(parse_date(day.date));
        for (const auto& [s, v] : day.values) {
            if (m.bins < 0) m.bins = static_cast<int>(v.size());
            require(static_cast<int>(v.size()) == m.bins, "days differ in number of time-of-day bins");
            for (double x : v) require(std::isfinite(x), "non-finite calendar value");
            stations.insert(s);
        }
    }
    require(m.bins > 0, "calendar history has no values");
    require(dates.size() >= 14, "calendar fit needs at least two weeks of history");

    const auto B = static_cast<std::size_t>(m.bins);
    for (const auto& s : stations) {
        std::vector<std::vector<double>> sum(7, std::vector<double>(B, 0.0));
        std::vector<int> count(7, 0);
        for (const auto& day : history) {
            if (!day.event.empty()) continue;
            auto it = day.values.find(s);
            if (it == day.values.end()) continue;
            const int dow = day_of_week(parse_date(day.date));
            for (std::size_t b = 0; b < B; ++b) sum[dow][b] += it->second[b];
            ++count[dow];
        }
        for (int d = 0; d < 7; ++d)
            require(count[d] > 0, "station " + s + " has no ordinary day for every day of the week");
        auto& l1 = m.level1[s];
        auto& l2 = m.level2[s];
        l1.assign(2, std::vector<double>(B, 0.0));
        l2.assign(7, std::vector<double>(B, 0.0));
        for (int d = 0; d < 7; ++d)
            for (std::size_t b = 0; b < B; ++b) {
                l2[d][b] = sum[d][b] / count[d];
                l1[day_class(d)][b] += l2[d][b] / (day_class(d) ? 2.0 : 5.0);
            }
        for (int d = 0; d < 7; ++d)
            for (std::size_t b = 0; b < B; ++b) l2[d][b] -= l1[day_class(d)][b];
    }

    std::map<std::string, std::map<std::string, std::pair<std::vector<double>, int>>> ev;
    std::map<std::string, std::pair<double, long>> sq;
    std::map<std::string, std::set<int>> seen_dows;
    for (const auto& day : history) {
        const int dow = day_of_week(parse_date(day.date));
        for (const auto& [s, v] : day.values) {
            const auto& base1 = m.level1.at(s)[day_class(dow)];
            const auto& base2 = m.level2.at(s)[dow];
            if (day.event.empty()) {
                auto& acc = sq[s];
                seen_dows[s].insert(dow);
                for (std::size_t b = 0; b < B; ++b) {
                    const double r = v[b] - base1[b] - base2[b];
                    acc.first += r * r;
                    ++acc.second;
                }
            } else {
                auto& acc = ev[day.event][s];
                if (acc.first.empty()) acc.first.assign(B, 0.0);
                for (std::size_t b = 0; b < B; ++b) acc.first[b] += v[b] - base1[b] - base2[b];
                ++acc.second;
            }
        }
    }
    for (auto& [tag, per] : ev)
        for (auto& [s, acc] : per) {
            auto& out = m.level3[tag][s];
            out = acc.first;
            for (double& x : out) x /= acc.second;
        }
    // one fitted mean per (weekday, bin) comes out of the degrees of freedom
    for (const auto& [s, acc] : sq) {
        const long fitted = static_cast<long>(seen_dows[s].size() * B);
        const long dof = acc.second > fitted ? acc.second - fitted : acc.second;
        m.residual_std[s] = std::sqrt(acc.first / static_cast<double>(dof));
    }
    return m;
}

nlohmann::json to_json(const CalendarModel& m)
{
    return {{"kind", "calendar_model"}, {"bins", m.bins},          {"level1", m.level1},
            {"level2", m.level2},        {"level3", m.level3},      {"residual_std", m.residual_std}};
}

CalendarModel calendar_from_json(const nlohmann::json& j)
{
    try {
        CalendarModel m;
        m.bins = j.at("bins").get<int>();
        j.at("level1").get_to(m.level1);
        j.at("level2").get_to(m.level2);
        j.at("level3").get_to(m.level3);
        j.at("residual_std").get_to(m.residual_std);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("calendar model document: ") + e.what());
    }
}

CalendarDay calendar_day_from_json(const nlohmann::json& j)
{
    try {
        CalendarDay d;
        d.date = j.at("date").get<std::string>();
        parse_date(d.date);
        d.event = j.value("event", std::string{});
        j.at("values").get_to(d.values);
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("calendar day: ") + e.what());
    }
}

nlohmann::json to_json(const CalendarDay& d)
{
    nlohmann::json j{{"date", d.date}, {"values", d.values}};
    if (!d.event.empty()) j["event"] = d.event;
    return j;
}

} // namespace faster
