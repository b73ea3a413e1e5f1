#include "faster/sim/metrics.hpp"

#include "faster/common/error.hpp"
#include "faster/common/io.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace faster {

double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q)
{
    require(p.size() == q.size(), "histograms differ in bin count");
    const double sp = std::accumulate(p.begin(), p.end(), 0.0);
    const double sq = std::accumulate(q.begin(), q.end(), 0.0);
    require(sp > 0.0 && sq > 0.0, "empty histogram");
    double bc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        require(p[i] >= 0.0 && q[i] >= 0.0, "negative histogram mass");
        bc += std::sqrt((p[i] / sp) * (q[i] / sq));
    }
    return bc;
}

std::vector<double> histogram(const std::vector<double>& values, double bin_width, int bins)
{
    require(bin_width > 0.0 && bins >= 1, "bad histogram binning");
    std::vector<double> h(bins, 0.0);
    for (double v : values) {
        long b = static_cast<long>(std::floor(std::max(0.0, v) / bin_width));
        h[std::min<long>(b, bins - 1)] += 1.0;
    }
    return h;
}

TravelTimeError travel_time_error(const OdTravelTimes& simulated, const OdTravelTimes& observed,
                                  double bin_width_minutes)
{
    TravelTimeError out;
    double abs_sum = 0.0, rel_sum = 0.0, bc_sum = 0.0;
    int rel_pairs = 0;
    for (const auto& [key, sim] : simulated) {
        auto it = observed.find(key);
        if (it == observed.end() || sim.empty() || it->second.empty()) continue;
        const auto& obs = it->second;
        const double ms = std::accumulate(sim.begin(), sim.end(), 0.0) / static_cast<double>(sim.size());
        const double mo = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
        abs_sum += std::abs(ms - mo);
        if (mo > 0.0) {
            rel_sum += std::abs(ms - mo) / mo;
            ++rel_pairs;
        }
        double hi = 0.0;
        for (double v : sim) hi = std::max(hi, v);
        for (double v : obs) hi = std::max(hi, v);
        const int bins = static_cast<int>(std::floor(hi / bin_width_minutes)) + 1;
        bc_sum += bhattacharyya(histogram(sim, bin_width_minutes, bins), histogram(obs, bin_width_minutes, bins));
        ++out.pairs;
    }
    if (out.pairs == 0) throw ValidationError("no OD pairs in common");
    out.mae_minutes = abs_sum / out.pairs;
    out.mre_percent = rel_pairs ? 100.0 * rel_sum / rel_pairs : 0.0;
    out.mean_bc = bc_sum / out.pairs;
    return out;
}

OdTravelTimes od_travel_times(const SimMetrics& metrics, const std::vector<Commodity>& demand, int dt_seconds)
{
    OdTravelTimes out;
    if (!metrics.travel_times) return out;
    const double minutes = dt_seconds / 60.0;
    for (const auto& g : *metrics.travel_times) {
        if (g.arrival < 0) continue;
        const auto& c = demand.at(g.commodity);
        auto& v = out[{c.origin, c.destination}];
        v.insert(v.end(), g.count, g.travel_time * minutes);
    }
    return out;
}

namespace {

std::filesystem::path sibling(const std::filesystem::path& path, const std::string& family)
{
    auto name = path.stem().string() + "." + family + ".csv";
    return path.parent_path() / name;
}

} // namespace

std::vector<std::filesystem::path> write_metrics_csv(const SimMetrics& metrics, const std::vector<Commodity>& demand,
                                                     const Network& network, const std::filesystem::path& path)
{
    std::vector<std::filesystem::path> written;
    {
        std::ostringstream os;
        os << "commodity,origin,destination,start,count,arrival,travel_time,stranded\n";
        if (metrics.travel_times)
            for (const auto& g : *metrics.travel_times) {
                const auto& c = demand.at(g.commodity);
                os << c.id << ',' << c.origin << ',' << c.destination << ',' << g.start << ',' << g.count << ','
                   << g.arrival << ',' << g.travel_time << ',' << (g.stranded ? 1 : 0) << '\n';
            }
        io::write_text_atomic(path, os.str());
        written.push_back(path);
    }
    if (metrics.queue_lengths) {
        std::ostringstream os;
        os << "station,step,queue_length\n";
        const auto& q = *metrics.queue_lengths;
        for (std::size_t s = 0; s < q.size(); ++s)
            for (std::size_t t = 0; t < q[s].size(); ++t)
                os << network.stations()[s].id << ',' << t << ',' << q[s][t] << '\n';
        written.push_back(sibling(path, "queues"));
        io::write_text_atomic(written.back(), os.str());
    }
    if (metrics.train_loads) {
        std::ostringstream os;
        os << "line,run,position,step,load\n";
        for (const auto& r : *metrics.train_loads)
            os << network.lines()[r.line].id << ',' << r.run << ',' << r.position << ',' << r.step << ',' << r.load
               << '\n';
        written.push_back(sibling(path, "loads"));
        io::write_text_atomic(written.back(), os.str());
    }
    if (metrics.boardings) {
        std::ostringstream os;
        os << "line,run,position,step,boarded,denied\n";
        for (const auto& r : *metrics.boardings)
            os << network.lines()[r.line].id << ',' << r.run << ',' << r.position << ',' << r.step << ','
               << r.boarded << ',' << r.denied << '\n';
        written.push_back(sibling(path, "boardings"));
        io::write_text_atomic(written.back(), os.str());
    }
    return written;
}

nlohmann::json summary_json(const SimMetrics& metrics)
{
    nlohmann::json j;
    j["horizon"] = metrics.horizon;
    j["injected"] = metrics.injected;
    j["arrived"] = metrics.arrived;
    j["in_system"] = metrics.in_system;
    j["stranded"] = metrics.stranded;
    j["reroutes"] = metrics.reroutes;
    j["total_travel_time"] = metrics.total_travel_time();
    if (metrics.boardings) {
        long denied = 0;
        for (const auto& r : *metrics.boardings) denied += r.denied;
        j["denied"] = denied;
    }
    if (metrics.queue_lengths) {
        int peak = 0;
        for (const auto& row : *metrics.queue_lengths)
            for (int v : row) peak = std::max(peak, v);
        j["peak_queue"] = peak;
    }
    return j;
}

} // namespace faster
