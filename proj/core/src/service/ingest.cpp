#include "faster/service/ingest.hpp"

#include "faster/chmm/trip.hpp"
#include "faster/common/io.hpp"
#include "faster/dsg/features.hpp"

namespace faster {

IngestReport ingest_trips(ArtifactStore& store, std::istream& in, bool strict)
{
    const auto log = read_trips_jsonl(in, strict);
    IngestReport r;
    std::string body;
    for (const auto& t : log.trips) body += io::canonical_dump(to_json(t)) + "\n";
    r.rows = static_cast<long>(log.trips.size());
    r.skipped = static_cast<long>(log.errors.size());
    for (const auto& e : log.errors) r.errors.emplace_back(e.line, e.message);
    r.dataset = store.put("trips", body, "jsonl");
    return r;
}

IngestReport ingest_traces(ArtifactStore& store, std::istream& in, bool strict)
{
    IngestReport r;
    const auto traces = read_traces_jsonl(in, strict, &r.errors);
    std::string body;
    for (const auto& t : traces) {
        const nlohmann::json doc{{"station", t.station},
                                 {"device", t.trace.device},
                                 {"first_seen", t.trace.first_seen},
                                 {"last_seen", t.trace.last_seen}};
        body += io::canonical_dump(doc) + "\n";
    }
    r.rows = static_cast<long>(traces.size());
    r.skipped = static_cast<long>(r.errors.size());
    r.dataset = store.put("traces", body, "jsonl");
    return r;
}

nlohmann::json to_json(const IngestReport& r)
{
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& [line, msg] : r.errors) errors.push_back({{"line", line}, {"message", msg}});
    return {{"dataset_id", r.dataset.id},
            {"kind", r.dataset.kind},
            {"hash", r.dataset.hash},
            {"rows", r.rows},
            {"skipped", r.skipped},
            {"errors", errors}};
}

} // namespace faster
