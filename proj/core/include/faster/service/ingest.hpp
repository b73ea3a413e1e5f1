#pragma once

#include "faster/service/store.hpp"

#include <json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace faster {

struct IngestReport {
    ArtifactRef dataset; // normalized JSONL, one canonical record per accepted row
    long rows = 0;
    long skipped = 0;
    std::vector<std::pair<int, std::string>> errors; // line number, message
};

/// Validates trip or trace JSONL and stores the accepted rows as a "trips" or "traces"
/// dataset. Strict mode throws ValidationError naming the first bad line; lenient mode
/// skips bad rows and counts them. Equal accepted content gives an equal dataset id.
IngestReport ingest_trips(ArtifactStore& store, std::istream& in, bool strict);
IngestReport ingest_traces(ArtifactStore& store, std::istream& in, bool strict);

nlohmann::json to_json(const IngestReport& report);

} // namespace faster
