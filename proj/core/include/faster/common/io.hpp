#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace faster::io {

std::string read_text(const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames over the target so readers never
/// observe a partially written file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::json read_json(const std::filesystem::path& path);

/// Canonical serialization used for hashing: sorted keys, no whitespace.
std::string canonical_dump(const nlohmann::json& doc);

/// Parses "HH:MM", "HH:MM:SS" or a full "YYYY-MM-DDTHH:MM:SS" stamp and returns
/// seconds since midnight of the time-of-day part. Throws ValidationError.
int parse_time_of_day(const std::string& text);

/// Reads an integer step, or converts an ISO-8601 time to a step relative to
/// `origin_seconds` at resolution `dt_seconds`.
int parse_step(const nlohmann::json& value, int origin_seconds, int dt_seconds);

} // namespace faster::io
