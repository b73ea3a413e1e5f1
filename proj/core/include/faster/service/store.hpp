#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace faster {

struct ArtifactRef {
    std::string kind;
    std::string id;   // first 16 hex digits of the hash
    std::string hash; // sha256 of the stored bytes
    std::filesystem::path path;
};

/// Content-addressed artifacts under root/<kind>/<id>.<ext>. Artifacts are written once
/// (write-then-rename) and never modified. Named heads (root/heads/<kind>/<name>) point at
/// the current artifact of a mutable object such as a scenario with its revisions.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    ArtifactRef put(const std::string& kind, const std::string& content, const std::string& ext = "json");
    /// Stores the canonical serialization (sorted keys, no whitespace).
    ArtifactRef put_json(const std::string& kind, const nlohmann::json& doc);

    std::optional<ArtifactRef> find(const std::string& kind, const std::string& id) const;
    /// Throws NotFoundError.
    ArtifactRef get(const std::string& kind, const std::string& id) const;
    std::string read(const ArtifactRef& ref) const;
    nlohmann::json read_json(const std::string& kind, const std::string& id) const;
    /// Refs of one kind, ordered by id.
    std::vector<ArtifactRef> list(const std::string& kind) const;

    /// Heads: history of artifact ids, newest last.
    void set_head(const std::string& kind, const std::string& name, const std::string& artifact_id);
    std::optional<std::vector<std::string>> head_history(const std::string& kind, const std::string& name) const;

    /// Appends a line to root/logs/<name>.jsonl.
    void append_log(const std::string& name, const nlohmann::json& record);
    std::vector<nlohmann::json> read_log(const std::string& name) const;

private:
    std::mutex& lock_for(const std::string& key);

    std::filesystem::path root_;
    mutable std::mutex table_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

} // namespace faster
