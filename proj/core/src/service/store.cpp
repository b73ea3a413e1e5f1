#include "faster/service/store.hpp"

#include "faster/common/error.hpp"
#include "faster/common/hash.hpp"
#include "faster/common/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace faster {

namespace {

void check_name(const std::string& s, const char* what)
{
    require(!s.empty() && s.size() <= 128, std::string("invalid ") + what);
    for (char c : s)
        require(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.',
                std::string("invalid ") + what + " '" + s + "'");
    require(s != "." && s != "..", std::string("invalid ") + what);
}

} // namespace

ArtifactStore::ArtifactStore(std::filesystem::path root) : root_(std::move(root))
{
    std::filesystem::create_directories(root_);
}

std::mutex& ArtifactStore::lock_for(const std::string& key)
{
    std::lock_guard<std::mutex> g(table_mutex_);
    auto& slot = locks_[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

ArtifactRef ArtifactStore::put(const std::string& kind, const std::string& content, const std::string& ext)
{
    check_name(kind, "artifact kind");
    check_name(ext, "extension");
    ArtifactRef ref;
    ref.kind = kind;
    ref.hash = sha256_hex(content);
    ref.id = ref.hash.substr(0, 16);
    ref.path = root_ / kind / (ref.id + "." + ext);
    std::lock_guard<std::mutex> g(lock_for(kind + "/" + ref.id));
    if (!std::filesystem::exists(ref.path)) io::write_text_atomic(ref.path, content);
    return ref;
}

ArtifactRef ArtifactStore::put_json(const std::string& kind, const nlohmann::json& doc)
{
    return put(kind, io::canonical_dump(doc), "json");
}

std::optional<ArtifactRef> ArtifactStore::find(const std::string& kind, const std::string& id) const
{
    check_name(kind, "artifact kind");
    try {
        check_name(id, "artifact id");
    } catch (const ValidationError&) {
        return std::nullopt;
    }
    const auto dir = root_ / kind;
    if (!std::filesystem::is_directory(dir)) return std::nullopt;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().stem().string() != id) continue;
        const auto name = e.path().filename().string();
        if (name.find(".tmp.") != std::string::npos) continue;
        ArtifactRef ref{kind, id, sha256_hex(io::read_text(e.path())), e.path()};
        return ref;
    }
    return std::nullopt;
}

ArtifactRef ArtifactStore::get(const std::string& kind, const std::string& id) const
{
    auto r = find(kind, id);
    if (!r) throw NotFoundError(kind + " '" + id + "' not found");
    return *r;
}

std::string ArtifactStore::read(const ArtifactRef& ref) const { return io::read_text(ref.path); }

nlohmann::json ArtifactStore::read_json(const std::string& kind, const std::string& id) const
{
    return nlohmann::json::parse(read(get(kind, id)));
}

std::vector<ArtifactRef> ArtifactStore::list(const std::string& kind) const
{
    check_name(kind, "artifact kind");
    std::vector<ArtifactRef> out;
    const auto dir = root_ / kind;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename().string().find(".tmp.") != std::string::npos) continue;
        out.push_back({kind, e.path().stem().string(), sha256_hex(io::read_text(e.path())), e.path()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

void ArtifactStore::set_head(const std::string& kind, const std::string& name, const std::string& artifact_id)
{
    check_name(kind, "head kind");
    check_name(name, "head name");
    std::lock_guard<std::mutex> g(lock_for("heads/" + kind + "/" + name));
    auto history = head_history(kind, name).value_or(std::vector<std::string>{});
    history.push_back(artifact_id);
    io::write_text_atomic(root_ / "heads" / kind / (name + ".json"), nlohmann::json(history).dump());
}

std::optional<std::vector<std::string>> ArtifactStore::head_history(const std::string& kind, const std::string& name) const
{
    check_name(kind, "head kind");
    try {
        check_name(name, "head name");
    } catch (const ValidationError&) {
        return std::nullopt;
    }
    const auto path = root_ / "heads" / kind / (name + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    return io::read_json(path).get<std::vector<std::string>>();
}

void ArtifactStore::append_log(const std::string& name, const nlohmann::json& record)
{
    check_name(name, "log name");
    std::lock_guard<std::mutex> g(lock_for("logs/" + name));
    const auto path = root_ / "logs" / (name + ".jsonl");
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to " + path.string());
    out << io::canonical_dump(record) << "\n";
}

std::vector<nlohmann::json> ArtifactStore::read_log(const std::string& name) const
{
    check_name(name, "log name");
    std::vector<nlohmann::json> out;
    std::ifstream in(root_ / "logs" / (name + ".jsonl"));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(nlohmann::json::parse(line));
    return out;
}

} // namespace faster
