#include "faster/common/io.hpp"

#include "faster/common/error.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace faster::io {

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content)
{
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ostringstream tmp_name;
    tmp_name << path.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
             << "." << counter.fetch_add(1);
    const auto tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    const std::string text = read_text(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string canonical_dump(const nlohmann::json& doc)
{
    // nlohmann::json objects are std::map-backed, so keys are already sorted.
    return doc.dump();
}

int parse_time_of_day(const std::string& text)
{
    std::string clock = text;
    if (const auto pos = text.find('T'); pos != std::string::npos) clock = text.substr(pos + 1);
    // strip a trailing zone designator; all times are local to the scenario
    if (const auto pos = clock.find_first_of("Z+"); pos != std::string::npos) clock = clock.substr(0, pos);
    int h = 0, m = 0, s = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(clock);
    ss >> h >> c1 >> m;
    if (!ss || c1 != ':') throw ValidationError("invalid ISO-8601 time: " + text);
    if (ss >> c2) {
        if (c2 != ':' || !(ss >> s)) throw ValidationError("invalid ISO-8601 time: " + text);
    }
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 60)
        throw ValidationError("time out of range: " + text);
    return h * 3600 + m * 60 + s;
}

int parse_step(const nlohmann::json& value, int origin_seconds, int dt_seconds)
{
    if (value.is_number_integer()) return value.get<int>();
    if (value.is_string()) {
        const int secs = parse_time_of_day(value.get<std::string>()) - origin_seconds;
        if (secs % dt_seconds != 0)
            throw ValidationError("time " + value.get<std::string>() + " is not aligned to the step size");
        return secs / dt_seconds;
    }
    throw ValidationError("expected integer step or ISO-8601 time");
}

} // namespace faster::io
