#include "porescale/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "porescale/errors.hpp"
#include "porescale/io_util.hpp"

namespace porescale {

using nlohmann::json;

std::string file_checksum(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw FormatError("checksum: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return to_hex(fnv1a64(ss.str()));
}

RunManifest RunManifest::load(const std::string& dir) {
    RunManifest m;
    std::ifstream f(dir + "/manifest.json");
    if (!f) return m;
    json j;
    try {
        f >> j;
    } catch (const json::parse_error&) {
        return m; // corrupt manifest: start fresh
    }
    m.config_checksum = j.value("config_checksum", "");
    if (j.contains("artifacts"))
        for (const auto& [k, v] : j["artifacts"].items())
            m.artifacts[k] = v.get<std::string>();
    if (j.contains("notes"))
        for (const auto& [k, v] : j["notes"].items())
            m.notes[k] = v.get<std::string>();
    if (j.contains("timings_ms"))
        for (const auto& [k, v] : j["timings_ms"].items())
            m.timings_ms[k] = v.get<double>();
    return m;
}

void RunManifest::save(const std::string& dir) const {
    json j;
    j["config_checksum"] = config_checksum;
    j["artifacts"] = json::object();
    for (const auto& [k, v] : artifacts)
        j["artifacts"][k] = v;
    j["notes"] = json::object();
    for (const auto& [k, v] : notes)
        j["notes"][k] = v;
    j["timings_ms"] = json::object();
    for (const auto& [k, v] : timings_ms)
        j["timings_ms"][k] = v;
    std::ofstream f(dir + "/manifest.json");
    if (!f)
        throw FormatError("manifest: cannot write to " + dir);
    f << j.dump(2) << "\n";
}

void RunManifest::record(const std::string& dir, const std::string& relative_path) {
    artifacts[relative_path] = file_checksum(dir + "/" + relative_path);
}

bool RunManifest::verify(const std::string& dir, std::string* first_mismatch) const {
    for (const auto& [rel, sum] : artifacts) {
        std::string actual;
        try {
            actual = file_checksum(dir + "/" + rel);
        } catch (const FormatError&) {
            if (first_mismatch) *first_mismatch = rel + " (missing)";
            return false;
        }
        if (actual != sum) {
            if (first_mismatch) *first_mismatch = rel;
            return false;
        }
    }
    return true;
}

} // namespace porescale
