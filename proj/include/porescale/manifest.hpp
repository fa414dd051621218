#pragma once

#include <map>
#include <string>

namespace porescale {

/// Per-experiment record of produced artifacts and their checksums, stored
/// as manifest.json in the output directory.
struct RunManifest {
    std::string config_checksum;
    std::map<std::string, std::string> artifacts; // relative path -> fnv1a64 hex
    std::map<std::string, std::string> notes;     // mesh/flow checksums, cache hits
    std::map<std::string, double> timings_ms;

    static RunManifest load(const std::string& dir); // empty when absent
    void save(const std::string& dir) const;

    void record(const std::string& dir, const std::string& relative_path);
    /// Checks that every listed artifact exists and matches its checksum.
    bool verify(const std::string& dir, std::string* first_mismatch = nullptr) const;
};

/// FNV-1a 64 checksum of a file's bytes, as hex; throws FormatError when the
/// file cannot be read.
std::string file_checksum(const std::string& path);

} // namespace porescale
