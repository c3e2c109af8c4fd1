#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace sclab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Record of one command's outputs. Paths are relative to the output directory.
class Manifest {
public:
    Manifest(std::string dir, std::string command);

    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void set_config(nlohmann::ordered_json config) { config_ = std::move(config); }
    /// Hashes `relative` (under the directory) and lists it.
    void add_file(const std::string& relative);
    /// Writes manifest.json into the directory.
    void write() const;

    [[nodiscard]] const std::string& dir() const { return dir_; }
    [[nodiscard]] std::string path(const std::string& relative) const;

private:
    std::string dir_;
    std::string command_;
    std::uint64_t seed_ = 0;
    nlohmann::ordered_json config_;
    std::vector<std::pair<std::string, std::string>> files_;  // (path, sha256)
};

struct VerifyResult {
    std::vector<std::string> ok;
    std::vector<std::string> mismatched;  // hash differs or file missing
};

/// Re-hashes every file listed in dir/manifest.json. Throws DataError when the
/// manifest itself is missing or malformed.
VerifyResult verify_manifest(const std::string& dir);

}  // namespace sclab
