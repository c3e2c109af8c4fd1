#include "sclab/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>

#include "sclab/error.hpp"

namespace sclab {

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw InvariantError("SHA-256 initialization failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

Manifest::Manifest(std::string dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory '" + dir_ + "': " + ec.message());
}

std::string Manifest::path(const std::string& relative) const {
    return (std::filesystem::path(dir_) / relative).string();
}

void Manifest::add_file(const std::string& relative) { files_.emplace_back(relative, sha256_file(path(relative))); }

void Manifest::write() const {
    nlohmann::ordered_json j;
    j["tool"] = "sclab";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["seed"] = seed_;
    if (!config_.is_null()) j["config"] = config_;
    j["files"] = nlohmann::ordered_json::array();
    for (const auto& [p, h] : files_) j["files"].push_back({{"path", p}, {"sha256", h}});
    std::ofstream out(path(kManifestName));
    if (!out) throw DataError("cannot write manifest in '" + dir_ + "'");
    out << j.dump(2) << '\n';
}

VerifyResult verify_manifest(const std::string& dir) {
    const auto mpath = (std::filesystem::path(dir) / kManifestName).string();
    std::ifstream in(mpath);
    if (!in) throw DataError("no manifest at '" + mpath + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + mpath + "': " + e.what());
    }
    if (!j.contains("files") || !j["files"].is_array()) throw DataError("'" + mpath + "': missing file list");
    VerifyResult r;
    for (const auto& f : j["files"]) {
        const auto rel = f.at("path").get<std::string>();
        const auto p = (std::filesystem::path(dir) / rel).string();
        const bool good = std::filesystem::exists(p) && sha256_file(p) == f.at("sha256").get<std::string>();
        (good ? r.ok : r.mismatched).push_back(rel);
    }
    return r;
}

}  // namespace sclab
