#include "ridgekit/manifest.hpp"

#include "ridgekit/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

namespace ridgekit {

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
        throw Error(ErrorCode::Io, "sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

Json RunManifest::to_json() const {
    Json j = {{"schema_version", kSchemaVersion}, {"kind", "run_manifest"}, {"tool", "ridgekit"}};
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["threads"] = threads;
    auto digests = [](const std::vector<std::filesystem::path>& files) {
        Json list = Json::array();
        for (const auto& f : files) list.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
        return list;
    };
    j["inputs"] = digests(inputs);
    j["outputs"] = digests(outputs);
    return j;
}

void RunManifest::write(const std::filesystem::path& path) const { write_text(path, to_json().dump(2) + "\n"); }

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    return std::filesystem::path(output.string() + ".manifest.json");
}

}  // namespace ridgekit
