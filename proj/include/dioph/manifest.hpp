#pragma once

// Result emission: atomic file writes, content hashing, a hash-keyed blob
// cache with advisory locking, and the JSON run manifest.

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dioph {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::filesystem::path& p);

// write-to-temp + rename: interrupted runs never leave a partial file
// visible under the final name.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

class CacheStore {
  public:
    explicit CacheStore(std::filesystem::path dir);

    // key is arbitrary text; blobs are stored under its sha256
    std::optional<std::vector<unsigned char>> load(const std::string& key) const;
    void store(const std::string& key, const std::vector<unsigned char>& bytes) const;
    std::filesystem::path path_for(const std::string& key) const;

  private:
    std::filesystem::path dir_;
};

struct ManifestCheck {
    std::string name;
    bool pass = false;
    std::string details;
};

class ManifestBuilder {
  public:
    explicit ManifestBuilder(std::string command);

    void set_config_echo(const std::string& serialized_config);
    void set_seed(std::uint64_t seed);
    void add_output(const std::filesystem::path& file);  // hashes the file
    void add_check(const std::string& name, bool pass, const std::string& details = "");
    void add_flag(const std::string& name, bool value);  // hypothesis flags
    void add_stat(const std::string& name, double value);
    void add_stat_text(const std::string& name, const std::string& value);

    bool all_checks_pass() const;
    // finalizes wall time and writes <out>/manifest.json atomically
    std::filesystem::path write(const std::filesystem::path& out_dir);
    nlohmann::json& json() { return j_; }

  private:
    nlohmann::json j_;
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace dioph
