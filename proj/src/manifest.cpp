#include "dioph/manifest.hpp"

#include <openssl/evp.h>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dioph {

std::string sha256_hex(const void* data, std::size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int dlen = 0;
    if (!EVP_Digest(data, len, digest, &dlen, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failure");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(dlen * 2);
    for (unsigned int i = 0; i < dlen; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace {

// advisory file lock, shared or exclusive, released on destruction
class FileLock {
  public:
    FileLock(const std::filesystem::path& p, bool exclusive) {
        fd_ = ::open(p.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw std::runtime_error("cannot open lock file " + p.string());
        if (flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
            ::close(fd_);
            throw std::runtime_error("cannot lock " + p.string());
        }
    }
    ~FileLock() {
        if (fd_ >= 0) {
            flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

  private:
    int fd_ = -1;
};

}  // namespace

CacheStore::CacheStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path CacheStore::path_for(const std::string& key) const {
    return dir_ / (sha256_hex(key) + ".blob");
}

std::optional<std::vector<unsigned char>> CacheStore::load(const std::string& key) const {
    FileLock lock(dir_ / "lock", false);
    auto p = path_for(key);
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    return std::vector<unsigned char>(s.begin(), s.end());
}

void CacheStore::store(const std::string& key, const std::vector<unsigned char>& bytes) const {
    FileLock lock(dir_ / "lock", true);
    atomic_write(path_for(key), std::string(bytes.begin(), bytes.end()));
}

ManifestBuilder::ManifestBuilder(std::string command) : t0_(std::chrono::steady_clock::now()) {
    j_["manifest_version"] = 1;
    j_["command"] = std::move(command);
    j_["code_version"] = "";  // set by the command layer via version.hpp
    j_["checks"] = nlohmann::json::array();
    j_["outputs"] = nlohmann::json::array();
    j_["hypotheses"] = nlohmann::json::object();
    j_["stats"] = nlohmann::json::object();
}

void ManifestBuilder::set_config_echo(const std::string& serialized_config) {
    j_["config"] = serialized_config;
}

void ManifestBuilder::set_seed(std::uint64_t seed) { j_["seed"] = seed; }

void ManifestBuilder::add_output(const std::filesystem::path& file) {
    j_["outputs"].push_back({{"file", file.filename().string()}, {"sha256", sha256_file(file)}});
}

void ManifestBuilder::add_check(const std::string& name, bool pass, const std::string& details) {
    j_["checks"].push_back({{"name", name}, {"pass", pass}, {"details", details}});
}

void ManifestBuilder::add_flag(const std::string& name, bool value) {
    j_["hypotheses"][name] = value;
}

void ManifestBuilder::add_stat(const std::string& name, double value) { j_["stats"][name] = value; }

void ManifestBuilder::add_stat_text(const std::string& name, const std::string& value) {
    j_["stats"][name] = value;
}

bool ManifestBuilder::all_checks_pass() const {
    for (const auto& c : j_["checks"])
        if (!c["pass"].get<bool>()) return false;
    return true;
}

std::filesystem::path ManifestBuilder::write(const std::filesystem::path& out_dir) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0_)
                  .count();
    j_["wall_ms"] = ms;
    std::filesystem::create_directories(out_dir);
    auto path = out_dir / "manifest.json";
    atomic_write(path, j_.dump(2) + "\n");
    return path;
}

}  // namespace dioph
