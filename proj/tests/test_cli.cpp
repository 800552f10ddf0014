#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dioph/commands.hpp"
#include "dioph/manifest.hpp"

using namespace dioph;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("dioph_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config round-trips structurally") {
    std::string text =
        "# experiment\n"
        "command = count\n"
        "seed = 42\n"
        "\n"
        "[sequence]\n"
        "kind = integer-power\n"
        "base = 2\n"
        "[psi.sub]\n"
        "coef = 1/2\n";
    Config a = Config::parse(text);
    Config b = Config::parse(a.serialize());
    CHECK(a == b);
    CHECK(a.get("", "command") == "count");
    CHECK(a.get_long("sequence", "base") == 2);
    CHECK(a.get_rat("psi.sub", "coef") == make_rat(1, 2));
    CHECK_THROWS_AS(a.get("sequence", "missing"), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("novalue\n"), std::invalid_argument);
}

TEST_CASE("decimal strings parse to exact rationals") {
    CHECK(parse_rational("0.65") == make_rat(13, 20));
    CHECK(parse_rational("-0.5") == make_rat(-1, 2));
    CHECK(parse_rational("3/4") == make_rat(3, 4));
    CHECK(parse_rational("7") == Rat(7));
}

TEST_CASE("sha256 and atomic writes") {
    // empty-input digest, pinned by the specification of SHA-256
    CHECK(sha256_hex(std::string{}) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    auto dir = fresh_dir("atomic");
    atomic_write(dir / "x.txt", "payload");
    CHECK(slurp(dir / "x.txt") == "payload");
    CHECK_FALSE(fs::exists(dir / "x.txt.tmp"));
}

TEST_CASE("cache store round-trips blobs under content keys") {
    auto dir = fresh_dir("cache");
    CacheStore cache(dir);
    CHECK_FALSE(cache.load("some-key").has_value());
    std::vector<unsigned char> blob{1, 2, 3, 250};
    cache.store("some-key", blob);
    auto back = cache.load("some-key");
    REQUIRE(back.has_value());
    CHECK(*back == blob);
}

TEST_CASE("scheme build: cold build then cache hit with identical bytes") {
    auto out = fresh_dir("schemecache");
    cli::RunOptions opts;
    opts.out_dir = out;
    opts.quiet = true;
    Config cfg = cli::default_config("scheme-build");

    bool hit1 = true, hit2 = false;
    auto s1 = cli::scheme_from_config(cfg, opts, &hit1);
    auto s2 = cli::scheme_from_config(cfg, opts, &hit2);
    CHECK_FALSE(hit1);
    CHECK(hit2);
    CHECK(kaufman::serialize_scheme(s1) == kaufman::serialize_scheme(s2));

    // corrupt the stored blob: the mismatch must be loud, not silent
    CacheStore cache(out / "cache");
    auto key = kaufman::scheme_cache_key(s1);
    auto blob = cache.load(key);
    REQUIRE(blob.has_value());
    (*blob)[blob->size() / 2] ^= 0x40;
    cache.store(key, *blob);
    CHECK_THROWS(cli::scheme_from_config(cfg, opts));
}

TEST_CASE("count command: CSV schema and byte-identical reruns") {
    auto out1 = fresh_dir("count1");
    auto out2 = fresh_dir("count2");
    Config cfg = cli::default_config("count");
    cfg.set("experiment", "n-max", "4096");
    cfg.set("experiment", "samples", "30");

    cli::RunOptions opts;
    opts.quiet = true;
    opts.threads = 2;
    opts.out_dir = out1;
    CHECK(cli::run(cfg, opts) == 0);
    opts.out_dir = out2;
    opts.threads = 1;  // thread count must not affect bytes
    CHECK(cli::run(cfg, opts) == 0);

    std::string csv1 = slurp(out1 / "count.csv");
    CHECK(csv1 == slurp(out2 / "count.csv"));
    CHECK(csv1.rfind("N,sample_id,R,Psi,norm_err\n", 0) == 0);

    // manifest references the CSV by hash
    auto manifest = nlohmann::json::parse(slurp(out1 / "manifest.json"));
    CHECK(manifest["outputs"][0]["file"] == "count.csv");
    CHECK(manifest["outputs"][0]["sha256"].get<std::string>() == sha256_hex(csv1));
    CHECK(manifest["manifest_version"] == 1);
}

TEST_CASE("cf-check and dims commands run clean") {
    auto out = fresh_dir("cfcheck");
    cli::RunOptions opts;
    opts.out_dir = out;
    opts.quiet = true;
    Config cfg;
    cfg.set("", "command", "cf-check");
    cfg.set("cf", "words", "500");
    CHECK(cli::run(cfg, opts) == 0);

    Config dims;
    dims.set("", "command", "dims");
    CHECK(cli::run(dims, opts) == 0);
    CHECK(fs::exists(out / "dims.json"));

    Config bad;
    bad.set("", "command", "no-such-command");
    CHECK_THROWS_AS(cli::run(bad, opts), std::invalid_argument);
}
