#pragma once

// Line-oriented configuration with nested [section.subsection] headers.
// Values are plain strings; typed getters parse on demand.  parse and
// serialize round-trip structurally, which keeps experiment logs diffable.

#include "dioph/big.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dioph {

class Config {
  public:
    struct Section {
        std::string name;  // "" is the top level
        std::vector<std::pair<std::string, std::string>> kv;
        bool operator==(const Section&) const = default;
    };

    static Config parse(const std::string& text);
    static Config load_file(const std::string& path);
    std::string serialize() const;

    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key, long fallback) const;
    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    Rat get_rat(const std::string& section, const std::string& key) const;
    Rat get_rat_or(const std::string& section, const std::string& key, const Rat& fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    const std::vector<Section>& sections() const { return sections_; }
    bool operator==(const Config&) const = default;

  private:
    std::vector<Section> sections_{Section{"", {}}};
};

// "3/4", "-2", "0.65" (decimal strings parse to exact rationals).
Rat parse_rational(const std::string& text);

}  // namespace dioph
