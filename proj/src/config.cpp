#include "dioph/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dioph {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Rat parse_rational(const std::string& text) {
    std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("config-invalid: empty rational");
    auto slash = t.find('/');
    if (slash != std::string::npos) {
        Rat r(t, 10);
        r.canonicalize();
        return r;
    }
    auto dot = t.find('.');
    if (dot == std::string::npos) return Rat(parse_int(t));
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    std::size_t frac_len = t.size() - dot - 1;
    Int num = parse_int(digits);  // sign travels with the numerator text
    Int den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return make_rat(num, den);
}

Config Config::parse(const std::string& text) {
    Config cfg;
    cfg.sections_.clear();
    cfg.sections_.push_back({"", {}});
    std::size_t current = 0;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("config-invalid: unterminated section at line " +
                                            std::to_string(lineno));
            std::string name = trim(t.substr(1, t.size() - 2));
            if (name.empty())
                throw std::invalid_argument("config-invalid: empty section name at line " +
                                            std::to_string(lineno));
            cfg.sections_.push_back({name, {}});
            current = cfg.sections_.size() - 1;
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config-invalid: expected key = value at line " +
                                        std::to_string(lineno));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config-invalid: empty key at line " +
                                        std::to_string(lineno));
        cfg.sections_[current].kv.emplace_back(std::move(key), std::move(value));
    }
    return cfg;
}

Config Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config-invalid: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::serialize() const {
    std::string out;
    for (const auto& sec : sections_) {
        if (!sec.name.empty()) {
            out += "[" + sec.name + "]\n";
        }
        for (const auto& [k, v] : sec.kv) {
            out += k + " = " + v + "\n";
        }
    }
    return out;
}

bool Config::has(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections_) {
        if (sec.name != section) continue;
        for (const auto& [k, v] : sec.kv)
            if (k == key) return true;
    }
    return false;
}

const std::string& Config::get(const std::string& section, const std::string& key) const {
    for (const auto& sec : sections_) {
        if (sec.name != section) continue;
        for (const auto& [k, v] : sec.kv)
            if (k == key) return v;
    }
    throw std::invalid_argument("config-invalid: missing [" + section + "] " + key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

long Config::get_long(const std::string& section, const std::string& key) const {
    return std::stol(get(section, key));
}

long Config::get_long_or(const std::string& section, const std::string& key,
                         long fallback) const {
    return has(section, key) ? std::stol(get(section, key)) : fallback;
}

std::uint64_t Config::get_u64_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    return has(section, key) ? std::stoull(get(section, key)) : fallback;
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? std::stod(get(section, key)) : fallback;
}

Rat Config::get_rat(const std::string& section, const std::string& key) const {
    return parse_rational(get(section, key));
}

Rat Config::get_rat_or(const std::string& section, const std::string& key,
                       const Rat& fallback) const {
    return has(section, key) ? parse_rational(get(section, key)) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config-invalid: boolean expected for " + key);
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& sec : sections_) {
        if (sec.name != section) continue;
        for (auto& [k, v] : sec.kv) {
            if (k == key) {
                v = value;
                return;
            }
        }
        sec.kv.emplace_back(key, value);
        return;
    }
    sections_.push_back({section, {{key, value}}});
}

}  // namespace dioph
