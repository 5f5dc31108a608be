#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "csk/error.hpp"

namespace csk {

/// INI-style experiment configuration:
///   [section] or [section.sub] headers, key = value lines, full-line
///   comments starting with # or ;. Keys before any header live in the ""
///   section. Every parse error and type error names the offending line.
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse_stream(std::istream& in, const std::string& origin = "<stream>") {
        ConfigFile cfg;
        cfg.origin_ = origin;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": empty section name");
                cfg.sections_[section];  // sections may be empty but must exist
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value, got \"" + t + "\"");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            auto& sec = cfg.sections_[section];
            const auto it = sec.find(key);
            if (it != sec.end())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key \"" +
                                  key + "\" (first set on line " +
                                  std::to_string(it->second.line) + ")");
            sec[key] = Entry{value, lineno};
            continue;
        }
        return cfg;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse_stream(in, path);
    }

    bool has_section(const std::string& section) const {
        return sections_.count(section) > 0;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::vector<std::string> section_names() const {
        std::vector<std::string> out;
        for (const auto& [name, _] : sections_) out.push_back(name);
        return out;
    }

    std::vector<std::string> keys(const std::string& section) const {
        std::vector<std::string> out;
        const auto s = sections_.find(section);
        if (s == sections_.end()) return out;
        for (const auto& [key, _] : s->second) out.push_back(key);
        return out;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        const Entry* e = find(section, key);
        return e ? e->value : fallback;
    }

    std::string require_string(const std::string& section, const std::string& key) const {
        const Entry* e = find(section, key);
        if (!e)
            throw ConfigError(origin_ + ": missing required key [" + section + "] " + key);
        return e->value;
    }

    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        return parse_int(*e, section, key);
    }

    std::size_t get_size(const std::string& section, const std::string& key,
                         std::size_t fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        const long long v = parse_int(*e, section, key);
        if (v < 0)
            throw ConfigError(where(*e, section, key) + ": must be non-negative, got " +
                              e->value);
        return static_cast<std::size_t>(v);
    }

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(e->value, &pos);
            if (pos != e->value.size()) throw std::invalid_argument("junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(where(*e, section, key) + ": not a number: \"" + e->value + "\"");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        const std::string& v = e->value;
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        throw ConfigError(where(*e, section, key) + ": not a boolean: \"" + v + "\"");
    }

    /// Comma-separated list of non-empty trimmed items.
    std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                      const std::vector<std::string>& fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        std::vector<std::string> out;
        std::istringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
        }
        if (out.empty())
            throw ConfigError(where(*e, section, key) + ": empty list");
        return out;
    }

    /// Strict-schema helper: every key in `section` must appear in `allowed`.
    void check_known(const std::string& section,
                     const std::vector<std::string>& allowed) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return;
        for (const auto& [key, entry] : s->second) {
            bool ok = false;
            for (const auto& a : allowed) ok = ok || a == key;
            if (!ok)
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) +
                                  ": unknown key \"" + key + "\" in [" + section + "]");
        }
    }

    const std::string& origin() const { return origin_; }

    /// Canonical text rendering (sorted sections and keys), used for hashing.
    std::string canonical() const {
        std::ostringstream os;
        for (const auto& [name, entries] : sections_) {
            os << "[" << name << "]\n";
            for (const auto& [key, e] : entries) os << key << "=" << e.value << "\n";
        }
        return os.str();
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    const Entry* find(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    std::string where(const Entry& e, const std::string& section, const std::string& key) const {
        return origin_ + ":" + std::to_string(e.line) + ": [" + section + "] " + key;
    }

    long long parse_int(const Entry& e, const std::string& section,
                        const std::string& key) const {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("junk");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(where(e, section, key) + ": not an integer: \"" + e.value + "\"");
        }
    }

    std::string origin_ = "<empty>";
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// FNV-1a over the canonical rendering; stable across reruns of one config.
inline std::string config_hash(const ConfigFile& cfg) {
    const std::string text = cfg.canonical();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace csk
