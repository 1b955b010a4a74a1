#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace neurodec {

// Flat `section.key = value` configuration document. UTF-8, '#' comments,
// blank lines ignored. Values stay strings until a typed getter parses them;
// unknown keys are rejected against a registry so typos fail loudly.
class FlatConfig {
public:
    FlatConfig() = default;

    static FlatConfig parse_file(const std::filesystem::path& path);
    static FlatConfig parse_text(const std::string& text, const std::string& origin = "<inline>");

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_i64(const std::string& key, int64_t fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    double get_f64(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Semicolon-separated unsigned integers, e.g. "470;512;430".
    std::vector<uint64_t> get_u64_list(const std::string& key,
                                       const std::vector<uint64_t>& fallback) const;

    // Throws ConfigError naming the first key not present in `known`.
    void validate_known(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    // The exact bytes the config was parsed from, for verbatim echoes.
    const std::string& raw_text() const { return raw_text_; }

private:
    std::map<std::string, std::string> values_;
    std::string raw_text_;
};

}  // namespace neurodec
