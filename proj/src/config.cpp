#include "neurodec/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "neurodec/errors.hpp"

namespace neurodec {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

FlatConfig FlatConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path.string());
}

FlatConfig FlatConfig::parse_text(const std::string& text, const std::string& origin) {
    FlatConfig cfg;
    cfg.raw_text_ = text;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'section.key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find('.') == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": keys must look like 'section.key' (got '" + key + "')");
        cfg.values_[key] = value;
    }
    return cfg;
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int64_t FlatConfig::get_i64(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    int64_t v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
    return v;
}

uint64_t FlatConfig::get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    uint64_t v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "': '" + s + "' is not a non-negative integer");
    return v;
}

double FlatConfig::get_f64(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + it->second + "' is not a number");
    }
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<uint64_t> FlatConfig::get_u64_list(const std::string& key,
                                               const std::vector<uint64_t>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<uint64_t> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        uint64_t v = 0;
        auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw ConfigError("config key '" + key + "': bad list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void FlatConfig::validate_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
}

}  // namespace neurodec
