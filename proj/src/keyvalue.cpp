#include "lpwasim/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lpwasim {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

KeyValueFile KeyValueFile::parse_string(const std::string& text, const std::string& origin) {
    KeyValueFile kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (kv.values_.count(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv.values_[key] = value;
        kv.consumed_[key] = false;
    }
    return kv;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) != 0; }

std::string KeyValueFile::take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    consumed_[key] = true;
    return it->second;
}

std::string KeyValueFile::get_string(const std::string& key) { return take(key); }

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? take(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key) {
    const std::string raw = take(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "': '" + raw + "' is not a number");
    }
}

double KeyValueFile::get_double(const std::string& key, double fallback) {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValueFile::get_int(const std::string& key) {
    const std::string raw = take(key);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || ptr != raw.data() + raw.size())
        throw ConfigError(origin_ + ": key '" + key + "': '" + raw + "' is not an integer");
    return v;
}

std::int64_t KeyValueFile::get_int(const std::string& key, std::int64_t fallback) {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueFile::get_uint64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const std::string raw = take(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || ptr != raw.data() + raw.size())
        throw ConfigError(origin_ + ": key '" + key + "': '" + raw + "' is not an unsigned integer");
    return v;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string raw = take(key);
    if (raw == "true" || raw == "on" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "off" || raw == "0" || raw == "no") return false;
    throw ConfigError(origin_ + ": key '" + key + "': '" + raw + "' is not a boolean");
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const std::string raw = take(key);
    std::string item;
    std::istringstream in(raw);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> KeyValueFile::get_double_list(const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : get_list(key)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "': '" + item + "' is not a number");
        }
    }
    return out;
}

void KeyValueFile::reject_unknown_keys() const {
    std::string unknown;
    for (const auto& [key, used] : consumed_)
        if (!used) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty())
        throw ConfigError(origin_ + ": unknown key(s): " + unknown);
}

} // namespace lpwasim
