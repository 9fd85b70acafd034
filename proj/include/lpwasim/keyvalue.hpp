#ifndef LPWASIM_KEYVALUE_HPP
#define LPWASIM_KEYVALUE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lpwasim/common.hpp"

namespace lpwasim {

/// Flat `key = value` file: one pair per line, `#` comments, blank lines
/// ignored. Consumers pull typed values; any key never consumed is a schema
/// error, so typos fail loudly instead of silently using defaults.
class KeyValueFile {
public:
    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    /// Comma-separated list; empty when the key is absent.
    std::vector<std::string> get_list(const std::string& key);
    std::vector<double> get_double_list(const std::string& key);

    /// Throws ConfigError naming every key that was present but never read.
    void reject_unknown_keys() const;
    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, std::string> values_;
    std::map<std::string, bool> consumed_;
    std::string take(const std::string& key);
};

} // namespace lpwasim

#endif
