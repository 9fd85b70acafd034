#ifndef LPWASIM_COMMON_HPP
#define LPWASIM_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace lpwasim {

/// Raised when a configuration file or ScenarioConfig violates its schema
/// or an invariant that must hold before a run can start.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an internal invariant breaks mid-run (ledger causality, etc.).
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// floor() for ratios of quantized durations. The inputs are rationals with
/// small denominators (slot counts, duty cycles of 1% or 10%), so a value
/// sitting within a few ulps below an integer is that integer.
inline double robust_floor(double x) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) return nearest;
    return std::floor(x);
}

inline double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

constexpr double kLn2 = 0.6931471805599453;

} // namespace lpwasim

#endif
