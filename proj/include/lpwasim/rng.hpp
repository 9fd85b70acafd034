#ifndef LPWASIM_RNG_HPP
#define LPWASIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace lpwasim {

/// Named randomness streams. Each consumer draws from its own stream so that
/// toggling one source (say solar vs RF) never perturbs the draws of another.
enum class RngStream : std::uint64_t {
    Placement = 0x9e3779b97f4a7c15ULL,
    Fading = 0xbf58476d1ce4e5b9ULL,
    EhFading = 0x94d049bb133111ebULL,
    SolarAngle = 0x2545f4914f6cdd1dULL,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic per-stream generator. mt19937_64 output is pinned by the
/// standard; variates are produced by explicit inverse-CDF transforms instead
/// of std::*_distribution, whose mappings vary across library vendors.
class Rng {
public:
    Rng(std::uint64_t root_seed, RngStream stream) {
        std::uint64_t s = root_seed ^ static_cast<std::uint64_t>(stream);
        engine_.seed(splitmix64(s));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with unit mean.
    double next_exponential() { return -std::log1p(-next_unit()); }

    /// Uniform on [0, hi).
    double next_uniform(double hi) { return hi * next_unit(); }

private:
    std::mt19937_64 engine_;
};

/// Seed for the i'th Monte Carlo trial of an experiment.
inline std::uint64_t trial_seed(std::uint64_t seed_base, std::uint64_t trial_index) {
    std::uint64_t s = seed_base + 0x632be59bd9b4e019ULL * (trial_index + 1);
    return splitmix64(s);
}

} // namespace lpwasim

#endif
