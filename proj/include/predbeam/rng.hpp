#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace predbeam {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Seeded random stream over the standardized mt19937_64 engine.
///
/// The uniform/gaussian transforms are implemented here rather than via
/// std::*_distribution, whose output sequences are implementation-defined;
/// every draw is therefore reproducible bit-for-bit across toolchains.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi].
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal via Box-Muller; the spare draw is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log argument never vanishes
        double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo bias is irrelevant at our n << 2^64, but a
        // multiply-shift keeps the mapping exact and branch-free
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent child stream from (master seed, purpose tag, index).
/// Identical arguments always yield an identical stream; distinct tags or
/// indices yield streams that are independent for simulation purposes.
inline RandomStream derive_stream(std::uint64_t master_seed, std::string_view tag,
                                  std::uint64_t index = 0) {
    std::uint64_t h = detail::splitmix64(master_seed ^ detail::fnv1a(tag));
    h = detail::splitmix64(h ^ index);
    return RandomStream(h);
}

} // namespace predbeam
