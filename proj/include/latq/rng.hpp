#pragma once

// Deterministic random numbers. The standard library's distribution objects
// are implementation-defined, so every sampler the project relies on for
// reproducible output is written out here on top of a fixed mt19937_64
// engine. Identical seeds give identical streams on every build.

#include <cmath>
#include <cstdint>
#include <random>

namespace latq {

// splitmix64 finalizer; used to derive replica seeds from a base seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 1));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform on [0, n) without modulo bias (rejection sampling).
    std::int64_t uniform_int(std::int64_t n) {
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % un;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return static_cast<std::int64_t>(v % un);
    }

    // Standard normal via Box-Muller; the pair partner is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace latq
