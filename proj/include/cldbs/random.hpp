#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cldbs {

/// Seeded random source with pinned transformations. std::mt19937_64 output is
/// specified by the standard, and the distributions below are implemented by
/// hand, so a (seed, call sequence) pair produces the same stream on every
/// platform. File digests in generated datasets rely on this.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; draws are generated in pairs.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // avoid log(0)
        while (u1 == 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) {
        double u = uniform01();
        while (u == 0.0) u = uniform01();
        return -std::log(u) / rate;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // reject the tail that would wrap past a multiple of n
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    std::uint64_t raw() { return engine_(); }

  private:
    static constexpr double pi = 3.14159265358979323846;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cldbs
