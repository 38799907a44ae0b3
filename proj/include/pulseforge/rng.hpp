// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace pulseforge {

// Deterministic random source. mt19937_64 has a standard-mandated output
// sequence, and the Gaussian draw uses an explicit Box-Muller transform, so a
// given seed produces identical samples on every platform and compiler
// (std::normal_distribution would not guarantee that).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent child stream, e.g. one per Monte-Carlo frame. Mixing with
    // splitmix64 keeps streams decorrelated even for consecutive indices.
    static Rng child(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed ^ splitmix64(stream + 0x9e3779b97f4a7c15ull)));
    }

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; samples are produced in pairs.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> cgauss(double variance = 1.0) {
        const double s = std::sqrt(variance / 2.0);
        return {s * gauss(), s * gauss()};
    }

    // Uniform integer in [0, n). n must be a power of two (exact, unbiased).
    std::uint32_t pow2_index(std::uint32_t n) {
        return static_cast<std::uint32_t>(engine_() & (n - 1));
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace pulseforge
