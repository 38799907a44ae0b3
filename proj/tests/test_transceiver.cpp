// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pulseforge/rng.hpp"
#include "pulseforge/transceiver.hpp"

using namespace pulseforge;
using Catch::Approx;

namespace {

SymbolGrid random_grid(const std::vector<int>& active, int n_symbols, Rng& rng) {
    SymbolGrid g;
    g.active_map = active;
    g.symbols.resize(static_cast<Eigen::Index>(active.size()), n_symbols);
    for (int n = 0; n < n_symbols; ++n)
        for (std::size_t k = 0; k < active.size(); ++k)
            g.symbols(static_cast<Eigen::Index>(k), n) = rng.cgauss();
    return g;
}

// Direct double-sum synthesis, straight from the lattice definition.
std::vector<cplx> naive_synthesis(const SymbolGrid& grid, const PrototypeFilter& g,
                                  const Numerology& num, long long origin,
                                  long long total) {
    std::vector<cplx> s(static_cast<std::size_t>(total), cplx{0.0, 0.0});
    for (long long i = 0; i < total; ++i) {
        for (int n = 0; n < grid.n_symbols(); ++n) {
            const long long u = (i - origin) - static_cast<long long>(n) * num.N;
            const cplx gv = g.at_offset(u);
            if (gv == cplx{0.0, 0.0}) continue;
            for (int k = 0; k < grid.n_active(); ++k) {
                const int m = grid.active_map[static_cast<std::size_t>(k)];
                s[static_cast<std::size_t>(i)] +=
                    grid.symbols(k, n) * gv *
                    std::polar(1.0, 2.0 * std::numbers::pi * m * static_cast<double>(u) / num.M);
            }
        }
    }
    return s;
}

// Direct correlation analysis, straight from the inner-product definition.
cplx naive_analysis(const FrameSignal& r, const PrototypeFilter& gamma,
                    const Numerology& num, int m, int n) {
    cplx acc{0.0, 0.0};
    for (int i = 0; i < gamma.length(); ++i) {
        const long long u = i - gamma.center_index;
        const long long t = r.origin + static_cast<long long>(n) * num.N + u;
        if (t < 0 || t >= r.length()) continue;
        acc += r.samples[static_cast<std::size_t>(t)] *
               std::conj(gamma.coeffs[static_cast<std::size_t>(i)] *
                         std::polar(1.0, 2.0 * std::numbers::pi * m *
                                             static_cast<double>(u) / num.M));
    }
    return acc;
}

} // namespace

TEST_CASE("polyphase synthesis equals the naive double sum") {
    const Numerology num{8, 10, 1.0};
    Rng rng(7);
    for (double K : {1.0, 1.07, 2.0, 4.0}) {
        const int len = static_cast<int>(std::lround(K * num.N));
        const PrototypeFilter g = gaussian_pulse(0.8, len, 1.0);
        const SymbolGrid grid = random_grid({0, 2, 5, 7}, 5, rng);
        const FrameSignal s = modulate(grid, g, num);
        REQUIRE(s.length() >= 4ll * num.N + len);
        const std::vector<cplx> ref = naive_synthesis(grid, g, num, s.origin, s.length());
        double worst = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i)
            worst = std::max(worst, std::abs(ref[i] - s.samples[i]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("polyphase analysis equals the naive correlation") {
    const Numerology num{8, 10, 1.0};
    Rng rng(8);
    const PrototypeFilter g = gaussian_pulse(0.8, 20, 1.0);
    const PrototypeFilter gamma = gaussian_pulse(1.1, 17, 1.0);
    const SymbolGrid grid = random_grid(all_subcarriers(8), 4, rng);
    const FrameSignal s = modulate(grid, g, num);
    const SymbolGrid got = demodulate(s, gamma, num, 4, all_subcarriers(8));
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 8; ++m)
            CHECK(std::abs(got.symbols(m, n) - naive_analysis(s, gamma, num, m, n)) < 1e-12);
}

TEST_CASE("single-subcarrier bursts follow the pulse envelope") {
    const Numerology num{8, 10, 1.0};
    const PrototypeFilter g = rect_pulse(num.N, 1.0);
    SymbolGrid grid;
    grid.active_map = {0};
    grid.symbols.resize(1, 1);
    grid.symbols(0, 0) = cplx{2.0, 1.0};

    SECTION("DC subcarrier gives a scaled rectangle") {
        const FrameSignal s = modulate(grid, g, num);
        for (int i = 0; i < num.N; ++i)
            CHECK(std::abs(s.samples[static_cast<std::size_t>(i)] -
                           cplx{2.0, 1.0} / std::sqrt(10.0)) < 1e-14);
    }

    SECTION("a higher subcarrier is the same envelope with a spinning phase") {
        grid.active_map = {3};
        const FrameSignal s = modulate(grid, g, num);
        const double mag = std::abs(cplx{2.0, 1.0}) / std::sqrt(10.0);
        for (int i = 0; i < num.N; ++i) {
            const long long u = i - s.origin;
            CHECK(std::abs(s.samples[static_cast<std::size_t>(i)]) == Approx(mag).epsilon(1e-12));
            const cplx expect = cplx{2.0, 1.0} / std::sqrt(10.0) *
                                std::polar(1.0, 2.0 * std::numbers::pi * 3 *
                                                    static_cast<double>(u) / num.M);
            CHECK(std::abs(s.samples[static_cast<std::size_t>(i)] - expect) < 1e-13);
        }
    }
}

TEST_CASE("back-to-back with an exactly orthogonal matched pair is transparent") {
    const Numerology num{32, 36, 1.0};
    const PrototypeFilter r = rect_pulse(num.M, num.Ts);
    Rng rng(99);
    const SymbolGrid sent = random_grid(all_subcarriers(num.M), 6, rng);
    const FrameSignal s = modulate(sent, r, num);
    const SymbolGrid got = demodulate(s, r, num, 6, all_subcarriers(num.M));
    const double rel = (got.symbols - sent.symbols).squaredNorm() / sent.symbols.squaredNorm();
    CHECK(rel < 1e-20);
}

TEST_CASE("back-to-back with the biorthogonal CP pair is transparent") {
    const Numerology num{32, 40, 1.0};
    const PrototypeFilter g = rect_pulse(num.N, num.Ts);
    // canonical dual of the unit-power transmit rectangle: <gamma, g> = 1
    PrototypeFilter gamma;
    gamma.coeffs.assign(static_cast<std::size_t>(num.M),
                        cplx{std::sqrt(static_cast<double>(num.N)) / num.M, 0.0});
    gamma.center_index = num.M / 2;
    gamma.Ts = num.Ts;

    Rng rng(100);
    const SymbolGrid sent = random_grid(all_subcarriers(num.M), 5, rng);
    const FrameSignal s = modulate(sent, g, num);
    const SymbolGrid got = demodulate(s, gamma, num, 5, all_subcarriers(num.M));
    const double rel = (got.symbols - sent.symbols).squaredNorm() / sent.symbols.squaredNorm();
    CHECK(rel < 1e-24);
}

TEST_CASE("CP pair shrugs off delays up to half the prefix") {
    const Numerology num{32, 40, 1.0};
    const auto [g, gamma] = cp_ofdm_pair(num);
    Rng rng(101);
    const SymbolGrid sent = random_grid(all_subcarriers(num.M), 5, rng);
    const FrameSignal s = modulate(sent, g, num);

    const long long tau = 3;
    FrameSignal delayed;
    delayed.Ts = s.Ts;
    delayed.origin = s.origin;
    delayed.samples.assign(s.samples.size() + static_cast<std::size_t>(tau), cplx{0.0, 0.0});
    for (std::size_t i = 0; i < s.samples.size(); ++i)
        delayed.samples[i + static_cast<std::size_t>(tau)] = s.samples[i];

    const SymbolGrid got = demodulate(delayed, gamma, num, 5, all_subcarriers(num.M));
    // genie one-tap: mismatched-pair gain times the delay's linear phase
    double worst = 0.0;
    for (int n = 0; n < 5; ++n)
        for (int m = 0; m < num.M; ++m) {
            const cplx h = std::sqrt(static_cast<double>(num.M) / num.N) *
                           std::polar(1.0, -2.0 * std::numbers::pi * m *
                                               static_cast<double>(tau) / num.M);
            worst = std::max(worst, std::abs(got.symbols(m, n) / h - sent.symbols(m, n)));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("modulation is linear in the symbols") {
    const Numerology num{8, 10, 1.0};
    const PrototypeFilter g = gaussian_pulse(1.0, 20, 1.0);
    Rng rng(11);
    const SymbolGrid a = random_grid(all_subcarriers(8), 3, rng);
    SymbolGrid b = random_grid(all_subcarriers(8), 3, rng);
    SymbolGrid sum = a;
    sum.symbols += b.symbols;
    const FrameSignal sa = modulate(a, g, num);
    const FrameSignal sb = modulate(b, g, num);
    const FrameSignal ss = modulate(sum, g, num);
    double worst = 0.0;
    for (std::size_t i = 0; i < ss.samples.size(); ++i)
        worst = std::max(worst, std::abs(ss.samples[i] - sa.samples[i] - sb.samples[i]));
    CHECK(worst < 1e-12);
}

TEST_CASE("error vector magnitude") {
    Rng rng(12);
    SymbolGrid ref = random_grid(all_subcarriers(16), 256, rng);
    SECTION("identical grids measure zero") {
        CHECK(measure_evm(ref, ref) == 0.0);
    }
    SECTION("additive noise of power 0.01 measures about 10 percent") {
        // scale to an exactly unit-mean-power reference first
        ref.symbols *= std::sqrt(static_cast<double>(ref.symbols.size())) /
                       ref.symbols.norm();
        SymbolGrid noisy = ref;
        for (Eigen::Index j = 0; j < noisy.symbols.cols(); ++j)
            for (Eigen::Index i = 0; i < noisy.symbols.rows(); ++i)
                noisy.symbols(i, j) += rng.cgauss(0.01);
        CHECK(measure_evm(ref, noisy) == Approx(10.0).margin(0.5));
    }
    SECTION("shape mismatch is rejected") {
        const SymbolGrid other = random_grid(all_subcarriers(16), 8, rng);
        CHECK_THROWS_AS(measure_evm(ref, other), ConfigError);
    }
}

TEST_CASE("operation counts reproduce the complexity table") {
    const Numerology num{2048, static_cast<int>(detail::snapped_ceil(1.07 * 2048)), 1.0};
    REQUIRE(num.N == 2192);

    const ComplexityReport cp = complexity_cp_baseline(num);
    CHECK(cp.total == 22528);
    CHECK(cp.ratio_vs_cpofdm == 100.0);

    const ComplexityReport k1 = complexity_count(num, 1.0, true);
    CHECK(k1.shaping_ops == 288);
    CHECK(k1.total == 22816);
    CHECK(std::llround(k1.ratio_vs_cpofdm) == 101);

    const ComplexityReport k2 = complexity_count(num, 2.0, false);
    CHECK(k2.total == 26912);
    CHECK(std::llround(k2.ratio_vs_cpofdm) == 119);

    const ComplexityReport k4 = complexity_count(num, 4.0, false);
    CHECK(k4.total == 31296);
    CHECK(std::llround(k4.ratio_vs_cpofdm) == 139);

    CHECK_THROWS_AS(complexity_count({1000, 1070, 1.0}, 2.0, false), ConfigError);
}

TEST_CASE("symbol grid plumbing") {
    SECTION("centered allocation wraps around DC") {
        const std::vector<int> v = centered_subcarriers(8, 5);
        CHECK(v == std::vector<int>{6, 7, 0, 1, 2});
    }
    SECTION("duplicate subcarriers are rejected") {
        SymbolGrid g;
        g.active_map = {1, 1};
        g.symbols.resize(2, 1);
        CHECK_THROWS_AS(g.validate(8), ConfigError);
    }
    SECTION("pulse and numerology sample periods must agree") {
        const Numerology num{8, 10, 1.0};
        const PrototypeFilter g = rect_pulse(10, 0.5);
        SymbolGrid grid;
        grid.active_map = {0};
        grid.symbols.resize(1, 1);
        grid.symbols(0, 0) = 1.0;
        CHECK_THROWS_AS(modulate(grid, g, num), ConfigError);
    }
    SECTION("demodulation past the end of the frame reads zeros") {
        const Numerology num{8, 10, 1.0};
        const PrototypeFilter g = rect_pulse(10, 1.0);
        SymbolGrid grid;
        grid.active_map = {0};
        grid.symbols.resize(1, 1);
        grid.symbols(0, 0) = 1.0;
        const FrameSignal s = modulate(grid, g, num);
        const SymbolGrid got = demodulate(s, g, num, 4, {0});
        CHECK(std::abs(got.symbols(0, 0)) > 0.5);
        CHECK(std::abs(got.symbols(0, 3)) == 0.0);
    }
}
