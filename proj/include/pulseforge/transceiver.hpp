// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/errors.hpp"
#include "pulseforge/fft.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/pulse.hpp"

namespace pulseforge {

// Payload symbols: one row per active subcarrier, one column per symbol slot.
struct SymbolGrid {
    Eigen::MatrixXcd symbols;     // active_map.size() x n_symbols
    std::vector<int> active_map;  // subcarrier indices within [0, M)

    int n_active() const { return static_cast<int>(active_map.size()); }
    int n_symbols() const { return static_cast<int>(symbols.cols()); }

    void validate(int M) const {
        if (active_map.empty() || symbols.cols() < 1)
            throw ConfigError("grid: empty symbol grid");
        if (symbols.rows() != static_cast<Eigen::Index>(active_map.size()))
            throw ConfigError("grid: row count does not match the active map");
        std::vector<char> seen(static_cast<std::size_t>(M), 0);
        for (int m : active_map) {
            if (m < 0 || m >= M) throw ConfigError("grid: subcarrier index outside [0, M)");
            if (seen[static_cast<std::size_t>(m)]) throw ConfigError("grid: duplicate subcarrier index");
            seen[static_cast<std::size_t>(m)] = 1;
        }
    }
};

inline std::vector<int> all_subcarriers(int M) {
    std::vector<int> v(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) v[static_cast<std::size_t>(m)] = m;
    return v;
}

// Centered band of m_active subcarriers around DC (indices mod M).
inline std::vector<int> centered_subcarriers(int M, int m_active) {
    if (m_active < 1 || m_active > M)
        throw ConfigError("grid: active count must be within [1, M]");
    std::vector<int> v;
    v.reserve(static_cast<std::size_t>(m_active));
    const int lo = -(m_active / 2);
    for (int k = 0; k < m_active; ++k) {
        const int m = ((lo + k) % M + M) % M;
        v.push_back(m);
    }
    return v;
}

// Sampled baseband frame. origin is the sample index of the n = 0 symbol
// center, so sample i sits at lattice time i - origin.
struct FrameSignal {
    std::vector<cplx> samples;
    double Ts = 1.0;
    long long origin = 0;

    long long length() const { return static_cast<long long>(samples.size()); }

    double power() const {
        double p = 0.0;
        for (const cplx& s : samples) p += std::norm(s);
        return samples.empty() ? 0.0 : p / static_cast<double>(samples.size());
    }
};

namespace detail {

inline void check_pulse_matches(const PrototypeFilter& p, const Numerology& num,
                                const char* who) {
    if (std::abs(p.Ts - num.Ts) > 1e-12 * std::max(p.Ts, num.Ts))
        throw ConfigError(std::string(who) + ": pulse sample period differs from the numerology");
}

} // namespace detail

// Synthesis: s(t) = sum_n sum_m a_{m,n} g(t - nN) e^{j 2 pi m (t - nN) / M},
// realized as one M-point IDFT per symbol (the periodic core) multiplied by
// the pulse and overlap-added (the polyphase network). The frame is made
// causal by a constant shift of ceil(L_g / 2) samples, reported in origin.
inline FrameSignal modulate(const SymbolGrid& grid, const PrototypeFilter& g,
                            const Numerology& num) {
    num.validate();
    g.validate();
    grid.validate(num.M);
    detail::check_pulse_matches(g, num, "modulate");

    const int L_g = g.length();
    const int n_sym = grid.n_symbols();
    const long long shift = std::max<long long>((L_g + 1) / 2, g.center_index);
    const long long total = (static_cast<long long>(n_sym) - 1) * num.N + L_g +
                            (shift - g.center_index);
    FrameSignal out;
    out.Ts = num.Ts;
    out.origin = shift;
    out.samples.assign(static_cast<std::size_t>(total), cplx{0.0, 0.0});

    std::vector<cplx> bins(static_cast<std::size_t>(num.M));
    for (int n = 0; n < n_sym; ++n) {
        std::fill(bins.begin(), bins.end(), cplx{0.0, 0.0});
        for (int r = 0; r < grid.n_active(); ++r)
            bins[static_cast<std::size_t>(grid.active_map[static_cast<std::size_t>(r)])] =
                grid.symbols(r, n);
        const std::vector<cplx> core = detail::FftEngine::inverse(bins);
        const long long base = shift + static_cast<long long>(n) * num.N - g.center_index;
        for (int i = 0; i < L_g; ++i) {
            const long long u = i - g.center_index; // offset from the symbol center
            const long long v = ((u % num.M) + num.M) % num.M;
            out.samples[static_cast<std::size_t>(base + i)] +=
                g.coeffs[static_cast<std::size_t>(i)] * core[static_cast<std::size_t>(v)];
        }
    }
    return out;
}

// Analysis: a~_{m,n} = <r, gamma_{m,n}> via the transposed polyphase network:
// fold the windowed signal modulo M, then one M-point DFT per symbol.
inline SymbolGrid demodulate(const FrameSignal& r, const PrototypeFilter& gamma,
                             const Numerology& num, int n_symbols,
                             const std::vector<int>& active_map) {
    num.validate();
    gamma.validate();
    detail::check_pulse_matches(gamma, num, "demodulate");
    if (n_symbols < 1) throw ConfigError("demodulate: need at least one symbol");
    SymbolGrid grid;
    grid.active_map = active_map;
    grid.symbols.resize(static_cast<Eigen::Index>(active_map.size()), n_symbols);
    grid.validate(num.M);

    std::vector<cplx> fold(static_cast<std::size_t>(num.M));
    for (int n = 0; n < n_symbols; ++n) {
        std::fill(fold.begin(), fold.end(), cplx{0.0, 0.0});
        const long long center = r.origin + static_cast<long long>(n) * num.N;
        for (int i = 0; i < gamma.length(); ++i) {
            const long long u = i - gamma.center_index;
            const long long t = center + u;
            if (t < 0 || t >= r.length()) continue;
            const long long v = ((u % num.M) + num.M) % num.M;
            fold[static_cast<std::size_t>(v)] +=
                r.samples[static_cast<std::size_t>(t)] *
                std::conj(gamma.coeffs[static_cast<std::size_t>(i)]);
        }
        const std::vector<cplx> row = detail::FftEngine::forward(fold);
        for (int k = 0; k < grid.n_active(); ++k)
            grid.symbols(k, n) = row[static_cast<std::size_t>(
                grid.active_map[static_cast<std::size_t>(k)])];
    }
    return grid;
}

// Root-mean-square error magnitude between grids, as a percentage of the
// reference RMS level.
inline double measure_evm(const SymbolGrid& reference, const SymbolGrid& received) {
    if (reference.symbols.rows() != received.symbols.rows() ||
        reference.symbols.cols() != received.symbols.cols())
        throw ConfigError("evm: grid shapes differ");
    const double ref_power = reference.symbols.squaredNorm();
    if (!(ref_power > 0.0)) throw ConfigError("evm: zero reference power");
    const double err_power = (received.symbols - reference.symbols).squaredNorm();
    return 100.0 * std::sqrt(err_power / ref_power);
}

struct ComplexityReport {
    long long dft_ops = 0;     // complex multiplications of the M-point transform
    long long shaping_ops = 0; // complex multiplications of the pulse stage
    long long total = 0;
    double ratio_vs_cpofdm = 0.0; // percent
};

// Complex-multiplication count per multicarrier symbol: M*log2(M) for the
// transform plus the pulse-shaping stage. Flat-top pulses (unity midsection)
// only pay for their tapered edges, 2*(N - M) samples; general length-K*N
// pulses pay one multiplication per sample. CP-OFDM is the baseline (no
// shaping stage).
inline ComplexityReport complexity_count(const Numerology& num, double K, bool flat_top) {
    num.validate();
    if ((num.M & (num.M - 1)) != 0)
        throw ConfigError("complexity: M must be a power of two");
    if (!(K >= 1.0)) throw ConfigError("complexity: K must be >= 1");
    ComplexityReport rep;
    int log2m = 0;
    for (int m = num.M; m > 1; m >>= 1) ++log2m;
    rep.dft_ops = static_cast<long long>(num.M) * log2m;
    rep.shaping_ops = flat_top ? 2ll * (num.N - num.M)
                               : static_cast<long long>(std::llround(K * num.N));
    rep.total = rep.dft_ops + rep.shaping_ops;
    rep.ratio_vs_cpofdm = 100.0 * static_cast<double>(rep.total) /
                          static_cast<double>(rep.dft_ops);
    return rep;
}

// The plain CP-OFDM reference row: transform only, no shaping stage.
inline ComplexityReport complexity_cp_baseline(const Numerology& num) {
    num.validate();
    if ((num.M & (num.M - 1)) != 0)
        throw ConfigError("complexity: M must be a power of two");
    ComplexityReport rep;
    int log2m = 0;
    for (int m = num.M; m > 1; m >>= 1) ++log2m;
    rep.dft_ops = static_cast<long long>(num.M) * log2m;
    rep.shaping_ops = 0;
    rep.total = rep.dft_ops;
    rep.ratio_vs_cpofdm = 100.0;
    return rep;
}

} // namespace pulseforge
