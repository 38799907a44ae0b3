// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "pulseforge/channel.hpp"
#include "pulseforge/errors.hpp"
#include "pulseforge/parallel.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/rng.hpp"
#include "pulseforge/transceiver.hpp"

namespace pulseforge {

enum class Constellation { QPSK, QAM16, QAM64, QAM256 };

inline std::string constellation_name(Constellation c) {
    switch (c) {
        case Constellation::QPSK: return "QPSK";
        case Constellation::QAM16: return "16QAM";
        case Constellation::QAM64: return "64QAM";
        case Constellation::QAM256: return "256QAM";
    }
    throw ConfigError("unknown constellation");
}

inline Constellation constellation_from_name(const std::string& s) {
    if (s == "QPSK" || s == "qpsk" || s == "4QAM") return Constellation::QPSK;
    if (s == "16QAM" || s == "qam16") return Constellation::QAM16;
    if (s == "64QAM" || s == "qam64") return Constellation::QAM64;
    if (s == "256QAM" || s == "qam256") return Constellation::QAM256;
    throw ConfigError("unknown constellation: " + s);
}

// side of the square grid: 2, 4, 8, 16
inline int constellation_side(Constellation c) {
    switch (c) {
        case Constellation::QPSK: return 2;
        case Constellation::QAM16: return 4;
        case Constellation::QAM64: return 8;
        case Constellation::QAM256: return 16;
    }
    throw ConfigError("unknown constellation");
}

// amplitude scale giving unit mean power over the full alphabet
inline double constellation_scale(Constellation c) {
    const double k = constellation_side(c);
    return std::sqrt(3.0 / (2.0 * (k * k - 1.0)));
}

inline cplx draw_symbol(Constellation c, Rng& rng) {
    const int k = constellation_side(c);
    const double s = constellation_scale(c);
    const int i = static_cast<int>(rng.pow2_index(static_cast<std::uint32_t>(k)));
    const int q = static_cast<int>(rng.pow2_index(static_cast<std::uint32_t>(k)));
    return cplx{s * (2 * i - (k - 1)), s * (2 * q - (k - 1))};
}

inline cplx slice_symbol(Constellation c, cplx x) {
    const int k = constellation_side(c);
    const double s = constellation_scale(c);
    const auto pick = [&](double v) {
        const double idx = std::round((v / s + (k - 1)) / 2.0);
        const double clamped = std::min<double>(k - 1, std::max(0.0, idx));
        return s * (2.0 * clamped - (k - 1));
    };
    return cplx{pick(x.real()), pick(x.imag())};
}

inline double evm_to_sinr_db(double evm_fraction) {
    if (!(evm_fraction > 0.0))
        throw ConfigError("evm_to_sinr_db: EVM fraction must be positive");
    return -20.0 * std::log10(evm_fraction);
}

inline double sinr_db_to_evm(double sinr_db) {
    return std::pow(10.0, -sinr_db / 20.0);
}

struct LinkConfig {
    Constellation constellation = Constellation::QPSK;
    double snr_db = 20.0;
    int n_frames = 100;
    std::uint64_t seed = 1;
    int n_symbols = 16; // lattice symbols per frame
    int threads = 0;    // 0 = resolve from environment/hardware
    bool fade = true;   // false pins every path gain to sqrt(power)

    void validate() const {
        if (n_frames < 1) throw ConfigError("LinkConfig: need at least one frame");
        if (n_symbols < 1) throw ConfigError("LinkConfig: need at least one symbol");
    }
};

struct LinkReport {
    double ser = 0.0;
    double evm_percent = 0.0;
    double measured_sinr_db = 0.0;
    long long symbols_measured = 0;
};

// raw per-frame accumulators, reducible to any aggregate after the fact
struct LinkFrameStat {
    double signal = 0.0, residual = 0.0;
    double err = 0.0, ref = 0.0;
    long long wrong = 0, total = 0;
};

// Uncoded link run: modulate, apply one drawn delay/Doppler realization per
// frame, add white noise, demodulate, genie one-tap zero-forcing equalize, and
// score interior symbols.  The receive filter is assumed unit power for the
// noise calibration.  Deterministic for a fixed seed regardless of threads.
inline LinkReport run_link(const PrototypeFilter& g, const PrototypeFilter& gamma,
                           const Numerology& num, const ScatteringStats& stats,
                           const LinkConfig& cfg,
                           std::vector<LinkFrameStat>* per_frame = nullptr) {
    num.validate();
    g.validate();
    gamma.validate();
    stats.validate();
    cfg.validate();
    detail::check_pulse_matches(g, num, "run_link");
    detail::check_pulse_matches(gamma, num, "run_link");

    const int P = stats.path_count();
    const int M = num.M;
    const int S = cfg.n_symbols;
    const double sigma_n2 = std::pow(10.0, -cfg.snr_db / 10.0);

    const long long pad =
        static_cast<long long>(std::ceil(stats.tau_max)) + 1;
    const long long longest =
        std::max(g.length(), gamma.length()) + pad;
    const int edge = static_cast<int>(longest / num.N) + 2;
    if (S - 2 * edge < 1)
        throw ConfigError("run_link: frame too short for interior symbols");

    // per-path constants: rho, delay twist per subcarrier, Doppler per symbol
    std::vector<cplx> rho(static_cast<std::size_t>(P));
    std::vector<long long> tau(static_cast<std::size_t>(P));
    Eigen::MatrixXcd twist(M, P);
    Eigen::MatrixXcd spin(S, P);
    for (int p = 0; p < P; ++p) {
        const auto& path = stats.paths[static_cast<std::size_t>(p)];
        rho[static_cast<std::size_t>(p)] =
            std::conj(cross_ambiguity(g, gamma, path.tau, path.nu));
        tau[static_cast<std::size_t>(p)] = std::llround(path.tau);
        for (int m = 0; m < M; ++m)
            twist(m, p) = std::polar(
                1.0, -2.0 * std::numbers::pi * m * path.tau / M);
        for (int n = 0; n < S; ++n)
            spin(n, p) = std::polar(
                1.0, 2.0 * std::numbers::pi * path.nu * static_cast<double>(n) * num.N);
    }

    std::vector<LinkFrameStat> tally(static_cast<std::size_t>(cfg.n_frames));

    const std::vector<int> active = all_subcarriers(M);
    parallel_for(static_cast<std::size_t>(cfg.n_frames),
                 resolve_threads(cfg.threads), [&](std::size_t f) {
        Rng rng = Rng::child(cfg.seed, static_cast<std::uint64_t>(f));

        std::vector<cplx> eta(static_cast<std::size_t>(P));
        if (cfg.fade) {
            const ChannelRealization real = draw_realization(stats, rng);
            eta = real.gains;
        } else {
            for (int p = 0; p < P; ++p)
                eta[static_cast<std::size_t>(p)] = std::sqrt(
                    stats.paths[static_cast<std::size_t>(p)].power);
        }

        SymbolGrid sent;
        sent.active_map = active;
        sent.symbols.resize(M, S);
        for (int n = 0; n < S; ++n)
            for (int m = 0; m < M; ++m)
                sent.symbols(m, n) = draw_symbol(cfg.constellation, rng);

        const FrameSignal tx = modulate(sent, g, num);

        FrameSignal rx;
        rx.Ts = tx.Ts;
        rx.origin = tx.origin + pad;
        rx.samples.assign(tx.samples.size() + 2 * static_cast<std::size_t>(pad),
                          cplx{0.0, 0.0});
        for (int p = 0; p < P; ++p) {
            const cplx gain = eta[static_cast<std::size_t>(p)];
            if (gain == cplx{0.0, 0.0}) continue;
            const double nu = stats.paths[static_cast<std::size_t>(p)].nu;
            for (long long i = 0; i < tx.length(); ++i) {
                const long long t_out = i + tau[static_cast<std::size_t>(p)] + pad;
                const double t_rel =
                    static_cast<double>(t_out - rx.origin);
                rx.samples[static_cast<std::size_t>(t_out)] +=
                    gain * tx.samples[static_cast<std::size_t>(i)] *
                    std::polar(1.0, 2.0 * std::numbers::pi * nu * t_rel);
            }
        }
        for (auto& v : rx.samples) v += rng.cgauss(sigma_n2);

        const SymbolGrid got = demodulate(rx, gamma, num, S, active);

        LinkFrameStat& t = tally[static_cast<std::size_t>(f)];
        for (int n = edge; n <= S - 1 - edge; ++n) {
            for (int m = 0; m < M; ++m) {
                cplx h{0.0, 0.0};
                for (int p = 0; p < P; ++p)
                    h += eta[static_cast<std::size_t>(p)] *
                         rho[static_cast<std::size_t>(p)] * twist(m, p) * spin(n, p);
                const cplx a = sent.symbols(m, n);
                const cplx y = got.symbols(m, n);
                t.signal += std::norm(h * a);
                t.residual += std::norm(y - h * a);
                const cplx eq = std::abs(h) > 0.0 ? y / h : cplx{0.0, 0.0};
                t.err += std::norm(eq - a);
                t.ref += std::norm(a);
                if (slice_symbol(cfg.constellation, eq) != a) ++t.wrong;
                ++t.total;
            }
        }
    });

    if (per_frame) *per_frame = tally;

    LinkFrameStat sum;
    for (const LinkFrameStat& t : tally) {
        sum.signal += t.signal;
        sum.residual += t.residual;
        sum.err += t.err;
        sum.ref += t.ref;
        sum.wrong += t.wrong;
        sum.total += t.total;
    }

    LinkReport rep;
    rep.symbols_measured = sum.total;
    rep.ser = sum.total > 0 ? static_cast<double>(sum.wrong) / sum.total : 0.0;
    rep.evm_percent = sum.ref > 0.0 ? 100.0 * std::sqrt(sum.err / sum.ref) : 0.0;
    if (sum.residual <= 0.0 || sum.signal >= sum.residual * 1e30)
        rep.measured_sinr_db = 300.0;
    else if (sum.signal <= 0.0)
        rep.measured_sinr_db = -300.0;
    else
        rep.measured_sinr_db = 10.0 * std::log10(sum.signal / sum.residual);
    return rep;
}

} // namespace pulseforge
