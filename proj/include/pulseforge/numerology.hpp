// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "pulseforge/errors.hpp"

namespace pulseforge {

// Lattice parameters of the multicarrier system. M is the number of
// subcarriers (and the DFT size), N the symbol advance in samples, Ts the
// sample period. Derived quantities: symbol period T = N*Ts, subcarrier
// spacing F = 1/(M*Ts), density TF = T*F = N/M.
struct Numerology {
    int M = 0;
    int N = 0;
    double Ts = 1.0;

    double T() const { return static_cast<double>(N) * Ts; }
    double F() const { return 1.0 / (static_cast<double>(M) * Ts); }
    double TF() const { return static_cast<double>(N) / static_cast<double>(M); }

    void validate() const {
        if (M < 1) throw ConfigError("numerology: M must be >= 1");
        if (N < M) throw ConfigError("numerology: N must be >= M (TF >= 1)");
        if (!(Ts > 0.0)) throw ConfigError("numerology: Ts must be positive");
    }
};

// Channel dispersion summary: tau_max is the maximum delay spread in seconds,
// nu_max the maximum one-sided Doppler spread in Hz.
struct ChannelCharacteristics {
    double tau_max = 0.0;
    double nu_max = 0.0;

    // Product of the spreads; well below 1 for the underspread channels this
    // toolkit targets.
    double underspread_factor() const { return tau_max * nu_max; }

    void validate() const {
        if (tau_max < 0.0 || nu_max < 0.0)
            throw ConfigError("channel characteristics: spreads must be non-negative");
    }
};

struct CpDerivation {
    Numerology num;
    double t_cp = 0.0;   // cyclic-prefix duration (N - M) * Ts, seconds
    bool degenerate = false; // true when tau_max = 0 collapses the prefix (TF = 1)
};

namespace detail {

// ceil with a snap to the nearest integer when x is within a relative 1e-9,
// so exact-ratio inputs that land a hair above an integer in floating point
// do not get rounded one slot too high.
inline long long snapped_ceil(double x) {
    const double rounded = std::round(x);
    if (std::abs(x - rounded) <= 1e-9 * std::max(1.0, std::abs(x)))
        return static_cast<long long>(rounded);
    return static_cast<long long>(std::ceil(x));
}

} // namespace detail

// CP-OFDM style derivation: the caller fixes the subcarrier spacing F and the
// sample period Ts (so M = 1/(F*Ts) must be an integer), and the prefix is the
// smallest whole number of samples covering tau_max. N always rounds upward,
// so (N - M) * Ts >= tau_max is never violated by quantization.
inline CpDerivation derive_cp_ofdm_numerology(const ChannelCharacteristics& chars,
                                              double subcarrier_spacing, double Ts,
                                              double tf_cap = 2.0) {
    chars.validate();
    if (!(subcarrier_spacing > 0.0)) throw ConfigError("cp numerology: F must be positive");
    if (!(Ts > 0.0)) throw ConfigError("cp numerology: Ts must be positive");

    const double m_real = 1.0 / (subcarrier_spacing * Ts);
    const double m_rounded = std::round(m_real);
    if (m_rounded < 1.0 || std::abs(m_real - m_rounded) > 1e-6 * m_rounded)
        throw ConfigError("cp numerology: 1/(F*Ts) must be a positive integer; got " +
                          std::to_string(m_real));
    const long long M = static_cast<long long>(m_rounded);

    const long long cp = chars.tau_max > 0.0 ? detail::snapped_ceil(chars.tau_max / Ts) : 0;
    const long long N = M + cp;
    const double tf = static_cast<double>(N) / static_cast<double>(M);
    if (tf > tf_cap)
        throw ConfigError("cp numerology: tau_max requires TF = " + std::to_string(tf) +
                          " above the cap " + std::to_string(tf_cap));
    if (N > std::numeric_limits<int>::max())
        throw ConfigError("cp numerology: derived N does not fit an int");

    CpDerivation out;
    out.num = Numerology{static_cast<int>(M), static_cast<int>(N), Ts};
    out.t_cp = static_cast<double>(cp) * Ts;
    out.degenerate = (cp == 0);
    out.num.validate();
    return out;
}

struct TfDerivation {
    Numerology num;
    double target_T = 0.0;       // pre-quantization symbol period
    double target_F = 0.0;       // pre-quantization subcarrier spacing
    double ratio_error_rel = 0.0; // |T/F - tau_max/nu_max| / (tau_max/nu_max)
    double tf_error_rel = 0.0;    // |N/M - TF_requested| / TF_requested
};

// Dispersion-matched derivation: picks T and F so that T/F = tau_max/nu_max
// while T*F equals the requested density, then quantizes onto integers
// (T = N*Ts, F = 1/(M*Ts)). For each M the density pins N to one of the two
// integers bracketing tf*M; among those pairs the search minimizes the T/F
// ratio error (equivalently |N*M - (tau_max/nu_max)/Ts^2|), breaking ties by
// closeness of N/M to the requested density and then by smaller M.
inline TfDerivation derive_tf_localized_numerology(const ChannelCharacteristics& chars,
                                                   double tf, double Ts,
                                                   int max_size = 4096) {
    chars.validate();
    if (!(tf > 1.0)) throw ConfigError("tf numerology: TF must exceed 1");
    if (!(Ts > 0.0)) throw ConfigError("tf numerology: Ts must be positive");
    if (!(chars.nu_max > 0.0)) throw ConfigError("tf numerology: nu_max must be positive");
    if (!(chars.tau_max > 0.0)) throw ConfigError("tf numerology: tau_max must be positive");
    if (max_size < 1) throw ConfigError("tf numerology: max_size must be >= 1");

    const double aspect = chars.tau_max / chars.nu_max; // target T/F, seconds^2
    const double product = aspect / (Ts * Ts);          // target N*M

    TfDerivation out;
    out.target_T = std::sqrt(tf * aspect);
    out.target_F = std::sqrt(tf * chars.nu_max / chars.tau_max);

    long long best_n = -1, best_m = -1;
    double best_ratio_err = std::numeric_limits<double>::infinity();
    double best_tf_err = std::numeric_limits<double>::infinity();
    for (long long m = 1; m <= max_size; ++m) {
        const double nc = tf * static_cast<double>(m);
        for (long long n = static_cast<long long>(std::floor(nc));
             n <= static_cast<long long>(std::ceil(nc)); ++n) {
            if (n < m || n > max_size) continue;
            const double ratio_err =
                std::abs(static_cast<double>(n) * static_cast<double>(m) - product);
            const double tf_err =
                std::abs(static_cast<double>(n) / static_cast<double>(m) - tf);
            const bool better =
                ratio_err < best_ratio_err - 1e-9 * std::max(1.0, best_ratio_err) ||
                (std::abs(ratio_err - best_ratio_err) <=
                     1e-9 * std::max(1.0, best_ratio_err) &&
                 (tf_err < best_tf_err ||
                  (tf_err == best_tf_err && m < best_m)));
            if (better) {
                best_ratio_err = ratio_err;
                best_tf_err = tf_err;
                best_n = n;
                best_m = m;
            }
        }
    }
    if (best_n < 0)
        throw ConfigError("tf numerology: no integer (N, M) within max_size fits the request");

    out.num = Numerology{static_cast<int>(best_m), static_cast<int>(best_n), Ts};
    out.num.validate();
    out.ratio_error_rel = best_ratio_err * Ts * Ts / aspect;
    out.tf_error_rel = std::abs(out.num.TF() - tf) / tf;
    return out;
}

} // namespace pulseforge
