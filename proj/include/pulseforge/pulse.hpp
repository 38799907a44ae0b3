// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pulseforge/errors.hpp"
#include "pulseforge/fft.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/window.hpp"

namespace pulseforge {

using cplx = std::complex<double>;

// Prototype filter: complex coefficients on a uniform sample grid. Sample i
// sits at time (i - center_index) * Ts, so center_index marks t = 0 and the
// lattice translates pulses by whole symbol periods relative to that origin.
// All constructors in this module produce unit-power pulses
// (sum |coeffs|^2 = 1); inner products are then plain dot products.
struct PrototypeFilter {
    std::vector<cplx> coeffs;
    int center_index = 0;
    double Ts = 1.0;

    int length() const { return static_cast<int>(coeffs.size()); }

    double energy() const {
        double e = 0.0;
        for (const cplx& c : coeffs) e += std::norm(c);
        return e;
    }

    // Value at integer time offset t from the pulse center (0 outside).
    cplx at_offset(long long t) const {
        const long long i = t + center_index;
        if (i < 0 || i >= length()) return {0.0, 0.0};
        return coeffs[static_cast<std::size_t>(i)];
    }

    void validate() const {
        if (coeffs.empty()) throw ConfigError("pulse: empty coefficient vector");
        if (center_index < 0 || center_index >= length())
            throw ConfigError("pulse: center_index outside the coefficient range");
        if (!(Ts > 0.0)) throw ConfigError("pulse: Ts must be positive");
    }
};

inline PrototypeFilter make_unit_power(std::vector<cplx> coeffs, int center_index, double Ts) {
    PrototypeFilter p{std::move(coeffs), center_index, Ts};
    p.validate();
    const double e = p.energy();
    if (!(e > 0.0)) throw ConfigError("pulse: zero energy, cannot normalize");
    const double s = 1.0 / std::sqrt(e);
    for (cplx& c : p.coeffs) c *= s;
    return p;
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

// Fraction of a continuous Gaussian's energy falling outside the truncated
// support. time_scale is the width unit in seconds (see gaussian_pulse);
// 0 selects the default sqrt(length)*Ts.
inline double gaussian_truncation_loss(double alpha, int length, double Ts = 1.0,
                                       double time_scale = 0.0) {
    if (length < 1) throw ConfigError("gaussian: length must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("gaussian: alpha must be positive");
    const double unit = time_scale > 0.0 ? time_scale : std::sqrt(static_cast<double>(length)) * Ts;
    // |g|^2 ~ exp(-2 pi alpha t^2); tail mass beyond +-edge via erfc.
    const double edge = (length / 2.0) * Ts / unit;
    return std::erfc(std::sqrt(2.0 * std::numbers::pi * alpha) * edge);
}

// Sampled Gaussian (2 alpha)^(1/4) exp(-pi alpha (t/unit)^2), normalized to
// unit power. The width unit defaults to sqrt(length)*Ts, which keeps the
// pulse simultaneously well-resolved and well-contained for any length;
// lattice-matched construction passes unit = sqrt(N*M)*Ts so that alpha = 1
// matches the lattice aspect ratio and larger alpha shrinks the pulse in time
// while widening it in frequency.
inline PrototypeFilter gaussian_pulse(double alpha, int length, double Ts = 1.0,
                                      double time_scale = 0.0) {
    if (length < 1) throw ConfigError("gaussian: length must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("gaussian: alpha must be positive");
    if (!(Ts > 0.0)) throw ConfigError("gaussian: Ts must be positive");
    const double unit = time_scale > 0.0 ? time_scale : std::sqrt(static_cast<double>(length)) * Ts;
    const int center = length / 2;
    std::vector<cplx> c(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
        const double t = (i - center) * Ts / unit;
        c[static_cast<std::size_t>(i)] = std::exp(-std::numbers::pi * alpha * t * t);
    }
    return make_unit_power(std::move(c), center, Ts);
}

// Unit-power rectangle of the given length.
inline PrototypeFilter rect_pulse(int length, double Ts = 1.0) {
    if (length < 1) throw ConfigError("rect: length must be >= 1");
    std::vector<cplx> c(static_cast<std::size_t>(length), cplx{1.0, 0.0});
    return make_unit_power(std::move(c), length / 2, Ts);
}

// CP-OFDM transmit/receive pair under the centered convention: the transmit
// rectangle spans the full symbol period (N samples, half of the prefix on
// each side of the receive window), the receive rectangle spans 1/F
// (M samples). Both unit power, so <gamma, g> = sqrt(M/N).
inline std::pair<PrototypeFilter, PrototypeFilter> cp_ofdm_pair(const Numerology& num) {
    num.validate();
    return {rect_pulse(num.N, num.Ts), rect_pulse(num.M, num.Ts)};
}

// SNR penalty of the mismatched CP-OFDM pair: the receiver captures only
// M/N of the pulse's energy, i.e. 10*log10(TF) dB.
inline double cp_mismatch_loss_db(const Numerology& num) {
    num.validate();
    return 10.0 * std::log10(num.TF());
}

// ZP-OFDM pair: transmit rectangle of N samples, receive rectangle extended
// by the zero-postfix length so it captures the full dispersed symbol.
inline std::pair<PrototypeFilter, PrototypeFilter> zp_ofdm_pair(const Numerology& num,
                                                                int t_zp_samples) {
    num.validate();
    if (t_zp_samples < 0) throw ConfigError("zp pair: postfix length must be >= 0");
    return {rect_pulse(num.N, num.Ts), rect_pulse(num.N + t_zp_samples, num.Ts)};
}

// Windowed-OFDM transmit pulse: seed window w (unit coefficient sum)
// convolved with a length-N rectangle. The result has a flat midsection of
// N - N0 + 1 samples at the seed's sum and raised ramps over N0 - 1 samples
// at each edge. design_length > 0 zero-pads the result symmetrically.
inline PrototypeFilter wofdm_pulse_from_seed(const Numerology& num,
                                             const std::vector<double>& seed,
                                             int design_length = 0) {
    num.validate();
    const int n0 = static_cast<int>(seed.size());
    if (n0 < 1) throw ConfigError("wofdm: empty seed window");
    if (n0 > num.N) throw ConfigError("wofdm: seed window longer than the symbol period");
    double sum = 0.0;
    for (double v : seed) sum += v;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("wofdm: seed window coefficients must sum to 1, got " +
                          std::to_string(sum));

    const int raw_len = num.N + n0 - 1;
    std::vector<cplx> c(static_cast<std::size_t>(raw_len), cplx{0.0, 0.0});
    // convolution with the all-ones rectangle = sliding sum of the seed
    for (int i = 0; i < raw_len; ++i) {
        double acc = 0.0;
        for (int k = std::max(0, i - num.N + 1); k <= std::min(n0 - 1, i); ++k)
            acc += seed[static_cast<std::size_t>(k)];
        c[static_cast<std::size_t>(i)] = acc;
    }

    int pad_left = 0;
    if (design_length > 0) {
        if (design_length < raw_len)
            throw ConfigError("wofdm: design_length shorter than the constructed pulse");
        pad_left = (design_length - raw_len) / 2;
        std::vector<cplx> padded(static_cast<std::size_t>(design_length), cplx{0.0, 0.0});
        std::copy(c.begin(), c.end(), padded.begin() + pad_left);
        c = std::move(padded);
    }
    const int total = design_length > 0 ? design_length : raw_len;
    return make_unit_power(std::move(c), total / 2, num.Ts);
}

inline PrototypeFilter wofdm_pulse(const Numerology& num, WindowSpec seed_spec,
                                   int design_length = 0) {
    seed_spec.validate();
    std::vector<double> w = make_window(seed_spec);
    double sum = 0.0;
    for (double v : w) sum += v;
    if (!(sum > 0.0)) throw ConfigError("wofdm: seed window sums to zero");
    for (double& v : w) v /= sum;
    return wofdm_pulse_from_seed(num, w, design_length);
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

struct LocalizationReport {
    double sigma_t = 0.0; // RMS time spread, seconds
    double sigma_f = 0.0; // RMS frequency spread, Hz
    double xi = 0.0;      // Heisenberg parameter, in (0, 1]; 1 iff Gaussian
};

// Second-moment localization. The frequency moments are evaluated on the DFT
// of the pulse zero-padded by pad_factor so the grid resolves narrow spectral
// features of short pulses.
inline LocalizationReport localization(const PrototypeFilter& p, int pad_factor = 8) {
    p.validate();
    if (pad_factor < 1) throw ConfigError("localization: pad_factor must be >= 1");
    const double e = p.energy();
    if (!(e > 0.0)) throw ConfigError("localization: zero-energy pulse");

    // time moments, weights |g|^2 / energy
    double mean_t = 0.0;
    for (int i = 0; i < p.length(); ++i)
        mean_t += (i - p.center_index) * std::norm(p.coeffs[static_cast<std::size_t>(i)]);
    mean_t /= e;
    double var_t = 0.0;
    for (int i = 0; i < p.length(); ++i) {
        const double d = (i - p.center_index) - mean_t;
        var_t += d * d * std::norm(p.coeffs[static_cast<std::size_t>(i)]);
    }
    var_t /= e;

    // frequency moments on the padded DFT grid, f in cycles/sample
    const std::size_t L = p.coeffs.size() * static_cast<std::size_t>(pad_factor);
    std::vector<cplx> padded(L, cplx{0.0, 0.0});
    std::copy(p.coeffs.begin(), p.coeffs.end(), padded.begin());
    const std::vector<cplx> spec = detail::FftEngine::forward(padded);
    double w_sum = 0.0, mean_f = 0.0;
    std::vector<double> freq(L), w(L);
    for (std::size_t k = 0; k < L; ++k) {
        const double fk = (k < L / 2 ? static_cast<double>(k)
                                     : static_cast<double>(k) - static_cast<double>(L)) /
                          static_cast<double>(L);
        freq[k] = fk;
        w[k] = std::norm(spec[k]);
        w_sum += w[k];
        mean_f += fk * w[k];
    }
    mean_f /= w_sum;
    double var_f = 0.0;
    for (std::size_t k = 0; k < L; ++k) {
        const double d = freq[k] - mean_f;
        var_f += d * d * w[k];
    }
    var_f /= w_sum;

    LocalizationReport r;
    r.sigma_t = std::sqrt(var_t) * p.Ts;          // samples -> seconds
    r.sigma_f = std::sqrt(var_f) / p.Ts;          // cycles/sample -> Hz
    const double product = r.sigma_t * r.sigma_f;
    r.xi = product > 0.0 ? 1.0 / (4.0 * std::numbers::pi * product) : 0.0;
    return r;
}

// Cross-ambiguity A(tau, nu) = sum_t gamma(t) g*(t - tau) exp(-j 2 pi nu t),
// with t counted in samples from each pulse's center (the shared origin),
// tau an integer sample delay and nu in cycles/sample. For unit-power pulses
// |A| <= 1 with equality at the matched point of a matched pair.
inline cplx cross_ambiguity(const PrototypeFilter& g, const PrototypeFilter& gamma,
                            long long tau, double nu) {
    g.validate();
    gamma.validate();
    // overlap of gamma's support and g's support shifted by tau
    const long long lo = std::max<long long>(-gamma.center_index, tau - g.center_index);
    const long long hi = std::min<long long>(gamma.length() - 1 - gamma.center_index,
                                             tau + g.length() - 1 - g.center_index);
    cplx acc{0.0, 0.0};
    for (long long t = lo; t <= hi; ++t) {
        const cplx phase = std::polar(1.0, -2.0 * std::numbers::pi * nu * static_cast<double>(t));
        acc += gamma.at_offset(t) * std::conj(g.at_offset(t - tau)) * phase;
    }
    return acc;
}

} // namespace pulseforge
