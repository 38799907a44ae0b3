// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pulseforge/errors.hpp"
#include "pulseforge/fft.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/transceiver.hpp"
#include "pulseforge/window.hpp"

namespace pulseforge {

inline constexpr double kPsdFloorDb = -400.0;

struct PsdEstimate {
    std::vector<double> freq_hz;    // centered axis, DC in the middle
    std::vector<double> psd_db;     // dB relative to the median in-band level
    std::vector<double> psd_linear; // per-bin power; sums to the mean signal power
    double band_edge_hz = 0.0;      // in-band half-width used for the 0 dB reference

    int n_bins() const { return static_cast<int>(freq_hz.size()); }
};

// Welch averaged periodogram with a Hann taper.  `overlap` is the fraction of
// each segment shared with the next; `band_edge_hz` = 0 references the median
// of the whole axis instead of an in-band region.
inline PsdEstimate estimate_psd(const FrameSignal& sig, int segment, double overlap,
                                double band_edge_hz = 0.0) {
    if (segment < 8 || segment % 2 != 0)
        throw ConfigError("estimate_psd: segment must be even and at least 8");
    if (!(overlap >= 0.0) || overlap >= 1.0)
        throw ConfigError("estimate_psd: overlap must lie in [0, 1)");
    if (!(sig.Ts > 0.0)) throw ConfigError("estimate_psd: sample period must be positive");
    if (band_edge_hz < 0.0) throw ConfigError("estimate_psd: band edge must be nonnegative");

    const long long len = sig.length();
    const long long hop =
        std::max<long long>(1, std::llround(segment * (1.0 - overlap)));
    const long long n_seg = len < segment ? 0 : 1 + (len - segment) / hop;
    if (n_seg < 2)
        throw ConfigError("estimate_psd: signal must cover at least two segments");

    const std::vector<double> w =
        make_window({WindowKind::Hanning, 0.0, segment});
    double w2 = 0.0;
    for (double v : w) w2 += v * v;

    std::vector<double> acc(static_cast<std::size_t>(segment), 0.0);
    std::vector<cplx> buf(static_cast<std::size_t>(segment));
    for (long long s = 0; s < n_seg; ++s) {
        const std::size_t base = static_cast<std::size_t>(s * hop);
        for (int i = 0; i < segment; ++i)
            buf[static_cast<std::size_t>(i)] =
                sig.samples[base + static_cast<std::size_t>(i)] *
                w[static_cast<std::size_t>(i)];
        const std::vector<cplx> spec = detail::FftEngine::forward(buf);
        for (int i = 0; i < segment; ++i)
            acc[static_cast<std::size_t>(i)] += std::norm(spec[static_cast<std::size_t>(i)]);
    }
    const double scale = 1.0 / (static_cast<double>(n_seg) * segment * w2);

    PsdEstimate out;
    out.band_edge_hz = band_edge_hz;
    out.freq_hz.resize(static_cast<std::size_t>(segment));
    out.psd_linear.resize(static_cast<std::size_t>(segment));
    const double df = 1.0 / (segment * sig.Ts);
    for (int i = 0; i < segment; ++i) {
        const int k = i - segment / 2;                      // centered axis
        const int src = (k + segment) % segment;            // unshifted bin
        out.freq_hz[static_cast<std::size_t>(i)] = k * df;
        out.psd_linear[static_cast<std::size_t>(i)] =
            acc[static_cast<std::size_t>(src)] * scale;
    }

    std::vector<double> inband;
    for (int i = 0; i < segment; ++i)
        if (band_edge_hz == 0.0 ||
            std::abs(out.freq_hz[static_cast<std::size_t>(i)]) <= band_edge_hz)
            inband.push_back(out.psd_linear[static_cast<std::size_t>(i)]);
    if (inband.empty())
        throw ConfigError("estimate_psd: band edge excludes every frequency bin");
    const std::size_t mid = inband.size() / 2;
    std::nth_element(inband.begin(), inband.begin() + static_cast<std::ptrdiff_t>(mid),
                     inband.end());
    const double ref = inband[mid];

    out.psd_db.resize(static_cast<std::size_t>(segment));
    for (int i = 0; i < segment; ++i) {
        const double v = out.psd_linear[static_cast<std::size_t>(i)];
        out.psd_db[static_cast<std::size_t>(i)] =
            (v > 0.0 && ref > 0.0)
                ? std::max(10.0 * std::log10(v / ref), kPsdFloorDb)
                : kPsdFloorDb;
    }
    return out;
}

// Smallest single-side guard count, in subcarrier spacings beyond the band
// edge, past which every bin stays at or below `mask_db`.  Returns -1 when the
// mask is never met inside the analyzed span.
inline int guard_subcarriers(const PsdEstimate& psd, const Numerology& num,
                             double mask_db) {
    num.validate();
    if (psd.n_bins() == 0) throw ConfigError("guard_subcarriers: empty estimate");
    const double F = 1.0 / (static_cast<double>(num.M) * num.Ts);
    const double edge = psd.band_edge_hz;
    const double max_f = std::max(std::abs(psd.freq_hz.front()), std::abs(psd.freq_hz.back()));
    if (max_f < edge + 64.0 * F)
        throw ConfigError("guard_subcarriers: estimate must cover 64 spacings past the edge");

    const int g_limit = static_cast<int>(std::floor((max_f - edge) / F));
    int needed = 0;
    for (int i = 0; i < psd.n_bins(); ++i) {
        const double f = std::abs(psd.freq_hz[static_cast<std::size_t>(i)]);
        if (f < edge) continue;
        if (psd.psd_db[static_cast<std::size_t>(i)] <= mask_db) continue;
        const int g = static_cast<int>(std::floor((f - edge) / F)) + 1;
        needed = std::max(needed, g);
    }
    return needed > g_limit ? -1 : needed;
}

enum class PaKind { IDEAL, RAPP };

struct PaModel {
    PaKind kind = PaKind::IDEAL;
    double p = 2.0;             // Rapp smoothness
    double input_backoff = 0.0; // dB below the saturation-referred drive

    void validate() const {
        if (kind == PaKind::RAPP && !(p > 0.0))
            throw ConfigError("PaModel: Rapp smoothness must be positive");
    }
};

// Memoryless AM/AM pass.  Rapp compresses toward a unit saturation level in
// the backed-off drive domain and restores the small-signal gain afterwards.
inline FrameSignal apply_pa(const FrameSignal& sig, const PaModel& pa) {
    pa.validate();
    if (pa.kind == PaKind::IDEAL) return sig;
    FrameSignal out = sig;
    const double s = std::pow(10.0, -pa.input_backoff / 20.0);
    for (cplx& v : out.samples) {
        const cplx u = s * v;
        v = u / (s * std::pow(1.0 + std::pow(std::abs(u), 2.0 * pa.p), 1.0 / (2.0 * pa.p)));
    }
    return out;
}

} // namespace pulseforge
