// SPDX-License-Identifier: Apache-2.0
//
// Compares receive filters on a doubly dispersive channel: the closed-form
// lattice SINR against a Monte-Carlo link run for the CP pair, then the
// designed max-SINR receiver against matched and rect filtering.

#include <cmath>
#include <cstdio>

#include "pulseforge/channel.hpp"
#include "pulseforge/gabor.hpp"
#include "pulseforge/linksim.hpp"
#include "pulseforge/sinr.hpp"

using namespace pulseforge;

int main() {
    const Numerology num{32, 36};
    const ScatteringStats stats = brick_scattering(4.0, 0.01, 8, 8);
    const double snr_db = 25.0;
    SinrConfig sc;
    sc.sigma_n2 = std::pow(10.0, -snr_db / 10.0);

    std::printf("channel: %d paths over |tau| <= %.0f samples, |nu| <= %.3f "
                "cycles/sample, SNR %.0f dB\n\n",
                stats.path_count(), stats.tau_max, stats.nu_max, snr_db);

    const auto [cp_tx, cp_rx] = cp_ofdm_pair(num);
    const double cp_closed = sinr_discrete(cp_tx, cp_rx, num, stats, sc);
    LinkConfig lc;
    lc.snr_db = snr_db;
    lc.n_frames = 2000;
    lc.seed = 12;
    const LinkReport run = run_link(cp_tx, cp_rx, num, stats, lc);
    std::printf("cp pair     closed-form %6.3f dB   simulated %6.3f dB "
                "(SER %.4f)\n",
                cp_closed, run.measured_sinr_db, run.ser);

    const double unit = std::sqrt(static_cast<double>(num.N) * num.M);
    const PrototypeFilter tight =
        orthogonalize({gaussian_pulse(1.0, 8 * num.N, num.Ts, unit), num});
    const double matched = sinr_discrete(tight, tight, num, stats, sc);
    const double rect_rx = sinr_discrete(tight, rect_pulse(num.M, num.Ts), num, stats, sc);
    const EigenSolution sol = max_sinr_receiver(tight, num, stats, sc, tight.length());
    std::printf("tight tx    matched rx  %6.3f dB   rect rx   %6.3f dB   "
                "designed rx %6.3f dB\n",
                matched, rect_rx, 10.0 * std::log10(sol.zeta_max));
    return 0;
}
