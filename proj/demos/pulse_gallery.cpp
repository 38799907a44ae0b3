// SPDX-License-Identifier: Apache-2.0
//
// Builds the stock prototype pulses for one desk-scale numerology and prints
// their time-frequency localization and lattice self-interference, plus the
// cross-ambiguity decay of the tight pulse.

#include <cstdio>

#include "pulseforge/gabor.hpp"
#include "pulseforge/pulse.hpp"

using namespace pulseforge;

namespace {

void report(const char* name, const PrototypeFilter& g, const Numerology& num) {
    const LocalizationReport loc = localization(g);
    const double sir = sir_self(g, g, num);
    std::printf("%-10s %5d   %8.3f %8.5f   %6.4f   %8.2f\n", name, g.length(),
                loc.sigma_t, loc.sigma_f, loc.xi, sir);
}

} // namespace

int main() {
    const Numerology num{64, 72};
    std::printf("numerology: M=%d N=%d (TF=%.3f)\n\n", num.M, num.N, num.TF());
    std::printf("%-10s %5s   %8s %8s   %6s   %8s\n", "pulse", "len", "sigma_t",
                "sigma_f", "xi", "SIR dB");

    report("rect", rect_pulse(num.N, num.Ts), num);
    report("wofdm", wofdm_pulse(num, {WindowKind::Rc, 0.25, num.N}, 2 * num.N), num);

    const double unit = std::sqrt(static_cast<double>(num.N) * num.M);
    const PrototypeFilter tight =
        orthogonalize({gaussian_pulse(1.0, 8 * num.N, num.Ts, unit), num});
    report("tight", tight, num);

    OrthoDesignConfig cfg;
    cfg.max_iters = 80;
    const OrthoDesignReport designed = design_orthogonal(cfg, num);
    report("designed", designed.pulse, num);
    std::printf("\ndesigned pulse: %d iterations, %s\n", designed.iterations,
                designed.converged ? "converged" : "not converged");

    std::printf("\ntight-pulse ambiguity magnitude |A(tau, nu)|\n");
    std::printf("%6s", "");
    for (double nu : {0.0, 0.005, 0.01}) std::printf("  nu=%-6.3f", nu);
    std::printf("\n");
    for (long long tau : {0ll, 4ll, 8ll, 16ll, 32ll}) {
        std::printf("tau=%-3lld", tau);
        for (double nu : {0.0, 0.005, 0.01})
            std::printf("  %9.5f", std::abs(cross_ambiguity(tight, tight, tau, nu)));
        std::printf("\n");
    }
    return 0;
}
