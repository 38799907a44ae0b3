// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/errors.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/rng.hpp"

namespace pulseforge {

// One discrete path of a wide-sense-stationary uncorrelated-scattering
// channel: integer-sample delay, Doppler in cycles per sample, linear power.
struct PathComponent {
    double tau = 0.0;
    double nu = 0.0;
    double power = 0.0;
};

// Second-order channel description: a finite set of (delay, Doppler, power)
// mass points. Powers are the diagonal of the scattering matrix and sum to 1.
struct ScatteringStats {
    std::vector<PathComponent> paths;
    double tau_max = 0.0; // samples, declared support half-width
    double nu_max = 0.0;  // cycles/sample, declared support half-width

    int path_count() const { return static_cast<int>(paths.size()); }

    void validate() const {
        if (paths.empty()) throw ConfigError("scattering: no paths");
        if (tau_max < 0.0 || nu_max < 0.0)
            throw ConfigError("scattering: support bounds must be >= 0");
        double sum = 0.0;
        for (const PathComponent& p : paths) {
            if (p.power < 0.0) throw ConfigError("scattering: negative path power");
            if (std::abs(p.tau - std::round(p.tau)) > 1e-9)
                throw ConfigError("scattering: fractional delay " + std::to_string(p.tau) +
                                  "; delays must be whole samples");
            if (std::abs(p.tau) > tau_max + 1e-9)
                throw ConfigError("scattering: delay outside the declared support");
            if (std::abs(p.nu) > nu_max + 1e-12)
                throw ConfigError("scattering: Doppler outside the declared support");
            sum += p.power;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("scattering: powers must sum to 1, got " + std::to_string(sum));
    }
};

// One random draw of the path gains.
struct ChannelRealization {
    std::vector<cplx> gains;
};

// Uniform tensor grid over the origin-centered box [-tau_max, tau_max] x
// [-nu_max, nu_max] with equal powers 1/P. Grid delays are rounded to whole
// samples (the model is sample-spaced; see ScatteringStats::validate).
inline ScatteringStats brick_scattering(double tau_max, double nu_max,
                                        int n_tau, int n_nu) {
    if (n_tau < 1 || n_nu < 1) throw ConfigError("brick scattering: grid dimensions must be >= 1");
    if (tau_max < 0.0 || nu_max < 0.0)
        throw ConfigError("brick scattering: support bounds must be >= 0");
    ScatteringStats s;
    s.tau_max = tau_max;
    s.nu_max = nu_max;
    const double w = 1.0 / (static_cast<double>(n_tau) * static_cast<double>(n_nu));
    for (int i = 0; i < n_tau; ++i) {
        const double frac_t = n_tau == 1 ? 0.5 : static_cast<double>(i) / (n_tau - 1);
        const double tau = std::round(-tau_max + 2.0 * tau_max * frac_t);
        for (int j = 0; j < n_nu; ++j) {
            const double frac_f = n_nu == 1 ? 0.5 : static_cast<double>(j) / (n_nu - 1);
            const double nu = -nu_max + 2.0 * nu_max * frac_f;
            s.paths.push_back({tau, nu, w});
        }
    }
    s.validate();
    return s;
}

// Independent zero-mean circularly symmetric complex Gaussian gains with
// variances equal to the path powers, drawn from the caller's stream.
inline ChannelRealization draw_realization(const ScatteringStats& stats, Rng& rng) {
    stats.validate();
    ChannelRealization r;
    r.gains.reserve(stats.paths.size());
    for (const PathComponent& p : stats.paths) r.gains.push_back(rng.cgauss(p.power));
    return r;
}

inline ChannelRealization draw_realization(const ScatteringStats& stats, std::uint64_t seed) {
    Rng rng(seed);
    return draw_realization(stats, rng);
}

// Per-path propagated copies of the lattice-shifted pulse, windowed to the
// receive observation span. Row r of the result is the receive-time offset
// t = r - receive_length/2 from the lattice origin (the (0,0) symbol center);
// column p holds g_{m,n}(t - tau_p) e^{j 2 pi nu_p t}, where
// g_{m,n}(t) = g(t - nN) e^{j 2 pi m (t - nN) / M}. The Doppler phase is
// referenced to the lattice origin, matching the ambiguity convention.
inline Eigen::MatrixXcd shifted_pulse_matrix(const PrototypeFilter& g, const Numerology& num,
                                             int m, long long n, const ScatteringStats& stats,
                                             int receive_length) {
    g.validate();
    num.validate();
    stats.validate();
    if (receive_length < 1) throw ConfigError("shifted pulses: receive length must be >= 1");
    if (m >= num.M || m <= -num.M)
        throw ConfigError("shifted pulses: modulation index |m| must be < M");

    const int P = stats.path_count();
    const long long half = receive_length / 2;
    Eigen::MatrixXcd G(receive_length, P);
    for (int p = 0; p < P; ++p) {
        const long long tau = static_cast<long long>(std::llround(stats.paths[p].tau));
        const double nu = stats.paths[p].nu;
        for (int r = 0; r < receive_length; ++r) {
            const long long t = r - half;
            const long long u = t - tau - n * num.N;
            const cplx mod = std::polar(1.0, 2.0 * std::numbers::pi *
                                                 (static_cast<double>(m) * static_cast<double>(u) /
                                                      num.M +
                                                  nu * static_cast<double>(t)));
            G(r, p) = g.at_offset(u) * mod;
        }
    }
    return G;
}

} // namespace pulseforge
