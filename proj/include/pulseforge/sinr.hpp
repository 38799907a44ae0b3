// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/channel.hpp"
#include "pulseforge/errors.hpp"
#include "pulseforge/fft.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/parallel.hpp"
#include "pulseforge/pulse.hpp"

namespace pulseforge {

struct SinrConfig {
    double sigma_n2 = 0.0; // linear noise power per receive sample; 0 -> SIR
    int n_range = 0;       // time neighborhood |n| <= n_range; 0 -> automatic
    int m_range = 0;       // modulation neighborhood |m| <= m_range; 0 -> all M

    void validate() const {
        if (sigma_n2 < 0.0) throw ConfigError("sinr: noise power must be >= 0");
        if (n_range < 0 || m_range < 0) throw ConfigError("sinr: neighborhood must be >= 0");
    }
};

namespace detail {

// Time neighborhood that provably covers every nonzero cross term: pulses of
// the given lengths, shifted by up to tau_max samples, stop overlapping one
// symbol beyond their combined span.
inline int auto_n_range(int len_a, int len_b, const Numerology& num, double tau_max) {
    const double longest = static_cast<double>(std::max(len_a, len_b));
    return static_cast<int>(std::ceil((longest + tau_max) / num.N)) + 1;
}

// Cross coefficients <gamma, D_p g_{m,n}> for every modulation m at once,
// where D_p delays by tau and modulates by exp(j 2 pi nu t) about the lattice
// origin: fold the lag product modulo M, then one length-M DFT (+j kernel).
inline std::vector<cplx> path_cross_row(const PrototypeFilter& g, const PrototypeFilter& gamma,
                                        const Numerology& num, long long n, long long tau,
                                        double nu) {
    const long long shift = tau + n * num.N;
    std::vector<cplx> fold(static_cast<std::size_t>(num.M), cplx{0.0, 0.0});
    const long long lo = std::max<long long>(-gamma.center_index, shift - g.center_index);
    const long long hi = std::min<long long>(gamma.length() - 1 - gamma.center_index,
                                             shift + g.length() - 1 - g.center_index);
    for (long long t = lo; t <= hi; ++t) {
        const long long u = t - shift;
        const long long v = ((u % num.M) + num.M) % num.M;
        fold[static_cast<std::size_t>(v)] +=
            std::conj(gamma.at_offset(t)) * g.at_offset(u) *
            std::polar(1.0, 2.0 * std::numbers::pi * nu * static_cast<double>(t));
    }
    return FftEngine::inverse(fold);
}

// Modulation bins within |m| <= m_range, each distinct residue counted once.
inline bool bin_in_range(std::size_t v, int M, int m_range) {
    const int d = std::min<int>(static_cast<int>(v), M - static_cast<int>(v));
    return d <= m_range;
}

} // namespace detail

// Expected useful power over expected leakage-plus-noise power of the pulse
// pair on the lattice, under the given scattering statistics: the wanted term
// is the (0,0) lattice point, every other (m,n) in the neighborhood leaks,
// and the noise adds sigma_n2 (gamma has unit power). Returns dB, capped at
// +-300 when the wanted term or the denominator underflows. With sigma_n2 = 0
// this is the pair's SIR under the channel.
inline double sinr_discrete(const PrototypeFilter& g, const PrototypeFilter& gamma,
                            const Numerology& num, const ScatteringStats& stats,
                            const SinrConfig& cfg) {
    g.validate();
    gamma.validate();
    num.validate();
    stats.validate();
    cfg.validate();
    const int n_range = cfg.n_range > 0
                            ? cfg.n_range
                            : detail::auto_n_range(g.length(), gamma.length(), num, stats.tau_max);
    const int m_range = cfg.m_range > 0 ? cfg.m_range : num.M / 2;

    double signal = 0.0, interference = 0.0;
    for (long long n = -n_range; n <= n_range; ++n) {
        for (const PathComponent& path : stats.paths) {
            const std::vector<cplx> row = detail::path_cross_row(
                g, gamma, num, n, static_cast<long long>(std::llround(path.tau)), path.nu);
            for (std::size_t v = 0; v < row.size(); ++v) {
                if (!detail::bin_in_range(v, num.M, m_range)) continue;
                const double p = path.power * std::norm(row[v]);
                if (n == 0 && v == 0) signal += p;
                else interference += p;
            }
        }
    }
    if (!(signal > 0.0)) return -300.0;
    const double denom = interference + cfg.sigma_n2;
    if (denom < signal * 1e-30) return 300.0;
    return 10.0 * std::log10(signal / denom);
}

struct SinrGrid {
    std::vector<double> tau_axis; // samples
    std::vector<double> nu_axis;  // cycles/sample
    Eigen::MatrixXd values_db;    // tau_axis.size() x nu_axis.size()
};

// SINR surface over delay/Doppler spreads: each grid point evaluates the pair
// under a brick scattering of that support (the origin point uses the ideal
// single-path channel). Points are independent and evaluated in parallel.
inline SinrGrid sinr_contour(const PrototypeFilter& g, const PrototypeFilter& gamma,
                             const Numerology& num, const SinrConfig& cfg,
                             const std::vector<double>& tau_points,
                             const std::vector<double>& nu_points, int grid_tau = 8,
                             int grid_nu = 8, unsigned threads = 0) {
    if (tau_points.empty() || nu_points.empty())
        throw ConfigError("contour: empty axis");
    if (!std::is_sorted(tau_points.begin(), tau_points.end()) ||
        !std::is_sorted(nu_points.begin(), nu_points.end()))
        throw ConfigError("contour: axes must be sorted ascending");
    if (tau_points.front() < 0.0 || nu_points.front() < 0.0)
        throw ConfigError("contour: spreads must be >= 0");

    SinrGrid grid;
    grid.tau_axis = tau_points;
    grid.nu_axis = nu_points;
    grid.values_db.resize(static_cast<Eigen::Index>(tau_points.size()),
                          static_cast<Eigen::Index>(nu_points.size()));
    const std::size_t total = tau_points.size() * nu_points.size();
    parallel_for(total, resolve_threads(threads), [&](std::size_t idx) {
        const std::size_t i = idx / nu_points.size();
        const std::size_t j = idx % nu_points.size();
        const double tau = tau_points[i];
        const double nu = nu_points[j];
        const ScatteringStats stats =
            (tau == 0.0 && nu == 0.0)
                ? brick_scattering(0.0, 0.0, 1, 1)
                : brick_scattering(tau, nu, tau > 0.0 ? grid_tau : 1, nu > 0.0 ? grid_nu : 1);
        grid.values_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            sinr_discrete(g, gamma, num, stats, cfg);
    });
    return grid;
}

struct EigenSolution {
    PrototypeFilter gamma_max;
    double zeta_max = 0.0; // linear
    bool regularized = false;
    double residual = 0.0; // ||A x - zeta B x|| / ||B x||
};

namespace detail {

// Largest generalized eigenpair of (A, B) for Hermitian A and Hermitian
// positive-definite B, via Cholesky B = C C^H and a standard Hermitian solve
// on C^{-1} A C^{-H}.
inline void max_generalized_eigen(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                  Eigen::VectorXcd& x, double& zeta, double& residual) {
    Eigen::LLT<Eigen::MatrixXcd> llt(B);
    if (llt.info() != Eigen::Success)
        throw NumericalError("eigen: denominator matrix is not positive definite");
    const Eigen::MatrixXcd Y = llt.matrixL().solve(A);
    Eigen::MatrixXcd W = llt.matrixL().solve(Y.adjoint()).adjoint();
    W = (W + W.adjoint().eval()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(W);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigen: Hermitian eigensolve failed");
    const Eigen::Index last = W.rows() - 1;
    zeta = es.eigenvalues()(last);
    x = llt.matrixU().solve(es.eigenvectors().col(last));
    x.normalize();
    const Eigen::VectorXcd bx = B * x;
    residual = (A * x - zeta * bx).norm() / bx.norm();
}

// Accumulated quadratic-form matrices of the lattice neighborhood: A from the
// wanted (0,0) point, B from every other point, both weighted by the path
// powers. Shared by the receiver design and its role-exchanged twin.
inline void build_quadratics(const PrototypeFilter& g, const Numerology& num,
                             const ScatteringStats& stats, int n_range, int L,
                             Eigen::MatrixXcd& A, Eigen::MatrixXcd& B) {
    Eigen::VectorXd powers(stats.path_count());
    for (int p = 0; p < stats.path_count(); ++p) powers(p) = stats.paths[static_cast<std::size_t>(p)].power;
    A.setZero(L, L);
    B.setZero(L, L);
    for (long long n = -n_range; n <= n_range; ++n) {
        for (int v = 0; v < num.M; ++v) {
            const int m = v <= num.M / 2 ? v : v - num.M;
            const Eigen::MatrixXcd G = shifted_pulse_matrix(g, num, m, n, stats, L);
            const Eigen::MatrixXcd Q = G * powers.asDiagonal() * G.adjoint();
            if (n == 0 && v == 0) A += Q;
            else B += Q;
        }
    }
}

// Deterministic output phase: rotate so the largest-magnitude coefficient is
// real positive (eigenvectors are otherwise defined only up to phase).
inline void canonicalize_phase(Eigen::VectorXcd& x) {
    Eigen::Index peak = 0;
    x.cwiseAbs().maxCoeff(&peak);
    const cplx c = x(peak);
    if (std::abs(c) > 0.0) x *= std::conj(c) / std::abs(c);
}

} // namespace detail

// Receive filter maximizing the expected SINR for a fixed transmit pulse:
// the largest generalized eigenvector of the wanted-term quadratic against
// the leakage-plus-noise quadratic over a length-L receive window centered on
// the lattice origin. With sigma_n2 = 0 the denominator is singular whenever
// leakage does not span the window; a ridge of 1e-12 * trace/L is added and
// flagged in that case.
inline EigenSolution max_sinr_receiver(const PrototypeFilter& g, const Numerology& num,
                                       const ScatteringStats& stats, const SinrConfig& cfg,
                                       int L) {
    g.validate();
    num.validate();
    stats.validate();
    cfg.validate();
    if (L < 1) throw ConfigError("receiver design: window length must be >= 1");
    const int n_range =
        cfg.n_range > 0 ? cfg.n_range : detail::auto_n_range(g.length(), L, num, stats.tau_max);

    Eigen::MatrixXcd A, B;
    detail::build_quadratics(g, num, stats, n_range, L, A, B);

    EigenSolution sol;
    if (cfg.sigma_n2 > 0.0) {
        B.diagonal().array() += cfg.sigma_n2;
    } else {
        const double ridge = 1e-12 * B.trace().real() / L;
        B.diagonal().array() += ridge > 0.0 ? ridge : 1e-300;
        sol.regularized = true;
    }

    Eigen::VectorXcd x;
    detail::max_generalized_eigen(A, B, x, sol.zeta_max, sol.residual);
    detail::canonicalize_phase(x);
    std::vector<cplx> coeffs(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) coeffs[static_cast<std::size_t>(i)] = x(i);
    sol.gamma_max = make_unit_power(std::move(coeffs), L / 2, g.Ts);
    return sol;
}

struct JointDesignConfig {
    SinrConfig sinr;
    int filter_length = 0;  // both pulses live on this window
    double epsilon = 1e-4;  // stop when both relative changes fall below this
    int max_iters = 50;
};

struct JointDesignReport {
    PrototypeFilter g;
    PrototypeFilter gamma;
    int iterations = 0;
    bool converged = false;
    bool regularized = false;
    std::vector<double> zeta_trace; // linear, one entry per half-step
};

namespace detail {

inline PrototypeFilter embed_centered(const PrototypeFilter& p, int L) {
    if (p.length() > L)
        throw ConfigError("joint design: initial pulse longer than the filter length");
    std::vector<cplx> c(static_cast<std::size_t>(L), cplx{0.0, 0.0});
    const int base = L / 2 - p.center_index;
    for (int i = 0; i < p.length(); ++i) c[static_cast<std::size_t>(base + i)] = p.coeffs[static_cast<std::size_t>(i)];
    return make_unit_power(std::move(c), L / 2, p.Ts);
}

// Relative change between unit-power iterates, minimized over the irrelevant
// global phase.
inline double aligned_delta(const PrototypeFilter& next, const PrototypeFilter& prev) {
    cplx inner{0.0, 0.0};
    for (int i = 0; i < next.length(); ++i)
        inner += std::conj(prev.coeffs[static_cast<std::size_t>(i)]) *
                 next.coeffs[static_cast<std::size_t>(i)];
    const double a = std::abs(inner);
    const cplx rot = a > 0.0 ? std::conj(inner) / a : cplx{1.0, 0.0};
    double d = 0.0;
    for (int i = 0; i < next.length(); ++i)
        d += std::norm(rot * next.coeffs[static_cast<std::size_t>(i)] -
                       prev.coeffs[static_cast<std::size_t>(i)]);
    return std::sqrt(d);
}

} // namespace detail

// Alternating transmit/receive optimization: each half-step solves the exact
// max-SINR problem with the other side held fixed (the transmit half-step is
// the same Rayleigh quotient with the roles of the two pulses exchanged,
// which leaves the objective invariant because the scattering box and the
// lattice neighborhood are origin-symmetric). The SINR sequence is therefore
// non-decreasing across half-steps up to solver tolerance. Stops when both
// pulses move by less than epsilon in relative norm; if the budget runs out
// the best (latest) iterate is returned with converged = false.
inline JointDesignReport joint_design(const PrototypeFilter& g0, const Numerology& num,
                                      const ScatteringStats& stats,
                                      const JointDesignConfig& cfg) {
    g0.validate();
    num.validate();
    stats.validate();
    cfg.sinr.validate();
    if (!(cfg.epsilon > 0.0)) throw ConfigError("joint design: epsilon must be positive");
    if (cfg.max_iters < 1) throw ConfigError("joint design: max_iters must be >= 1");
    const int L = cfg.filter_length > 0 ? cfg.filter_length : g0.length();

    JointDesignReport rep;
    rep.g = detail::embed_centered(g0, L);
    rep.gamma = rep.g;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const EigenSolution rx = max_sinr_receiver(rep.g, num, stats, cfg.sinr, L);
        const double d_gamma = detail::aligned_delta(rx.gamma_max, rep.gamma);
        rep.gamma = rx.gamma_max;
        rep.regularized = rep.regularized || rx.regularized;
        rep.zeta_trace.push_back(rx.zeta_max);

        const EigenSolution tx = max_sinr_receiver(rep.gamma, num, stats, cfg.sinr, L);
        const double d_g = detail::aligned_delta(tx.gamma_max, rep.g);
        rep.g = tx.gamma_max;
        rep.regularized = rep.regularized || tx.regularized;
        rep.zeta_trace.push_back(tx.zeta_max);

        rep.iterations = it;
        if (d_gamma <= cfg.epsilon && d_g <= cfg.epsilon) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

} // namespace pulseforge
