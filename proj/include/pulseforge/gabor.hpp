// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/errors.hpp"
#include "pulseforge/fft.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/rng.hpp"
#include "pulseforge/window.hpp"

namespace pulseforge {

struct GaborSystem {
    PrototypeFilter pulse;
    Numerology num;

    void validate() const {
        pulse.validate();
        num.validate();
        if (num.N <= num.M)
            throw ConfigError("gabor: orthogonal designs need TF = N/M > 1");
    }
};

namespace detail {

// Finite-ring workspace for Gabor computations. The lattice (time step N,
// M-periodic modulations) and its adjoint (time step M, N-periodic
// modulations) both close on a ring whose length is a common multiple of
// N and M; pulses are embedded centered at L/2 with tails far from the wrap.
struct GaborRing {
    long long L = 0;
    int N = 0;
    int M = 0;

    static GaborRing make(const Numerology& num, long long min_length) {
        const long long g = std::gcd<long long>(num.N, num.M);
        const long long lcm = static_cast<long long>(num.N) / g * num.M;
        const long long blocks = std::max<long long>(1, (min_length + lcm - 1) / lcm);
        GaborRing r{lcm * blocks, num.N, num.M};
        if (r.L > (1ll << 23))
            throw ConfigError("gabor: ring length " + std::to_string(r.L) +
                              " is impractical; choose N, M with a larger common factor");
        return r;
    }
};

// Contiguous nonzero window [lo, hi] of a ring vector (assumes the support
// does not wrap, which centered embedding guarantees here).
struct Support {
    long long lo = 0;
    long long hi = -1;
    bool empty() const { return hi < lo; }
    long long width() const { return empty() ? 0 : hi - lo + 1; }
};

inline Support find_support(const std::vector<cplx>& x, double rel_tol = 0.0) {
    double peak = 0.0;
    for (const cplx& v : x) peak = std::max(peak, std::norm(v));
    if (peak == 0.0) return {};
    const double floor_sq = peak * rel_tol * rel_tol;
    long long lo = 0, hi = static_cast<long long>(x.size()) - 1;
    while (lo <= hi && std::norm(x[static_cast<std::size_t>(lo)]) <= floor_sq) ++lo;
    while (hi >= lo && std::norm(x[static_cast<std::size_t>(hi)]) <= floor_sq) --hi;
    return {lo, hi};
}

inline void trim_below(std::vector<cplx>& x, double rel_tol) {
    double peak = 0.0;
    for (const cplx& v : x) peak = std::max(peak, std::abs(v));
    const double floor_abs = peak * rel_tol;
    for (cplx& v : x) {
        if (std::abs(v) < floor_abs) v = {0.0, 0.0};
    }
}

// Walnut representation of the adjoint-lattice frame operator
//   (S x)[l] = sum_j W_j[l mod M] x[(l + j N) mod L],
//   W_j[l]   = N * sum_k g[(l - k M) mod L] conj(g[(l - k M + j N) mod L]).
// Only shifts j whose offset j*N lands within the pulse's support width can
// contribute, so the band stays narrow for concentrated pulses.
struct AdjointFrameOperator {
    const GaborRing* ring = nullptr;
    std::vector<long long> offsets;           // active j*N (mod L)
    std::vector<std::vector<cplx>> coeffs;    // per offset, length M

    void build(const GaborRing& r, const std::vector<cplx>& g) {
        ring = &r;
        offsets.clear();
        coeffs.clear();
        const Support s = find_support(g);
        if (s.empty()) throw NumericalError("gabor: zero pulse");
        const long long w = s.width() - 1;
        const long long shifts = r.L / r.N;
        for (long long j = 0; j < shifts; ++j) {
            const long long d = j * r.N % r.L;
            if (d > w && r.L - d > w) continue; // no overlap possible
            std::vector<cplx> row(static_cast<std::size_t>(r.M), cplx{0.0, 0.0});
            bool any = false;
            for (int l = 0; l < r.M; ++l) {
                // a runs over support samples congruent to l mod M
                long long a = s.lo + ((l - s.lo) % r.M + r.M) % r.M;
                cplx acc{0.0, 0.0};
                for (; a <= s.hi; a += r.M) {
                    long long b = a + d;
                    if (b >= r.L) b -= r.L;
                    if (b < s.lo || b > s.hi) continue;
                    acc += g[static_cast<std::size_t>(a)] *
                           std::conj(g[static_cast<std::size_t>(b)]);
                }
                if (acc != cplx{0.0, 0.0}) any = true;
                row[static_cast<std::size_t>(l)] = static_cast<double>(r.N) * acc;
            }
            if (any) {
                offsets.push_back(d);
                coeffs.push_back(std::move(row));
            }
        }
    }

    void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
        const long long L = ring->L;
        y.assign(static_cast<std::size_t>(L), cplx{0.0, 0.0});
        for (std::size_t bi = 0; bi < offsets.size(); ++bi) {
            const long long d = offsets[bi];
            const std::vector<cplx>& w = coeffs[bi];
            for (long long l = 0; l < L; ++l) {
                long long src = l + d;
                if (src >= L) src -= L;
                y[static_cast<std::size_t>(l)] +=
                    w[static_cast<std::size_t>(l % ring->M)] * x[static_cast<std::size_t>(src)];
            }
        }
    }

    // Row-sum (Gershgorin) bounds on the spectrum. upper is a true upper
    // bound; lower can be negative for loose bands and is only a screen.
    void gershgorin(double& lower, double& upper) const {
        upper = 0.0;
        lower = std::numeric_limits<double>::infinity();
        for (int l = 0; l < ring->M; ++l) {
            double diag = 0.0, off = 0.0;
            for (std::size_t bi = 0; bi < offsets.size(); ++bi) {
                const double mag = std::abs(coeffs[bi][static_cast<std::size_t>(l)]);
                if (offsets[bi] == 0)
                    diag = coeffs[bi][static_cast<std::size_t>(l)].real();
                else
                    off += mag;
            }
            upper = std::max(upper, diag + off);
            lower = std::min(lower, diag - off);
        }
    }
};

// Embeds pulse coefficients on the ring with the pulse center at L/2.
inline std::vector<cplx> embed_on_ring(const GaborRing& r, const PrototypeFilter& p) {
    if (p.length() > r.L) throw ConfigError("gabor: pulse longer than the ring");
    std::vector<cplx> x(static_cast<std::size_t>(r.L), cplx{0.0, 0.0});
    const long long base = r.L / 2 - p.center_index;
    for (int i = 0; i < p.length(); ++i) {
        long long idx = (base + i) % r.L;
        if (idx < 0) idx += r.L;
        x[static_cast<std::size_t>(idx)] = p.coeffs[static_cast<std::size_t>(i)];
    }
    return x;
}

inline double ring_norm(const std::vector<cplx>& x) {
    double e = 0.0;
    for (const cplx& v : x) e += std::norm(v);
    return std::sqrt(e);
}

// Newton-Schulz iteration for h = S^{-1/2} g up to scale: with the operator
// rescaled so its spectrum sits in (0, ~1], the map
//   h <- (3/2) h - (1/2) S_h h
// keeps every iterate inside the algebra of functions of the initial frame
// operator applied to g (lattice shifts commute with S), and the scalar
// recursion c <- (3 c - lambda c^3)/2 converges quadratically to
// lambda^{-1/2} on each spectral component. Stalling indicates a (near-)singular
// frame operator.
inline std::vector<cplx> tight_window_iterative(const GaborRing& r, std::vector<cplx> h,
                                                int max_iters, double tol) {
    AdjointFrameOperator op;
    op.build(r, h);
    double lo = 0.0, hi = 0.0;
    op.gershgorin(lo, hi);
    if (!(hi > 0.0)) throw NumericalError("gabor: frame operator bound is not positive");
    if (lo <= hi * 1e-12) {
        // Gershgorin cannot certify invertibility; probe the smallest
        // eigenvalue with shifted power iterations before iterating.
        const double shift = hi * 1.05;
        std::vector<cplx> v(h.size());
        Rng probe_rng(0x5eedULL);
        for (cplx& c : v) c = probe_rng.cgauss();
        std::vector<cplx> sv;
        double mu = 0.0;
        for (int it = 0; it < 60; ++it) {
            const double n = ring_norm(v);
            if (!(n > 0.0)) break;
            for (cplx& c : v) c /= n;
            op.apply(v, sv);
            for (std::size_t i = 0; i < v.size(); ++i) sv[i] = shift * v[i] - sv[i];
            mu = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) mu += (std::conj(v[i]) * sv[i]).real();
            v.swap(sv);
        }
        const double lambda_min = shift - mu;
        if (lambda_min <= hi * 1e-12)
            throw NumericalError("gabor: frame operator numerically singular "
                                 "(condition above ~1e12); invalid lattice/pulse combination");
    }

    const double scale = 1.0 / std::sqrt(hi);
    for (cplx& c : h) c *= scale;

    std::vector<cplx> sh, next(h.size());
    int calm = 0;
    for (int it = 0; it < max_iters; ++it) {
        op.build(r, h);
        op.apply(h, sh);
        double delta_sq = 0.0, norm_sq = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            next[i] = 1.5 * h[i] - 0.5 * sh[i];
            delta_sq += std::norm(next[i] - h[i]);
            norm_sq += std::norm(h[i]);
        }
        h.swap(next);
        trim_below(h, 1e-18);
        if (delta_sq <= tol * tol * norm_sq) {
            if (++calm >= 2) return h;
        } else {
            calm = 0;
        }
    }
    throw NumericalError("gabor: tight-window iteration did not converge; "
                         "frame operator is numerically singular or near-singular");
}

// Dense route: assemble the adjoint frame operator column by column,
// eigendecompose, apply the inverse square root directly. Exact conditioning
// information, O(L^3); reserved for small rings.
inline std::vector<cplx> tight_window_dense(const GaborRing& r, const std::vector<cplx>& g) {
    AdjointFrameOperator op;
    op.build(r, g);
    const std::size_t L = static_cast<std::size_t>(r.L);
    Eigen::MatrixXcd S(L, L);
    std::vector<cplx> e(L, cplx{0.0, 0.0}), col;
    for (std::size_t i = 0; i < L; ++i) {
        e[i] = 1.0;
        op.apply(e, col);
        for (std::size_t u = 0; u < L; ++u) S(static_cast<Eigen::Index>(u),
                                             static_cast<Eigen::Index>(i)) = col[u];
        e[i] = 0.0;
    }
    S = (S + S.adjoint().eval()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S);
    if (es.info() != Eigen::Success)
        throw NumericalError("gabor: dense eigendecomposition failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const double lambda_max = ev(static_cast<Eigen::Index>(L) - 1);
    if (!(lambda_max > 0.0) || ev(0) <= lambda_max * 1e-12)
        throw NumericalError("gabor: frame operator numerically singular "
                             "(condition above ~1e12); invalid lattice/pulse combination");
    Eigen::VectorXcd gv(L);
    for (std::size_t i = 0; i < L; ++i) gv(static_cast<Eigen::Index>(i)) = g[i];
    Eigen::VectorXcd hv = es.eigenvectors() *
                          (ev.array().rsqrt().matrix().asDiagonal() *
                           (es.eigenvectors().adjoint() * gv));
    std::vector<cplx> h(L);
    for (std::size_t i = 0; i < L; ++i) h[i] = hv(static_cast<Eigen::Index>(i));
    return h;
}

} // namespace detail

struct OrthogonalizeOptions {
    int working_factor = 8;   // working support as a multiple of N
    int max_newton = 120;
    double newton_tol = 1e-13;
    enum class Path { Auto, Iterative, Dense } path = Path::Auto;
    long long dense_threshold = 512;
};

// Canonical tight (orthonormalizing) pulse of the undersampled Gabor family
// {g(t - nN) exp(j 2 pi m (t - nN)/M)}. Computed as S^{-1/2} g with S the
// frame operator of the adjoint lattice (time step M, N-periodic
// modulations), which is the standard duality route for TF > 1. The output
// is evaluated on the full working support (working_factor * N samples,
// center at the midpoint) and normalized to unit power.
inline PrototypeFilter orthogonalize(const GaborSystem& sys,
                                     const OrthogonalizeOptions& opt = {}) {
    sys.validate();
    if (opt.working_factor < 1) throw ConfigError("orthogonalize: working_factor must be >= 1");
    const long long want =
        std::max<long long>(static_cast<long long>(opt.working_factor) * sys.num.N,
                            sys.pulse.length());
    const detail::GaborRing ring = detail::GaborRing::make(sys.num, want);
    std::vector<cplx> g = detail::embed_on_ring(ring, sys.pulse);

    const bool dense = opt.path == OrthogonalizeOptions::Path::Dense ||
                       (opt.path == OrthogonalizeOptions::Path::Auto &&
                        ring.L <= opt.dense_threshold);
    std::vector<cplx> h = dense ? detail::tight_window_dense(ring, g)
                                : detail::tight_window_iterative(ring, std::move(g),
                                                                 opt.max_newton, opt.newton_tol);

    // extract the working window centered on the ring midpoint
    const long long out_len = std::min<long long>(want, ring.L);
    std::vector<cplx> out(static_cast<std::size_t>(out_len));
    const long long base = ring.L / 2 - out_len / 2;
    for (long long i = 0; i < out_len; ++i) {
        long long idx = (base + i) % ring.L;
        if (idx < 0) idx += ring.L;
        out[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(idx)];
    }
    return make_unit_power(std::move(out), static_cast<int>(out_len / 2), sys.pulse.Ts);
}

// Lattice cross-coefficients C(m, n) = <g shifted to (m, n), reference> for
// all M distinct modulations at once: fold the lag product modulo M, then a
// length-M DFT. C(m, n) = sum_t g(t) conj(gamma(t - nN)) exp(-j2pi m(t-nN)/M).
inline std::vector<std::vector<cplx>> lattice_cross_table(const PrototypeFilter& g,
                                                          const PrototypeFilter& gamma,
                                                          const Numerology& num, int n_max) {
    g.validate();
    gamma.validate();
    num.validate();
    std::vector<std::vector<cplx>> table;
    table.reserve(static_cast<std::size_t>(2 * n_max + 1));
    for (int n = -n_max; n <= n_max; ++n) {
        const long long shift = static_cast<long long>(n) * num.N;
        std::vector<cplx> fold(static_cast<std::size_t>(num.M), cplx{0.0, 0.0});
        const long long lo = std::max<long long>(-g.center_index, shift - gamma.center_index);
        const long long hi = std::min<long long>(g.length() - 1 - g.center_index,
                                                 shift + gamma.length() - 1 - gamma.center_index);
        for (long long t = lo; t <= hi; ++t) {
            const long long u = t - shift;
            const long long v = ((u % num.M) + num.M) % num.M;
            fold[static_cast<std::size_t>(v)] += g.at_offset(t) * std::conj(gamma.at_offset(u));
        }
        table.push_back(detail::FftEngine::forward(fold));
    }
    return table;
}

// Self-interference ratio of a transmit/receive pulse pair on the lattice:
// wanted power over the total power leaking into every other lattice point
// within |n| <= neighborhood * ceil(overlap factor) symbols (all M distinct
// modulations are counted; they are periodic with period M). Inner products
// are taken on the pulses' residence ring (the smallest common multiple of
// N and M covering both supports), so a pulse spanning its full working
// length is scored by its periodic-extension orthogonality; shifts of
// shorter pulses never wrap and reduce to plain line inner products. Time
// shifts that coincide on the ring are counted once, and the (0,0) class is
// the wanted term. Returns dB, capped at 300 when the leakage underflows.
inline double sir_self(const PrototypeFilter& tx, const PrototypeFilter& rx,
                       const Numerology& num, int neighborhood = 1) {
    if (neighborhood < 1) throw ConfigError("sir_self: neighborhood must be >= 1");
    const long long longest = std::max(tx.length(), rx.length());
    const int overlap =
        static_cast<int>(std::ceil(static_cast<double>(longest) / num.N));
    const int n_max = std::max(1, neighborhood * overlap);
    const long long g = std::gcd<long long>(num.N, num.M);
    const long long lcm = static_cast<long long>(num.N) / g * num.M;
    const long long ring_len = lcm * std::max<long long>(1, (longest + lcm - 1) / lcm);

    double signal = 0.0, total = 0.0;
    if (longest + (static_cast<long long>(n_max) + 1) * num.N <= ring_len) {
        // no shift can wrap: line inner products are exact
        const auto table = lattice_cross_table(tx, rx, num, n_max);
        for (const auto& row : table)
            for (const cplx& c : row) total += std::norm(c);
        signal = std::norm(table[static_cast<std::size_t>(n_max)][0]);
    } else {
        const detail::GaborRing ring = detail::GaborRing::make(num, longest);
        std::vector<cplx> txr(static_cast<std::size_t>(ring.L), cplx{0.0, 0.0});
        std::vector<cplx> rxr(static_cast<std::size_t>(ring.L), cplx{0.0, 0.0});
        for (long long i = 0; i < tx.length(); ++i)
            txr[static_cast<std::size_t>((((i - tx.center_index) % ring.L) + ring.L) % ring.L)] =
                tx.coeffs[static_cast<std::size_t>(i)];
        for (long long i = 0; i < rx.length(); ++i)
            rxr[static_cast<std::size_t>((((i - rx.center_index) % ring.L) + ring.L) % ring.L)] =
                rx.coeffs[static_cast<std::size_t>(i)];
        const long long classes = ring.L / num.N;
        std::vector<char> seen(static_cast<std::size_t>(classes), 0);
        for (long long n = -n_max; n <= n_max; ++n) {
            const long long r = ((n % classes) + classes) % classes;
            if (seen[static_cast<std::size_t>(r)]) continue;
            seen[static_cast<std::size_t>(r)] = 1;
            const long long shift = r * num.N;
            std::vector<cplx> fold(static_cast<std::size_t>(num.M), cplx{0.0, 0.0});
            for (long long u = 0; u < ring.L; ++u) {
                const long long ri = (u - shift + ring.L) % ring.L;
                fold[static_cast<std::size_t>(ri % num.M)] +=
                    txr[static_cast<std::size_t>(u)] *
                    std::conj(rxr[static_cast<std::size_t>(ri)]);
            }
            const auto row = detail::FftEngine::forward(fold);
            for (std::size_t m = 0; m < row.size(); ++m) {
                const double p = std::norm(row[m]);
                if (r == 0 && m == 0) signal = p;
                else total += p;
            }
        }
        total += signal; // align with the table branch: total includes the wanted term
    }
    const double leak = total - signal;
    if (!(signal > 0.0)) return -300.0;
    if (leak < signal * 1e-30) return 300.0;
    return 10.0 * std::log10(signal / leak);
}

struct OrthoDesignConfig {
    double alpha = 1.0;      // Gaussian seed dilation; 1 matches the lattice aspect
    double K = 2.0;          // pulse length in symbol periods after truncation
    WindowKind window = WindowKind::Rc;
    double beta = 0.25;      // window roll-off
    double epsilon = 1e-4;   // stop when ||g_n - g_{n-1}|| / ||g_{n-1}|| <= epsilon
    int max_iters = 50;
    int working_factor = 8;
    bool record_sir_trace = true;
};

struct OrthoDesignReport {
    PrototypeFilter pulse;
    int iterations = 0;
    double final_delta = 0.0;
    double sir_self_db = 0.0;
    bool converged = false;
    std::vector<double> sir_trace_db; // matched-pair SIR after each truncation
};

// Iterative orthogonalize-then-truncate design: seed with a lattice-matched
// Gaussian, alternate the canonical tight window with a windowed truncation
// to round(K*N) samples until the iterate stops moving. The truncated pulse
// is renormalized each round; successive truncated iterates are compared.
inline OrthoDesignReport design_orthogonal(const OrthoDesignConfig& cfg, const Numerology& num) {
    num.validate();
    if (num.N <= num.M) throw ConfigError("design: orthogonal designs need TF = N/M > 1");
    if (!(cfg.K >= 1.0)) throw ConfigError("design: K must be >= 1");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("design: epsilon must be positive");
    if (cfg.max_iters < 1) throw ConfigError("design: max_iters must be >= 1");
    const int work_len = cfg.working_factor * num.N;
    const int win_len = static_cast<int>(std::lround(cfg.K * num.N));
    if (win_len > work_len)
        throw ConfigError("design: K*N exceeds the working support; raise working_factor");

    const double lattice_unit =
        std::sqrt(static_cast<double>(num.N) * static_cast<double>(num.M)) * num.Ts;
    PrototypeFilter g = gaussian_pulse(cfg.alpha, work_len, num.Ts, lattice_unit);

    const std::vector<double> w = make_window({cfg.window, cfg.beta, win_len});
    OrthogonalizeOptions oopt;
    oopt.working_factor = cfg.working_factor;

    // Window placement: start so the window midpoint lands on the pulse
    // center (for even lengths the window sits half a slot to the left).
    const auto truncate = [&](const PrototypeFilter& p) {
        const int start = p.center_index - win_len / 2;
        std::vector<cplx> c(static_cast<std::size_t>(win_len), cplx{0.0, 0.0});
        for (int i = 0; i < win_len; ++i) {
            const int src = start + i;
            if (src < 0 || src >= p.length()) continue;
            c[static_cast<std::size_t>(i)] =
                p.coeffs[static_cast<std::size_t>(src)] * w[static_cast<std::size_t>(i)];
        }
        return make_unit_power(std::move(c), win_len / 2, num.Ts);
    };

    OrthoDesignReport report;
    PrototypeFilter prev = truncate(g); // seed reference for the first delta
    PrototypeFilter current = g;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const PrototypeFilter tight = orthogonalize({current, num}, oopt);
        PrototypeFilter trunc = truncate(tight);
        double delta_sq = 0.0;
        for (int i = 0; i < win_len; ++i)
            delta_sq += std::norm(trunc.coeffs[static_cast<std::size_t>(i)] -
                                  prev.coeffs[static_cast<std::size_t>(i)]);
        report.iterations = it;
        report.final_delta = std::sqrt(delta_sq); // prev has unit norm
        if (cfg.record_sir_trace)
            report.sir_trace_db.push_back(sir_self(trunc, trunc, num));
        prev = trunc;
        // re-embed the truncated pulse on the working support for the next round
        std::vector<cplx> emb(static_cast<std::size_t>(work_len), cplx{0.0, 0.0});
        const int base = work_len / 2 - trunc.center_index;
        for (int i = 0; i < win_len; ++i)
            emb[static_cast<std::size_t>(base + i)] = trunc.coeffs[static_cast<std::size_t>(i)];
        current = PrototypeFilter{std::move(emb), work_len / 2, num.Ts};
        if (report.final_delta <= cfg.epsilon && it >= 2) {
            report.converged = true;
            break;
        }
    }
    report.pulse = prev;
    report.sir_self_db = cfg.record_sir_trace && !report.sir_trace_db.empty()
                             ? report.sir_trace_db.back()
                             : sir_self(prev, prev, num);
    return report;
}

} // namespace pulseforge
