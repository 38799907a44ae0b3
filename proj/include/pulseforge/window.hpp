// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pulseforge/errors.hpp"

namespace pulseforge {

enum class WindowKind { Rect, Rc, Rrc, Hanning };

inline const char* to_string(WindowKind k) {
    switch (k) {
        case WindowKind::Rect: return "RECT";
        case WindowKind::Rc: return "RC";
        case WindowKind::Rrc: return "RRC";
        case WindowKind::Hanning: return "HANNING";
    }
    return "?";
}

inline WindowKind window_kind_from_string(const std::string& s) {
    if (s == "RECT" || s == "rect") return WindowKind::Rect;
    if (s == "RC" || s == "rc") return WindowKind::Rc;
    if (s == "RRC" || s == "rrc") return WindowKind::Rrc;
    if (s == "HANNING" || s == "hanning" || s == "hann") return WindowKind::Hanning;
    throw ConfigError("unknown window kind: " + s);
}

// Truncation/tapering window. beta is the roll-off fraction for the RC/RRC
// kinds: each edge ramps over floor(beta*length/2) samples, the midsection is
// flat at 1. beta = 0 degenerates to the rectangle for both.
struct WindowSpec {
    WindowKind kind = WindowKind::Rect;
    double beta = 0.0;
    int length = 0;

    void validate() const {
        if (length < 1) throw ConfigError("window: length must be >= 1");
        if (beta < 0.0 || beta > 1.0) throw ConfigError("window: beta must be in [0, 1]");
    }
};

namespace detail {

// Raised-cosine (Tukey) taper: cosine half-arches over the first and last
// n_taper samples, evaluated at half-sample offsets so the first coefficient
// is small but nonzero and beta = 1 yields a full cosine arch.
inline std::vector<double> rc_taper(int length, double beta) {
    std::vector<double> w(static_cast<std::size_t>(length), 1.0);
    const int n_taper = static_cast<int>(std::floor(beta * length / 2.0));
    for (int i = 0; i < n_taper; ++i) {
        const double x = (i + 0.5) / n_taper; // 0 -> 1 across the ramp
        const double v = 0.5 * (1.0 - std::cos(std::numbers::pi * x));
        w[static_cast<std::size_t>(i)] = v;
        w[static_cast<std::size_t>(length - 1 - i)] = v;
    }
    return w;
}

} // namespace detail

inline std::vector<double> make_window(const WindowSpec& spec) {
    spec.validate();
    const int L = spec.length;
    switch (spec.kind) {
        case WindowKind::Rect:
            return std::vector<double>(static_cast<std::size_t>(L), 1.0);
        case WindowKind::Rc:
            return detail::rc_taper(L, spec.beta);
        case WindowKind::Rrc: {
            auto w = detail::rc_taper(L, spec.beta);
            for (double& v : w) v = std::sqrt(v);
            return w;
        }
        case WindowKind::Hanning: {
            std::vector<double> w(static_cast<std::size_t>(L));
            if (L == 1) {
                w[0] = 1.0;
                return w;
            }
            for (int i = 0; i < L; ++i)
                w[static_cast<std::size_t>(i)] =
                    0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (L - 1)));
            return w;
        }
    }
    throw ConfigError("window: unhandled kind");
}

} // namespace pulseforge
