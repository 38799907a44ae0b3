// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pulseforge/errors.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/sinr.hpp"
#include "pulseforge/transceiver.hpp"

namespace pulseforge {

namespace detail {

// full round-trip precision for doubles
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    return out;
}

inline double parse_double(const std::string& tok, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw ConfigError("malformed number in " + path);
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

} // namespace detail

// ---- prototype filter: CSV of offset,re,im with a Ts comment line ----

inline void write_pulse_csv(const std::string& path, const PrototypeFilter& g) {
    g.validate();
    std::ofstream out = detail::open_out(path);
    out << "# Ts=" << detail::fmt17(g.Ts) << "\n";
    out << "offset,re,im\n";
    for (int i = 0; i < g.length(); ++i) {
        const long long off = i - g.center_index;
        out << off << ',' << detail::fmt17(g.coeffs[static_cast<std::size_t>(i)].real())
            << ',' << detail::fmt17(g.coeffs[static_cast<std::size_t>(i)].imag()) << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path);
}

inline PrototypeFilter read_pulse_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    PrototypeFilter g;
    g.Ts = 1.0;
    long long first_off = 0;
    bool seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# Ts=", 0) == 0) {
            g.Ts = detail::parse_double(line.substr(5), path);
            continue;
        }
        if (line.rfind("offset", 0) == 0) continue;
        const auto tok = detail::split_csv(line);
        if (tok.size() != 3) throw ConfigError("malformed pulse row in " + path);
        const double off = detail::parse_double(tok[0], path);
        if (!seen) {
            first_off = static_cast<long long>(off);
            seen = true;
        }
        g.coeffs.emplace_back(detail::parse_double(tok[1], path),
                              detail::parse_double(tok[2], path));
    }
    if (!seen) throw ConfigError("no pulse samples in " + path);
    g.center_index = static_cast<long long>(-first_off);
    g.validate();
    return g;
}

// ---- frame signal: little-endian binary with a small header ----

inline void write_frame_bin(const std::string& path, const FrameSignal& s) {
    std::ofstream out = detail::open_out(path);
    const char magic[4] = {'P', 'F', 'R', 'M'};
    const std::uint32_t version = 1;
    const std::int64_t origin = s.origin;
    const std::uint64_t count = s.samples.size();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&origin), sizeof(origin));
    out.write(reinterpret_cast<const char*>(&s.Ts), sizeof(s.Ts));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(s.samples.data()),
              static_cast<std::streamsize>(count * sizeof(cplx)));
    if (!out) throw ConfigError("write failed: " + path);
}

inline FrameSignal read_frame_bin(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    char magic[4] = {};
    std::uint32_t version = 0;
    std::int64_t origin = 0;
    double Ts = 0.0;
    std::uint64_t count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&origin), sizeof(origin));
    in.read(reinterpret_cast<char*>(&Ts), sizeof(Ts));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || std::memcmp(magic, "PFRM", 4) != 0 || version != 1)
        throw ConfigError("not a frame file: " + path);
    FrameSignal s;
    s.origin = origin;
    s.Ts = Ts;
    s.samples.resize(count);
    in.read(reinterpret_cast<char*>(s.samples.data()),
            static_cast<std::streamsize>(count * sizeof(cplx)));
    if (!in) throw ConfigError("truncated frame file: " + path);
    return s;
}

// ---- symbol grid: CSV of m,n,re,im ----

inline void write_grid_csv(const std::string& path, const SymbolGrid& grid) {
    std::ofstream out = detail::open_out(path);
    out << "m,n,re,im\n";
    for (int n = 0; n < grid.n_symbols(); ++n)
        for (int k = 0; k < grid.n_active(); ++k)
            out << grid.active_map[static_cast<std::size_t>(k)] << ',' << n << ','
                << detail::fmt17(grid.symbols(k, n).real()) << ','
                << detail::fmt17(grid.symbols(k, n).imag()) << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

// ---- SINR contour: CSV of tau,nu,sinr_db ----

inline void write_contour_csv(const std::string& path, const SinrGrid& grid) {
    std::ofstream out = detail::open_out(path);
    out << "tau,nu,sinr_db\n";
    for (std::size_t i = 0; i < grid.tau_axis.size(); ++i)
        for (std::size_t j = 0; j < grid.nu_axis.size(); ++j)
            out << detail::fmt17(grid.tau_axis[i]) << ','
                << detail::fmt17(grid.nu_axis[j]) << ','
                << detail::fmt17(grid.values_db(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(j)))
                << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

// ---- PSD: CSV of freq_hz,psd_db ----

template <typename Psd>
inline void write_psd_csv(const std::string& path, const Psd& psd) {
    std::ofstream out = detail::open_out(path);
    out << "freq_hz,psd_db\n";
    for (std::size_t i = 0; i < psd.freq_hz.size(); ++i)
        out << detail::fmt17(psd.freq_hz[i]) << ',' << detail::fmt17(psd.psd_db[i])
            << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

// ---- content digests for manifests ----

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string digest_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_digest_hex(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return digest_hex(fnv1a64(bytes.data(), bytes.size()));
}

} // namespace pulseforge
