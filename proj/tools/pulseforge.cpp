// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "pulseforge/channel.hpp"
#include "pulseforge/gabor.hpp"
#include "pulseforge/io.hpp"
#include "pulseforge/linksim.hpp"
#include "pulseforge/numerology.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/sinr.hpp"
#include "pulseforge/spectrum.hpp"
#include "pulseforge/transceiver.hpp"

using nlohmann::json;
using namespace pulseforge;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOpts {
    std::string out = ".";
    std::uint64_t seed = 1;
    bool seed_given = false;
    int threads = 0;
};

struct Manifest {
    std::string command;
    std::string config_digest = "-";
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> outputs;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config parse failed for " + path + ": " + e.what());
    }
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    std::filesystem::create_directories(g.out);
    return (std::filesystem::path(g.out) / name).string();
}

void register_output(Manifest& man, const std::string& path) {
    man.outputs.emplace_back(path, file_digest_hex(path));
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

void write_manifest(const GlobalOpts& g, const Manifest& man) {
    json j;
    j["command"] = man.command;
    j["version"] = kVersion;
    j["seed"] = man.seed;
    j["config_digest"] = man.config_digest;
    j["outputs"] = json::array();
    for (const auto& [path, digest] : man.outputs)
        j["outputs"].push_back({{"path", path}, {"digest", digest}});
    write_json_file(out_path(g, "manifest.json"), j);
}

Numerology numerology_from(const json& cfg) {
    Numerology num;
    num.M = cfg.at("M").get<int>();
    num.N = cfg.at("N").get<int>();
    num.Ts = cfg.value("Ts", 1.0);
    num.validate();
    return num;
}

ScatteringStats channel_from(const json& cfg) {
    return brick_scattering(cfg.at("tau_max").get<double>(), cfg.at("nu_max").get<double>(),
                            cfg.at("n_tau").get<int>(), cfg.at("n_nu").get<int>());
}

PrototypeFilter pulse_from_spec(const json& spec, const Numerology& num) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "rect")
        return rect_pulse(spec.value("length", num.N), num.Ts);
    if (kind == "cp")
        return rect_pulse(num.N, num.Ts);
    if (kind == "cp_rx")
        return rect_pulse(num.M, num.Ts);
    if (kind == "gaussian")
        return gaussian_pulse(spec.value("alpha", 1.0), spec.value("length", 2 * num.N),
                              num.Ts);
    if (kind == "tight") {
        const int wf = spec.value("working_factor", 8);
        GaborSystem sys{gaussian_pulse(spec.value("alpha", 1.0), wf * num.N, num.Ts), num};
        OrthogonalizeOptions opt;
        opt.working_factor = wf;
        return orthogonalize(sys, opt);
    }
    if (kind == "designed") {
        OrthoDesignConfig dc;
        dc.alpha = spec.value("alpha", dc.alpha);
        dc.K = spec.value("K", dc.K);
        dc.window = window_kind_from_string(spec.value("window", "rc"));
        dc.beta = spec.value("beta", dc.beta);
        dc.epsilon = spec.value("epsilon", dc.epsilon);
        dc.max_iters = spec.value("max_iters", dc.max_iters);
        dc.working_factor = spec.value("working_factor", dc.working_factor);
        dc.record_sir_trace = false;
        const OrthoDesignReport rep = design_orthogonal(dc, num);
        if (!rep.converged)
            throw NumericalError("pulse spec: orthogonal design did not converge");
        return rep.pulse;
    }
    if (kind == "wofdm") {
        WindowSpec ws{window_kind_from_string(spec.value("window", "rc")),
                      spec.value("beta", 1.0), spec.at("seed_length").get<int>()};
        return wofdm_pulse(num, ws, spec.value("design_length", 0));
    }
    if (kind == "csv")
        return read_pulse_csv(spec.at("path").get<std::string>());
    throw ConfigError("unknown pulse kind: " + kind);
}

double sigma_n2_from(const json& cfg) {
    if (cfg.contains("sigma_n2_db"))
        return std::pow(10.0, cfg.at("sigma_n2_db").get<double>() / 10.0);
    if (cfg.contains("snr_db"))
        return std::pow(10.0, -cfg.at("snr_db").get<double>() / 10.0);
    return 0.0;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw ConfigError("axis needs at least one point");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] =
            count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return v;
}

// ---- subcommand handlers ----

int cmd_numerology(const GlobalOpts& g, const std::string& mode, double tau_max_s,
                   double nu_max_hz, double scs_hz, double Ts, double tf,
                   double tf_cap, int max_size) {
    Manifest man;
    man.command = "numerology";
    man.seed = g.seed;
    const ChannelCharacteristics chars{tau_max_s, nu_max_hz};
    json j;
    j["mode"] = mode;
    if (mode == "cp") {
        const CpDerivation d = derive_cp_ofdm_numerology(chars, scs_hz, Ts, tf_cap);
        j["M"] = d.num.M;
        j["N"] = d.num.N;
        j["Ts"] = d.num.Ts;
        j["TF"] = static_cast<double>(d.num.N) / d.num.M;
        j["t_cp"] = d.t_cp;
        j["degenerate"] = d.degenerate;
    } else if (mode == "tf") {
        const TfDerivation d = derive_tf_localized_numerology(chars, tf, Ts, max_size);
        j["M"] = d.num.M;
        j["N"] = d.num.N;
        j["Ts"] = d.num.Ts;
        j["TF"] = static_cast<double>(d.num.N) / d.num.M;
        j["target_T"] = d.target_T;
        j["target_F"] = d.target_F;
        j["ratio_error_rel"] = d.ratio_error_rel;
        j["tf_error_rel"] = d.tf_error_rel;
    } else {
        throw ConfigError("numerology: mode must be cp or tf");
    }
    const std::string path = out_path(g, "numerology.json");
    write_json_file(path, j);
    register_output(man, path);
    man.config_digest = digest_hex(fnv1a64(j.dump().data(), j.dump().size()));
    write_manifest(g, man);
    std::printf("%s\n", j.dump().c_str());
    return 0;
}

int cmd_design_orth(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    OrthoDesignConfig dc;
    const json d = cfg.value("design", json::object());
    dc.alpha = d.value("alpha", dc.alpha);
    dc.K = d.value("K", dc.K);
    dc.window = window_kind_from_string(d.value("window", "rc"));
    dc.beta = d.value("beta", dc.beta);
    dc.epsilon = d.value("epsilon", dc.epsilon);
    dc.max_iters = d.value("max_iters", dc.max_iters);
    dc.working_factor = d.value("working_factor", dc.working_factor);

    const OrthoDesignReport rep = design_orthogonal(dc, num);

    Manifest man;
    man.command = "design orth";
    man.seed = g.seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string ppath = out_path(g, "pulse.csv");
    write_pulse_csv(ppath, rep.pulse);
    register_output(man, ppath);
    json j;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["final_delta"] = rep.final_delta;
    j["sir_self_db"] = rep.sir_self_db;
    j["sir_trace_db"] = rep.sir_trace_db;
    const std::string rpath = out_path(g, "report.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    write_manifest(g, man);
    std::printf("design orth: %d iterations, SIR %.2f dB, %s\n", rep.iterations,
                rep.sir_self_db, rep.converged ? "converged" : "NOT converged");
    if (!rep.converged) {
        std::fprintf(stderr, "design orth: did not converge in %d iterations\n",
                     dc.max_iters);
        return 3;
    }
    return 0;
}

int cmd_design_maxsinr(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const ScatteringStats stats = channel_from(cfg.at("channel"));
    const PrototypeFilter tx = pulse_from_spec(cfg.at("transmit"), num);
    SinrConfig sc;
    sc.sigma_n2 = sigma_n2_from(cfg);
    const int L = cfg.at("filter_length").get<int>();

    const EigenSolution sol = max_sinr_receiver(tx, num, stats, sc, L);
    const double check_db = sinr_discrete(tx, sol.gamma_max, num, stats, sc);

    Manifest man;
    man.command = "design maxsinr";
    man.seed = g.seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string gpath = out_path(g, "gamma.csv");
    write_pulse_csv(gpath, sol.gamma_max);
    register_output(man, gpath);
    json j;
    j["zeta_db"] = 10.0 * std::log10(sol.zeta_max);
    j["sinr_check_db"] = check_db;
    j["residual"] = sol.residual;
    j["regularized"] = sol.regularized;
    const std::string rpath = out_path(g, "report.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    write_manifest(g, man);
    std::printf("design maxsinr: zeta %.3f dB (check %.3f dB)\n",
                10.0 * std::log10(sol.zeta_max), check_db);
    return 0;
}

int cmd_design_joint(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const ScatteringStats stats = channel_from(cfg.at("channel"));
    const json init_spec = cfg.value("init", json{{"kind", "cp"}});
    const PrototypeFilter g0 = pulse_from_spec(init_spec, num);
    JointDesignConfig jc;
    jc.sinr.sigma_n2 = sigma_n2_from(cfg);
    jc.filter_length = cfg.at("filter_length").get<int>();
    jc.epsilon = cfg.value("epsilon", jc.epsilon);
    jc.max_iters = cfg.value("max_iters", jc.max_iters);

    const JointDesignReport rep = joint_design(g0, num, stats, jc);

    Manifest man;
    man.command = "design joint";
    man.seed = g.seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string gpath = out_path(g, "g.csv");
    write_pulse_csv(gpath, rep.g);
    register_output(man, gpath);
    const std::string rxpath = out_path(g, "gamma.csv");
    write_pulse_csv(rxpath, rep.gamma);
    register_output(man, rxpath);
    json j;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["regularized"] = rep.regularized;
    json trace = json::array();
    for (double z : rep.zeta_trace) trace.push_back(10.0 * std::log10(z));
    j["zeta_trace_db"] = trace;
    const std::string rpath = out_path(g, "report.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    write_manifest(g, man);
    std::printf("design joint: %d iterations, %s\n", rep.iterations,
                rep.converged ? "converged" : "NOT converged");
    if (!rep.converged) {
        std::fprintf(stderr, "design joint: did not converge in %d iterations\n",
                     jc.max_iters);
        return 3;
    }
    return 0;
}

int cmd_contour(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const PrototypeFilter tx = pulse_from_spec(cfg.at("transmit"), num);
    const PrototypeFilter rx = pulse_from_spec(cfg.at("receive"), num);
    SinrConfig sc;
    sc.sigma_n2 = sigma_n2_from(cfg);
    const json jt = cfg.at("tau");
    const json jn = cfg.at("nu");
    const std::vector<double> taus =
        linspace(0.0, jt.at("max").get<double>(), jt.at("count").get<int>());
    const std::vector<double> nus =
        linspace(0.0, jn.at("max").get<double>(), jn.at("count").get<int>());
    const int grid_tau = cfg.value("grid_tau", 8);
    const int grid_nu = cfg.value("grid_nu", 8);

    const SinrGrid grid = sinr_contour(tx, rx, num, sc, taus, nus, grid_tau, grid_nu,
                                       resolve_threads(g.threads));

    Manifest man;
    man.command = "contour";
    man.seed = g.seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string cpath = out_path(g, "contour.csv");
    write_contour_csv(cpath, grid);
    register_output(man, cpath);
    json j;
    j["min_db"] = grid.values_db.minCoeff();
    j["max_db"] = grid.values_db.maxCoeff();
    const std::string rpath = out_path(g, "report.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    write_manifest(g, man);
    std::printf("contour: %zu x %zu points, SINR %.2f..%.2f dB\n", taus.size(),
                nus.size(), grid.values_db.minCoeff(), grid.values_db.maxCoeff());
    return 0;
}

FrameSignal psd_frame(const json& cfg, const Numerology& num, std::uint64_t seed) {
    const PrototypeFilter tx = pulse_from_spec(cfg.at("pulse"), num);
    const int n_active = cfg.at("n_active").get<int>();
    const int n_symbols = cfg.value("n_symbols", 64);
    Rng rng(seed);
    SymbolGrid grid;
    grid.active_map = centered_subcarriers(num.M, n_active);
    grid.symbols.resize(n_active, n_symbols);
    for (int n = 0; n < n_symbols; ++n)
        for (int k = 0; k < n_active; ++k)
            grid.symbols(k, n) = draw_symbol(Constellation::QPSK, rng);
    FrameSignal sig = modulate(grid, tx, num);
    if (cfg.contains("pa")) {
        const json& p = cfg.at("pa");
        PaModel pa;
        const std::string kind = p.value("kind", "ideal");
        pa.kind = (kind == "rapp" || kind == "RAPP") ? PaKind::RAPP : PaKind::IDEAL;
        pa.p = p.value("p", 2.0);
        pa.input_backoff = p.value("input_backoff_db", 0.0);
        sig = apply_pa(sig, pa);
    }
    return sig;
}

PsdEstimate psd_from_cfg(const json& cfg, const Numerology& num, std::uint64_t seed) {
    const FrameSignal sig = psd_frame(cfg, num, seed);
    const double F = 1.0 / (num.M * num.Ts);
    const double edge = cfg.at("n_active").get<int>() / 2.0 * F;
    return estimate_psd(sig, cfg.value("segment", 4096), cfg.value("overlap", 0.5), edge);
}

int cmd_psd(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const std::uint64_t seed = g.seed_given ? g.seed : cfg.value("seed", g.seed);
    const PsdEstimate psd = psd_from_cfg(cfg, num, seed);

    Manifest man;
    man.command = "psd";
    man.seed = seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string ppath = out_path(g, "psd.csv");
    write_psd_csv(ppath, psd);
    register_output(man, ppath);
    double total = 0.0;
    for (double v : psd.psd_linear) total += v;
    json j;
    j["band_edge_hz"] = psd.band_edge_hz;
    j["bins"] = psd.n_bins();
    j["total_power"] = total;
    const std::string rpath = out_path(g, "report.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    write_manifest(g, man);
    std::printf("psd: %d bins, band edge %.17g Hz\n", psd.n_bins(), psd.band_edge_hz);
    return 0;
}

int cmd_guards(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const std::uint64_t seed = g.seed_given ? g.seed : cfg.value("seed", g.seed);
    const double mask_db = cfg.at("mask_db").get<double>();
    const PsdEstimate psd = psd_from_cfg(cfg, num, seed);
    const int guards = guard_subcarriers(psd, num, mask_db);
    const int n_active = cfg.at("n_active").get<int>();

    Manifest man;
    man.command = "guards";
    man.seed = seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string ppath = out_path(g, "psd.csv");
    write_psd_csv(ppath, psd);
    register_output(man, ppath);
    json j;
    j["guards_single_side"] = guards;
    j["overhead_percent"] =
        guards >= 0 ? 100.0 * guards / n_active : -1.0;
    j["mask_db"] = mask_db;
    j["band_edge_hz"] = psd.band_edge_hz;
    const std::string rpath = out_path(g, "guards.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    write_manifest(g, man);
    std::printf("%s\n", j.dump().c_str());
    return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const PrototypeFilter tx = pulse_from_spec(cfg.at("transmit"), num);
    const PrototypeFilter rx = pulse_from_spec(cfg.at("receive"), num);
    const ScatteringStats stats = channel_from(cfg.at("channel"));
    LinkConfig lc;
    lc.constellation = constellation_from_name(cfg.value("constellation", "QPSK"));
    lc.snr_db = cfg.at("snr_db").get<double>();
    lc.n_frames = cfg.value("n_frames", 100);
    lc.seed = g.seed_given ? g.seed : cfg.value("seed", g.seed);
    lc.n_symbols = cfg.value("n_symbols", 16);
    lc.threads = g.threads;
    lc.fade = cfg.value("fade", true);

    std::vector<LinkFrameStat> frames;
    const bool want_frames = cfg.value("per_frame_csv", false);
    const LinkReport rep =
        run_link(tx, rx, num, stats, lc, want_frames ? &frames : nullptr);

    Manifest man;
    man.command = "simulate";
    man.seed = lc.seed;
    man.config_digest = file_digest_hex(config_path);
    json j;
    j["ser"] = rep.ser;
    j["evm_percent"] = rep.evm_percent;
    j["measured_sinr_db"] = rep.measured_sinr_db;
    j["symbols_measured"] = rep.symbols_measured;
    const std::string rpath = out_path(g, "report.json");
    write_json_file(rpath, j);
    register_output(man, rpath);
    if (want_frames) {
        const std::string fpath = out_path(g, "frames.csv");
        std::ofstream out(fpath);
        if (!out) throw ConfigError("cannot open for writing: " + fpath);
        out << "frame,ser,evm_percent,sinr_db\n";
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const LinkFrameStat& t = frames[f];
            const double ser = t.total > 0 ? static_cast<double>(t.wrong) / t.total : 0.0;
            const double evm = t.ref > 0.0 ? 100.0 * std::sqrt(t.err / t.ref) : 0.0;
            const double sinr =
                t.residual > 0.0 ? 10.0 * std::log10(t.signal / t.residual) : 300.0;
            out << f << ',' << detail::fmt17(ser) << ',' << detail::fmt17(evm) << ','
                << detail::fmt17(sinr) << "\n";
        }
        if (!out) throw ConfigError("write failed: " + fpath);
        register_output(man, fpath);
    }
    write_manifest(g, man);
    std::printf("%s\n", j.dump().c_str());
    return 0;
}

int cmd_complexity(const GlobalOpts& g, int M, double TF, const std::string& K,
                   bool flat_top) {
    Numerology num;
    num.M = M;
    num.N = static_cast<int>(detail::snapped_ceil(TF * M));
    num.Ts = 1.0;
    num.validate();

    ComplexityReport rep;
    if (K == "cp" || K == "CP") {
        rep = complexity_cp_baseline(num);
    } else {
        const double k = std::stod(K);
        rep = complexity_count(num, k, flat_top);
    }
    json j;
    j["M"] = M;
    j["N"] = num.N;
    j["TF"] = TF;
    j["K"] = K;
    j["flat_top"] = flat_top;
    j["dft_ops"] = rep.dft_ops;
    j["shaping_ops"] = rep.shaping_ops;
    j["total"] = rep.total;
    j["ratio"] = std::to_string(std::llround(rep.ratio_vs_cpofdm)) + "%";

    Manifest man;
    man.command = "complexity";
    man.seed = g.seed;
    man.config_digest = digest_hex(fnv1a64(j.dump().data(), j.dump().size()));
    const std::string path = out_path(g, "complexity.json");
    write_json_file(path, j);
    register_output(man, path);
    write_manifest(g, man);
    std::printf("%s\n", j.dump().c_str());
    return 0;
}

int cmd_ambiguity(const GlobalOpts& g, const std::string& config_path) {
    const json cfg = load_config(config_path);
    const Numerology num = numerology_from(cfg);
    const PrototypeFilter tx = pulse_from_spec(cfg.at("pulse"), num);
    const PrototypeFilter rx =
        cfg.contains("receive") ? pulse_from_spec(cfg.at("receive"), num) : tx;
    const json jt = cfg.at("tau");
    const json jn = cfg.at("nu");
    const std::vector<double> taus = linspace(
        jt.value("min", 0.0), jt.at("max").get<double>(), jt.at("count").get<int>());
    const std::vector<double> nus = linspace(
        jn.value("min", 0.0), jn.at("max").get<double>(), jn.at("count").get<int>());

    Manifest man;
    man.command = "ambiguity";
    man.seed = g.seed;
    man.config_digest = file_digest_hex(config_path);
    const std::string apath = out_path(g, "ambiguity.csv");
    std::ofstream out(apath);
    if (!out) throw ConfigError("cannot open for writing: " + apath);
    out << "tau,nu,re,im,abs\n";
    for (double tau : taus)
        for (double nu : nus) {
            const long long ti = std::llround(tau);
            if (std::abs(tau - static_cast<double>(ti)) > 1e-9)
                throw ConfigError("ambiguity: delays are sample-aligned; "
                                  "tau axis must hit integers");
            const cplx a = cross_ambiguity(tx, rx, ti, nu);
            out << ti << ',' << detail::fmt17(nu) << ','
                << detail::fmt17(a.real()) << ',' << detail::fmt17(a.imag()) << ','
                << detail::fmt17(std::abs(a)) << "\n";
        }
    if (!out) throw ConfigError("write failed: " + apath);
    register_output(man, apath);
    write_manifest(g, man);
    std::printf("ambiguity: %zu x %zu points\n", taus.size(), nus.size());
    return 0;
}

void print_usage() {
    std::fprintf(stderr,
                 "usage: pulseforge <subcommand> [options]\n"
                 "subcommands:\n"
                 "  numerology       derive lattice parameters from channel spreads\n"
                 "  design orth      iterative orthogonal pulse design\n"
                 "  design maxsinr   max-SINR receive filter for a known scattering box\n"
                 "  design joint     alternating transmit/receive pulse optimization\n"
                 "  contour          SINR over a delay/Doppler grid\n"
                 "  psd              Welch spectrum of a modulated burst\n"
                 "  guards           guard-subcarrier count against a spectral mask\n"
                 "  simulate         uncoded link simulation\n"
                 "  complexity       per-symbol operation counts\n"
                 "  ambiguity        cross-ambiguity table for a pulse pair\n");
}

} // namespace

int main(int argc, char** argv) {
    static const std::set<std::string> known = {
        "numerology", "design", "contour", "psd",       "guards",
        "simulate",   "complexity", "ambiguity"};
    if (argc >= 2 && argv[1][0] != '-' && known.find(argv[1]) == known.end()) {
        std::fprintf(stderr, "unknown subcommand: %s\n", argv[1]);
        print_usage();
        return 64;
    }
    if (argc >= 3 && std::string(argv[1]) == "design" && argv[2][0] != '-') {
        const std::string sub = argv[2];
        if (sub != "orth" && sub != "maxsinr" && sub != "joint") {
            std::fprintf(stderr, "unknown design variant: %s\n", sub.c_str());
            print_usage();
            return 64;
        }
    }

    CLI::App app{"pulse-shaped OFDM waveform design toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", g.seed, "random seed");
    app.add_option("--threads", g.threads, "worker threads (0 = auto)");

    std::string mode = "cp";
    double tau_max_s = 0.0, nu_max_hz = 0.0, scs_hz = 15000.0, Ts = 0.0, tf = 1.07,
           tf_cap = 2.0;
    int max_size = 4096;
    auto* num_cmd = app.add_subcommand("numerology", "derive lattice parameters");
    num_cmd->add_option("--mode", mode, "cp or tf")->capture_default_str();
    num_cmd->add_option("--tau-max-s", tau_max_s, "delay spread, seconds")->required();
    num_cmd->add_option("--nu-max-hz", nu_max_hz, "Doppler spread, Hz")->required();
    num_cmd->add_option("--scs-hz", scs_hz, "subcarrier spacing, Hz (cp mode)");
    num_cmd->add_option("--ts-s", Ts, "sample period, seconds")->required();
    num_cmd->add_option("--tf", tf, "time-frequency density (tf mode)");
    num_cmd->add_option("--tf-cap", tf_cap, "cp-mode density cap");
    num_cmd->add_option("--max-size", max_size, "tf-mode search bound");

    auto* design_cmd = app.add_subcommand("design", "pulse design workflows");
    design_cmd->require_subcommand(1);
    std::string orth_cfg, maxsinr_cfg, joint_cfg;
    auto* orth_cmd = design_cmd->add_subcommand("orth", "orthogonal pulse design");
    orth_cmd->add_option("--config", orth_cfg, "JSON config")->required();
    auto* maxsinr_cmd = design_cmd->add_subcommand("maxsinr", "max-SINR receive filter");
    maxsinr_cmd->add_option("--config", maxsinr_cfg, "JSON config")->required();
    auto* joint_cmd = design_cmd->add_subcommand("joint", "joint pulse-pair design");
    joint_cmd->add_option("--config", joint_cfg, "JSON config")->required();

    std::string contour_cfg, psd_cfg, guards_cfg, simulate_cfg, ambiguity_cfg;
    auto* contour_cmd = app.add_subcommand("contour", "SINR delay/Doppler grid");
    contour_cmd->add_option("--config", contour_cfg, "JSON config")->required();
    auto* psd_cmd = app.add_subcommand("psd", "Welch spectrum of a modulated burst");
    psd_cmd->add_option("--config", psd_cfg, "JSON config")->required();
    auto* guards_cmd = app.add_subcommand("guards", "guard subcarriers vs mask");
    guards_cmd->add_option("--config", guards_cfg, "JSON config")->required();
    auto* simulate_cmd = app.add_subcommand("simulate", "uncoded link simulation");
    simulate_cmd->add_option("--config", simulate_cfg, "JSON config")->required();
    auto* ambiguity_cmd = app.add_subcommand("ambiguity", "cross-ambiguity table");
    ambiguity_cmd->add_option("--config", ambiguity_cfg, "JSON config")->required();

    int cx_M = 2048;
    double cx_TF = 1.07;
    std::string cx_K = "cp";
    bool cx_flat = false;
    auto* cx_cmd = app.add_subcommand("complexity", "per-symbol operation counts");
    cx_cmd->add_option("--M", cx_M, "subcarrier count (power of two)")->required();
    cx_cmd->add_option("--TF", cx_TF, "time-frequency density")->required();
    cx_cmd->add_option("--K", cx_K, "overlap factor, or 'cp' for the baseline")
        ->required();
    cx_cmd->add_flag("--flat-top", cx_flat, "edge-only windowing");

    for (CLI::App* sub : {num_cmd, design_cmd, orth_cmd, maxsinr_cmd, joint_cmd,
                          contour_cmd, psd_cmd, guards_cmd, simulate_cmd,
                          ambiguity_cmd, cx_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (num_cmd->parsed())
            return cmd_numerology(g, mode, tau_max_s, nu_max_hz, scs_hz, Ts, tf, tf_cap,
                                  max_size);
        if (orth_cmd->parsed()) return cmd_design_orth(g, orth_cfg);
        if (maxsinr_cmd->parsed()) return cmd_design_maxsinr(g, maxsinr_cfg);
        if (joint_cmd->parsed()) return cmd_design_joint(g, joint_cfg);
        if (contour_cmd->parsed()) return cmd_contour(g, contour_cfg);
        if (psd_cmd->parsed()) return cmd_psd(g, psd_cfg);
        if (guards_cmd->parsed()) return cmd_guards(g, guards_cfg);
        if (simulate_cmd->parsed()) return cmd_simulate(g, simulate_cfg);
        if (cx_cmd->parsed()) return cmd_complexity(g, cx_M, cx_TF, cx_K, cx_flat);
        if (ambiguity_cmd->parsed()) return cmd_ambiguity(g, ambiguity_cfg);
        print_usage();
        return 64;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
