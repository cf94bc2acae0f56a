#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cldbs/control.hpp"
#include "cldbs/detail/sha256.hpp"
#include "cldbs/metrics.hpp"
#include "cldbs/plant.hpp"

namespace cldbs {

/// One JSON document configuring a whole experiment. Every field has a
/// default; unknown keys and out-of-range values are rejected with
/// path-qualified messages.
struct ExperimentConfig {
    PlantConfig plant;
    ChainConfig dsp;
    Controller controller;  // template: kind, params, waveform, amplitude
    MetricsConfig metrics;
    std::string label;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument("config: " + path + ": expected an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok |= item.key() == a;
        if (!ok)
            throw std::invalid_argument("config: unexpected key '" + path + "." + item.key() + "'");
    }
}

inline double num_in(const json& j, const std::string& path, const char* key, double fallback,
                     double lo, double hi) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number())
        throw std::invalid_argument("config: " + path + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi))
        throw std::invalid_argument("config: " + path + "." + key + " = " + std::to_string(x) +
                                    " out of range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
    return x;
}

inline int int_in(const json& j, const std::string& path, const char* key, int fallback, int lo,
                  int hi) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw std::invalid_argument("config: " + path + "." + key + ": expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi)
        throw std::invalid_argument("config: " + path + "." + key + " = " + std::to_string(x) +
                                    " out of range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
    return static_cast<int>(x);
}

inline std::string str_or(const json& j, const std::string& path, const char* key,
                          const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string())
        throw std::invalid_argument("config: " + path + "." + key + ": expected a string");
    return v.get<std::string>();
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    using detail::int_in;
    using detail::num_in;
    using detail::reject_unknown;
    using detail::str_or;

    ExperimentConfig cfg;
    reject_unknown(j, "$", {"plant", "dsp", "controller", "metrics", "output"});

    if (j.contains("plant")) {
        const auto& p = j.at("plant");
        reject_unknown(p, "plant", {"mode", "dt", "seed", "severity", "surrogate", "network"});
        const std::string mode = str_or(p, "plant", "mode", "surrogate");
        if (mode == "surrogate") {
            cfg.plant.mode = PlantMode::surrogate;
        } else if (mode == "network") {
            cfg.plant.mode = PlantMode::network;
        } else {
            throw std::invalid_argument("config: plant.mode: unknown mode '" + mode + "'");
        }
        cfg.plant.dt = num_in(p, "plant", "dt", 0.0, 0.0, 1.0);
        if (p.contains("seed")) {
            if (!p.at("seed").is_number_integer() || p.at("seed").get<long long>() < 0)
                throw std::invalid_argument("config: plant.seed: expected a non-negative integer");
            cfg.plant.seed = p.at("seed").get<std::uint64_t>();
        }
        try {
            cfg.plant.severity = severity_from_string(str_or(p, "plant", "severity", "severe"));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("config: plant.severity: ") + e.what());
        }
        if (p.contains("surrogate")) {
            const auto& s = p.at("surrogate");
            reject_unknown(s, "plant.surrogate",
                           {"b0", "i50", "k", "f_beta", "tau_p", "noise_amp", "ou_tau", "ou_std"});
            SurrogateConfig& sc = cfg.plant.surrogate;
            sc.b0 = num_in(s, "plant.surrogate", "b0", sc.b0, 0.0, 10.0);
            sc.i50 = num_in(s, "plant.surrogate", "i50", sc.i50, 0.0, 3.0);
            sc.k = num_in(s, "plant.surrogate", "k", sc.k, 0.0, 100.0);
            sc.f_beta = num_in(s, "plant.surrogate", "f_beta", sc.f_beta, 13.0, 30.0);
            sc.tau_p = num_in(s, "plant.surrogate", "tau_p", sc.tau_p, 1e-4, 10.0);
            sc.noise_amp = num_in(s, "plant.surrogate", "noise_amp", sc.noise_amp, 0.0, 10.0);
            sc.ou_tau = num_in(s, "plant.surrogate", "ou_tau", sc.ou_tau, 1e-4, 10.0);
            sc.ou_std = num_in(s, "plant.surrogate", "ou_std", sc.ou_std, 0.0, 10.0);
        }
        if (p.contains("network")) {
            const auto& n = p.at("network");
            reject_unknown(n, "plant.network",
                           {"n_stn", "n_gpe", "n_gpi", "n_thal", "n_interneuron", "n_cortical",
                            "striatal_rate_hz", "in_degrees", "lfp_gain", "reduced_scale"});
            NetworkConfig& nc = cfg.plant.network;
            if (n.contains("reduced_scale"))
                nc = make_reduced_config(nc, int_in(n, "plant.network", "reduced_scale", 1, 1, 100));
            nc.n_stn = int_in(n, "plant.network", "n_stn", nc.n_stn, 1, 100000);
            nc.n_gpe = int_in(n, "plant.network", "n_gpe", nc.n_gpe, 1, 100000);
            nc.n_gpi = int_in(n, "plant.network", "n_gpi", nc.n_gpi, 1, 100000);
            nc.n_thal = int_in(n, "plant.network", "n_thal", nc.n_thal, 1, 100000);
            nc.n_interneuron = int_in(n, "plant.network", "n_interneuron", nc.n_interneuron, 1, 100000);
            nc.n_cortical = int_in(n, "plant.network", "n_cortical", nc.n_cortical, 1, 100000);
            nc.striatal_rate_hz =
                num_in(n, "plant.network", "striatal_rate_hz", nc.striatal_rate_hz, 0.0, 1000.0);
            nc.tuning.lfp_gain = num_in(n, "plant.network", "lfp_gain", nc.tuning.lfp_gain, 0.0, 1e6);
            if (n.contains("in_degrees")) {
                const auto& d = n.at("in_degrees");
                reject_unknown(d, "plant.network.in_degrees",
                               {"stn_from_gpe", "stn_from_ctx", "gpe_from_striatum", "gpe_from_gpe",
                                "gpe_from_stn", "gpi_from_stn", "gpi_from_gpe", "thal_from_gpi",
                                "ctx_from_thal", "ctx_from_interneuron", "interneuron_from_ctx"});
                InDegrees& g = nc.indeg;
                const std::string dp = "plant.network.in_degrees";
                g.stn_from_gpe = int_in(d, dp, "stn_from_gpe", g.stn_from_gpe, 0, 100000);
                g.stn_from_ctx = int_in(d, dp, "stn_from_ctx", g.stn_from_ctx, 0, 100000);
                g.gpe_from_striatum = int_in(d, dp, "gpe_from_striatum", g.gpe_from_striatum, 0, 100000);
                g.gpe_from_gpe = int_in(d, dp, "gpe_from_gpe", g.gpe_from_gpe, 0, 100000);
                g.gpe_from_stn = int_in(d, dp, "gpe_from_stn", g.gpe_from_stn, 0, 100000);
                g.gpi_from_stn = int_in(d, dp, "gpi_from_stn", g.gpi_from_stn, 0, 100000);
                g.gpi_from_gpe = int_in(d, dp, "gpi_from_gpe", g.gpi_from_gpe, 0, 100000);
                g.thal_from_gpi = int_in(d, dp, "thal_from_gpi", g.thal_from_gpi, 0, 100000);
                g.ctx_from_thal = int_in(d, dp, "ctx_from_thal", g.ctx_from_thal, 0, 100000);
                g.ctx_from_interneuron =
                    int_in(d, dp, "ctx_from_interneuron", g.ctx_from_interneuron, 0, 100000);
                g.interneuron_from_ctx =
                    int_in(d, dp, "interneuron_from_ctx", g.interneuron_from_ctx, 0, 100000);
            }
        }
    }

    if (j.contains("dsp")) {
        const auto& d = j.at("dsp");
        reject_unknown(d, "dsp", {"f_center", "bandwidth", "order", "ripple_db", "arv_window"});
        cfg.dsp.f_center = num_in(d, "dsp", "f_center", cfg.dsp.f_center, 0.0, 1000.0);
        cfg.dsp.bandwidth = num_in(d, "dsp", "bandwidth", cfg.dsp.bandwidth, 0.1, 100.0);
        cfg.dsp.order = int_in(d, "dsp", "order", cfg.dsp.order, 2, 16);
        cfg.dsp.ripple_db = num_in(d, "dsp", "ripple_db", cfg.dsp.ripple_db, 0.01, 10.0);
        cfg.dsp.arv_window = num_in(d, "dsp", "arv_window", cfg.dsp.arv_window, 1e-3, 10.0);
    }

    if (j.contains("controller")) {
        const auto& c = j.at("controller");
        reject_unknown(c, "controller",
                       {"type", "amplitude", "tau_m", "r", "i_drive", "b_target", "t_up", "t_low",
                        "i_min", "i_max", "ts", "gain", "waveform"});
        try {
            cfg.controller.kind = controller_kind_from_string(str_or(c, "controller", "type", "onoff_lif"));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("config: controller.type: ") + e.what());
        }
        cfg.controller.open_loop_amplitude =
            num_in(c, "controller", "amplitude", cfg.controller.open_loop_amplitude, 0.0, 3.0);
        LifControllerParams& lp = cfg.controller.params;
        lp.tau_m = num_in(c, "controller", "tau_m", lp.tau_m, 1e-6, 1e6);
        lp.r = num_in(c, "controller", "r", lp.r, 1e-9, 1e9);
        lp.i_drive = num_in(c, "controller", "i_drive", lp.i_drive, 0.0, 1e6);
        lp.b_target = num_in(c, "controller", "b_target", lp.b_target, 1e-9, 1e3);
        lp.t_up = num_in(c, "controller", "t_up", lp.t_up, 1e-9, 1e3);
        lp.t_low = num_in(c, "controller", "t_low", lp.t_low, 0.0, 1e3);
        lp.i_min = num_in(c, "controller", "i_min", lp.i_min, 0.0, 3.0);
        lp.i_max = num_in(c, "controller", "i_max", lp.i_max, 0.0, 3.0);
        lp.ts = num_in(c, "controller", "ts", lp.ts, 1e-6, 10.0);
        lp.gain = num_in(c, "controller", "gain", lp.gain, 0.0, 1e6);
        if (c.contains("waveform")) {
            const auto& w = c.at("waveform");
            reject_unknown(w, "controller.waveform", {"frequency_hz", "pulse_width_s"});
            DbsWaveformSpec& ws = cfg.controller.waveform;
            ws.frequency_hz = num_in(w, "controller.waveform", "frequency_hz", ws.frequency_hz, 1.0, 10000.0);
            ws.pulse_width_s = num_in(w, "controller.waveform", "pulse_width_s", ws.pulse_width_s, 1e-6, 1.0);
        }
        cfg.controller.params.validate();
        cfg.controller.waveform.validate();
    }

    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        reject_unknown(m, "metrics", {"z_e", "b_target", "t_sim", "burn_in"});
        cfg.metrics.z_e = num_in(m, "metrics", "z_e", cfg.metrics.z_e, 1e-6, 1e9);
        cfg.metrics.b_target = num_in(m, "metrics", "b_target", cfg.metrics.b_target, 1e-9, 1e3);
        cfg.metrics.t_sim = num_in(m, "metrics", "t_sim", cfg.metrics.t_sim, 5.0, 1e5);
        cfg.metrics.burn_in = num_in(m, "metrics", "burn_in", cfg.metrics.burn_in, 0.0, 1e5);
        cfg.metrics.validate();
    }

    if (j.contains("output")) {
        const auto& o = j.at("output");
        reject_unknown(o, "output", {"label"});
        cfg.label = str_or(o, "output", "label", "");
    }

    Plant::validate(cfg.plant);
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config: " + path.string() + ": " + e.what());
    }
    return parse_experiment_config(j);
}

/// Canonical JSON of the resolved configuration (defaults materialized).
inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["plant"] = {
        {"mode", cfg.plant.mode == PlantMode::surrogate ? "surrogate" : "network"},
        {"dt", cfg.plant.resolved_dt()},
        {"seed", cfg.plant.seed},
        {"severity", to_string(cfg.plant.severity)},
    };
    if (cfg.plant.mode == PlantMode::surrogate) {
        const SurrogateConfig& s = cfg.plant.surrogate;
        j["plant"]["surrogate"] = {{"b0", cfg.plant.resolved_b0()}, {"i50", s.i50},
                                   {"k", s.k},                      {"f_beta", s.f_beta},
                                   {"tau_p", s.tau_p},              {"noise_amp", s.noise_amp},
                                   {"ou_tau", s.ou_tau},            {"ou_std", s.ou_std}};
    } else {
        const NetworkConfig& n = cfg.plant.network;
        j["plant"]["network"] = {{"n_stn", n.n_stn},
                                 {"n_gpe", n.n_gpe},
                                 {"n_gpi", n.n_gpi},
                                 {"n_thal", n.n_thal},
                                 {"n_interneuron", n.n_interneuron},
                                 {"n_cortical", n.n_cortical},
                                 {"striatal_rate_hz", n.striatal_rate_hz},
                                 {"lfp_gain", n.tuning.lfp_gain},
                                 {"in_degrees",
                                  {{"stn_from_gpe", n.indeg.stn_from_gpe},
                                   {"stn_from_ctx", n.indeg.stn_from_ctx},
                                   {"gpe_from_striatum", n.indeg.gpe_from_striatum},
                                   {"gpe_from_gpe", n.indeg.gpe_from_gpe},
                                   {"gpe_from_stn", n.indeg.gpe_from_stn},
                                   {"gpi_from_stn", n.indeg.gpi_from_stn},
                                   {"gpi_from_gpe", n.indeg.gpi_from_gpe},
                                   {"thal_from_gpi", n.indeg.thal_from_gpi},
                                   {"ctx_from_thal", n.indeg.ctx_from_thal},
                                   {"ctx_from_interneuron", n.indeg.ctx_from_interneuron},
                                   {"interneuron_from_ctx", n.indeg.interneuron_from_ctx}}}};
    }
    j["dsp"] = {{"f_center", cfg.dsp.f_center},
                {"bandwidth", cfg.dsp.bandwidth},
                {"order", cfg.dsp.order},
                {"ripple_db", cfg.dsp.ripple_db},
                {"arv_window", cfg.dsp.arv_window}};
    const LifControllerParams& lp = cfg.controller.params;
    j["controller"] = {{"type", cfg.controller.id()},
                       {"amplitude", cfg.controller.open_loop_amplitude},
                       {"tau_m", lp.tau_m},
                       {"r", lp.r},
                       {"i_drive", lp.i_drive},
                       {"b_target", lp.b_target},
                       {"t_up", lp.t_up},
                       {"t_low", lp.t_low},
                       {"i_min", lp.i_min},
                       {"i_max", lp.i_max},
                       {"ts", lp.ts},
                       {"gain", lp.gain},
                       {"waveform",
                        {{"frequency_hz", cfg.controller.waveform.frequency_hz},
                         {"pulse_width_s", cfg.controller.waveform.pulse_width_s}}}};
    j["metrics"] = {{"z_e", cfg.metrics.z_e},
                    {"b_target", cfg.metrics.b_target},
                    {"t_sim", cfg.metrics.t_sim},
                    {"burn_in", cfg.metrics.burn_in}};
    j["output"] = {{"label", cfg.label}};
    return j;
}

inline std::string config_digest(const ExperimentConfig& cfg) {
    return detail::sha256_hex(to_json(cfg).dump());
}

}  // namespace cldbs
