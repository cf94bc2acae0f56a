#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cldbs/config.hpp"
#include "cldbs/control.hpp"
#include "cldbs/metrics.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// Shared experiment drivers behind the CLI subcommands. Every scenario of a
// comparison runs on a plant built from the same (config, seed), so the
// baselines are exactly the traces the controllers were measured against.

struct RunOutput {
    SimulationTrace trace;
    MetricsReport report;
};

namespace detail {

inline PlantConfig plant_for_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    PlantConfig pc = cfg.plant;
    pc.seed = seed;
    return pc;
}

/// Resolves the beta-band center once per (config, seed): the configured
/// value if set, otherwise the DBS-off spectral peak.
inline ChainConfig resolved_chain(const ExperimentConfig& cfg, std::uint64_t seed) {
    ChainConfig chain = cfg.dsp;
    if (chain.f_center <= 0.0)
        chain.f_center = estimate_dbs_off_beta_peak(plant_for_seed(cfg, seed),
                                                    std::min(cfg.metrics.t_sim, 10.0));
    return chain;
}

/// amplitude_ma < 0 keeps the configured open-loop amplitude; benchmark
/// scenarios pass the 2.5 mA reference explicitly.
inline SimulationTrace run_scenario(const ExperimentConfig& cfg, std::uint64_t seed,
                                    ControllerKind kind, const ChainConfig& chain,
                                    double amplitude_ma = -1.0) {
    Plant plant(plant_for_seed(cfg, seed));
    Controller ctrl = cfg.controller;
    ctrl.kind = kind;
    ctrl.reset();
    if (kind == ControllerKind::open_loop && amplitude_ma >= 0.0)
        ctrl.open_loop_amplitude = amplitude_ma;
    SimulationTrace tr = run_closed_loop(plant, ctrl, cfg.metrics.t_sim, chain);
    tr.meta.config_digest = config_digest(cfg);
    return tr;
}

}  // namespace detail

/// One closed-loop run of the configured controller, reported against the
/// DBS-off baseline and the 2.5 mA open-loop reference power on the same
/// plant seed.
inline RunOutput run_simulate(const ExperimentConfig& cfg) {
    const std::uint64_t seed = cfg.plant.seed;
    const ChainConfig chain = detail::resolved_chain(cfg, seed);
    const double duty = cfg.controller.waveform.duty();

    SimulationTrace off = detail::run_scenario(cfg, seed, ControllerKind::dbs_off, chain);
    const SimulationTrace reference =
        detail::run_scenario(cfg, seed, ControllerKind::open_loop, chain, 2.5);
    const double reference_power = trace_power_w(reference, cfg.metrics, duty);

    RunOutput out;
    if (cfg.controller.kind == ControllerKind::dbs_off) {
        out.trace = std::move(off);
        out.report = compute_report(out.trace, out.trace, reference_power, cfg.metrics, duty);
    } else if (cfg.controller.kind == ControllerKind::open_loop &&
               cfg.controller.open_loop_amplitude == 2.5) {
        out.trace = reference;
        out.report = compute_report(out.trace, off, reference_power, cfg.metrics, duty);
    } else {
        out.trace = detail::run_scenario(cfg, seed, cfg.controller.kind, chain);
        out.report = compute_report(out.trace, off, reference_power, cfg.metrics, duty);
    }
    return out;
}

struct ComparisonRow {
    std::uint64_t seed = 0;
    std::string controller;
    double mse_raw = 0.0;
    double mse_pct = 0.0;
    double power_w = 0.0;
    double power_pct = 0.0;
    double efficiency_std = 0.0;
    double efficiency_as_printed = 0.0;
};

struct ComparisonResult {
    std::vector<ComparisonRow> rows;  // 4 rows per seed: dbs_off, open_loop, onoff, dual
    std::vector<SimulationTrace> traces;
};

/// Benchmarks the four scenarios on identical plant seeds.
inline ComparisonResult run_compare(const ExperimentConfig& cfg,
                                    const std::vector<std::uint64_t>& seeds,
                                    bool keep_traces = false) {
    if (seeds.empty()) throw std::invalid_argument("run_compare: no seeds");
    ComparisonResult result;
    const double duty = cfg.controller.waveform.duty();
    static constexpr ControllerKind kScenarios[4] = {
        ControllerKind::dbs_off, ControllerKind::open_loop, ControllerKind::onoff_lif,
        ControllerKind::dual_lif};

    for (std::uint64_t seed : seeds) {
        const ChainConfig chain = detail::resolved_chain(cfg, seed);
        SimulationTrace off = detail::run_scenario(cfg, seed, ControllerKind::dbs_off, chain);
        SimulationTrace reference =
            detail::run_scenario(cfg, seed, ControllerKind::open_loop, chain, 2.5);
        const double reference_power = trace_power_w(reference, cfg.metrics, duty);

        for (ControllerKind kind : kScenarios) {
            SimulationTrace tr;
            if (kind == ControllerKind::dbs_off) {
                tr = off;
            } else if (kind == ControllerKind::open_loop) {
                tr = reference;
            } else {
                tr = detail::run_scenario(cfg, seed, kind, chain);
            }
            const MetricsReport rep = compute_report(tr, off, reference_power, cfg.metrics, duty);
            ComparisonRow row;
            row.seed = seed;
            row.controller = rep.controller_id;
            row.mse_raw = rep.mse_raw;
            row.mse_pct = rep.mse_pct;
            row.power_w = rep.power_w;
            row.power_pct = rep.power_pct;
            row.efficiency_std = rep.efficiency_std;
            row.efficiency_as_printed = rep.efficiency_as_printed;
            result.rows.push_back(std::move(row));
            if (keep_traces) result.traces.push_back(std::move(tr));
        }
    }
    return result;
}

inline nlohmann::json to_json(const MetricsReport& r) {
    return nlohmann::json{{"controller", r.controller_id},
                          {"mse_raw", r.mse_raw},
                          {"mse_pct", r.mse_pct},
                          {"power_w", r.power_w},
                          {"power_pct", r.power_pct},
                          {"efficiency_std", r.efficiency_std},
                          {"efficiency_as_printed", r.efficiency_as_printed},
                          {"t_sim", r.t_sim},
                          {"burn_in_excluded", r.burn_in_excluded}};
}

/// Comparison table CSV, one row per (seed, controller).
inline std::string comparison_csv(const ComparisonResult& result) {
    std::string out =
        "seed,controller,mse_pct,power_pct,efficiency_std,efficiency_as_printed,mse_raw,power_w\n";
    char buf[256];
    for (const ComparisonRow& r : result.rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      static_cast<unsigned long long>(r.seed), r.controller.c_str(), r.mse_pct,
                      r.power_pct, r.efficiency_std, r.efficiency_as_printed, r.mse_raw,
                      r.power_w);
        out += buf;
    }
    return out;
}

}  // namespace cldbs
