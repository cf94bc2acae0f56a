// Calibration harness for the network plant and the comparison benchmark.
// Not part of the test suite; prints diagnostics for parameter tuning.
//
//   plant_probe network <severity> <i_dbs_ma> <duration_s> [scale] [seed]
//   plant_probe compare5 <n_seeds> [ou_std] [noise_amp]

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "cldbs/cldbs.hpp"

using namespace cldbs;

namespace {

int probe_network(int argc, char** argv) {
    const Severity sev = severity_from_string(argc > 2 ? argv[2] : "severe");
    const double i_dbs = argc > 3 ? std::atof(argv[3]) : 0.0;
    const double duration = argc > 4 ? std::atof(argv[4]) : 10.0;
    const int scale = argc > 5 ? std::atoi(argv[5]) : 10;
    const std::uint64_t seed = argc > 6 ? std::strtoull(argv[6], nullptr, 10) : 1;

    PlantConfig pc;
    pc.mode = PlantMode::network;
    pc.severity = sev;
    pc.seed = seed;
    if (scale > 1) pc.network = make_reduced_config(pc.network, scale);

    Plant plant(pc);
    const double dt = plant.dt();
    const double fs = 1.0 / dt;
    const auto n = static_cast<std::size_t>(duration / dt);

    DbsWaveformSpec waveform;
    TimeSeries lfp;
    lfp.fs = fs;
    lfp.unit = "uV";
    lfp.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        lfp.samples.push_back(plant.step(dbs_pulse_train(waveform, i_dbs, t)));
    }

    const auto& counts = plant.network().spike_counts();
    const NetworkConfig& nc = plant.network().config();
    const int sizes[6] = {nc.n_stn, nc.n_gpe, nc.n_gpi, nc.n_thal, nc.n_interneuron, nc.n_cortical};
    const char* names[6] = {"stn", "gpe", "gpi", "thal", "int", "ctx"};
    std::printf("rates(Hz):");
    for (int i = 0; i < 6; ++i)
        std::printf(" %s=%.1f", names[i],
                    static_cast<double>(counts[i]) / (sizes[i] * duration));
    std::printf("\n");

    const TimeSeries tail = lfp.tail_from(duration / 3.0);
    double mean = 0.0, var = 0.0;
    for (double v : tail.samples) mean += v;
    mean /= static_cast<double>(tail.size());
    for (double v : tail.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(tail.size());

    const Spectrum s = welch_psd(tail, 2.0);
    const double beta = band_power(s, 13.0, 30.0);
    const double total = band_power(s, 1.0, 100.0);
    double peak = estimate_beta_peak(tail);

    // beta ARV through the standard chain centered on the measured peak
    const FilterCoeffs coeffs = design_beta_bandpass(fs, peak);
    const TimeSeries arv =
        moving_average_arv(full_wave_rectify(filter_signal(coeffs, lfp)), 0.1);
    const TimeSeries arv_tail = arv.tail_from(duration / 3.0);
    double arv_mean = 0.0;
    for (double v : arv_tail.samples) arv_mean += v;
    arv_mean /= static_cast<double>(arv_tail.size());

    std::printf("lfp: mean=%.4g std=%.4g uV | beta[13,30]=%.4g total[1,100]=%.4g frac=%.3f "
                "peak=%.1fHz | beta ARV=%.4g uV\n",
                mean, std::sqrt(var), beta, total, beta / total, peak, arv_mean);
    return 0;
}

// binned population rates to stdout for rhythm inspection
int probe_rhythm(int argc, char** argv) {
    const Severity sev = severity_from_string(argc > 2 ? argv[2] : "severe");
    const double i_dbs = argc > 3 ? std::atof(argv[3]) : 0.0;
    const double duration = argc > 4 ? std::atof(argv[4]) : 4.0;
    const int scale = argc > 5 ? std::atoi(argv[5]) : 10;

    PlantConfig pc;
    pc.mode = PlantMode::network;
    pc.severity = sev;
    pc.seed = 1;
    if (scale > 1) pc.network = make_reduced_config(pc.network, scale);
    Plant plant(pc);
    const double dt = plant.dt();
    const auto n = static_cast<std::size_t>(duration / dt);
    const auto bin_steps = static_cast<std::size_t>(0.005 / dt);  // 5 ms bins

    DbsWaveformSpec waveform;
    std::array<std::uint64_t, 6> prev{};
    std::printf("t_ms,stn,gpe,gpi,thal,int,ctx,lfp,gaba_g,ampa_g\n");
    double lfp_acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        lfp_acc += plant.step(dbs_pulse_train(waveform, i_dbs, t));
        if ((k + 1) % bin_steps == 0) {
            const auto& counts = plant.network().spike_counts();
            double gg = 0.0, ga = 0.0;
            const int n_stn = plant.network().config().n_stn;
            for (int j = 0; j < n_stn; ++j) {
                gg += plant.network().stn_gaba_conductance(j);
                ga += plant.network().stn_ampa_conductance(j);
            }
            std::printf("%.0f,%llu,%llu,%llu,%llu,%llu,%llu,%.4f,%.3f,%.3f\n", t * 1e3,
                        (unsigned long long)(counts[0] - prev[0]),
                        (unsigned long long)(counts[1] - prev[1]),
                        (unsigned long long)(counts[2] - prev[2]),
                        (unsigned long long)(counts[3] - prev[3]),
                        (unsigned long long)(counts[4] - prev[4]),
                        (unsigned long long)(counts[5] - prev[5]),
                        lfp_acc / bin_steps, gg / n_stn, ga / n_stn);
            prev = counts;
            lfp_acc = 0.0;
        }
    }
    return 0;
}

int probe_compare5(int argc, char** argv) {
    const int n_seeds = argc > 2 ? std::atoi(argv[2]) : 5;
    ExperimentConfig cfg = parse_experiment_config(nlohmann::json::object());
    if (argc > 3) cfg.plant.surrogate.ou_std = std::atof(argv[3]);
    if (argc > 4) cfg.plant.surrogate.noise_amp = std::atof(argv[4]);

    int ok_count = 0;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        const ComparisonResult r = run_compare(cfg, {static_cast<std::uint64_t>(seed)});
        double p_ol = 0, p_on = 0, p_du = 0, e_ol = 0, e_on = 0, e_du = 0, m_on = 0, m_du = 0;
        for (const ComparisonRow& row : r.rows) {
            if (row.controller == "open_loop") { p_ol = row.power_pct; e_ol = row.efficiency_std; }
            if (row.controller == "onoff_lif") { p_on = row.power_pct; e_on = row.efficiency_std; m_on = row.mse_pct; }
            if (row.controller == "dual_lif") { p_du = row.power_pct; e_du = row.efficiency_std; m_du = row.mse_pct; }
        }
        const bool ok = p_du < p_on && p_on < p_ol && e_du > e_on && e_on > e_ol &&
                        m_on < 100.0 && m_du < 100.0;
        ok_count += ok;
        std::printf("seed=%d power%%: ol=%.1f on=%.2f du=%.2f | eff: ol=%.2f on=%.2f du=%.2f | "
                    "mse%%: on=%.1f du=%.1f | %s\n",
                    seed, p_ol, p_on, p_du, e_ol, e_on, e_du, m_on, m_du, ok ? "OK" : "FAIL");
    }
    std::printf("pass %d/%d\n", ok_count, n_seeds);
    return ok_count == n_seeds ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: plant_probe network|rhythm|compare5 ...\n");
        return 2;
    }
    const std::string cmd = argv[1];
    try {
        if (cmd == "network") return probe_network(argc, argv);
        if (cmd == "rhythm") return probe_rhythm(argc, argv);
        if (cmd == "compare5") return probe_compare5(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::fprintf(stderr, "unknown probe '%s'\n", cmd.c_str());
    return 2;
}
