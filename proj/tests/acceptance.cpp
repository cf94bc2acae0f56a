// Acceptance suite: one pass/fail line per criterion, exit 0 only if all pass.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cldbs/cldbs.hpp"

using namespace cldbs;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Criterion {
    int id;
    const char* name;
    bool passed = true;
    std::string detail;
    double seconds = 0.0;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::vector<Criterion>& results() {
    static std::vector<Criterion> r;
    return r;
}

template <typename F>
void run_criterion(int id, const char* name, double time_budget_s, F&& body) {
    Criterion c{id, name};
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("exception: ") + e.what());
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_budget_s > 0.0)
        c.expect(c.seconds < time_budget_s,
                 "runtime " + std::to_string(c.seconds) + " s exceeds budget");
    std::printf("criterion %d [%s]: %s (%.2f s)%s%s\n", c.id, name,
                c.passed ? "PASS" : "FAIL", c.seconds, c.detail.empty() ? "" : " -- ",
                c.detail.c_str());
    std::fflush(stdout);
    results().push_back(std::move(c));
}

TimeSeries constant_series(double value, std::size_t n, double fs) {
    TimeSeries x;
    x.fs = fs;
    x.samples.assign(n, value);
    return x;
}

double cascade_magnitude(const FilterCoeffs& c, double f_hz) {
    const std::complex<double> z = std::polar(1.0, 2.0 * kPi * f_hz / c.design.fs);
    const std::complex<double> zi1 = 1.0 / z;
    const std::complex<double> zi2 = zi1 * zi1;
    std::complex<double> h{1.0, 0.0};
    for (const BiquadSection& s : c.sections)
        h *= (s.b0 + s.b1 * zi1 + s.b2 * zi2) / (1.0 + s.a1 * zi1 + s.a2 * zi2);
    return std::abs(h);
}

struct NetworkBetaStats {
    double beta_power = 0.0;
    double fraction = 0.0;
};

NetworkBetaStats network_beta(Severity sev, double dbs_amplitude, double duration_s,
                              std::uint64_t seed) {
    PlantConfig pc;
    pc.mode = PlantMode::network;
    pc.severity = sev;
    pc.seed = seed;
    pc.network = make_reduced_config(pc.network, 10);  // 60 neurons total

    Plant plant(pc);
    const double dt = plant.dt();
    DbsWaveformSpec waveform;
    TimeSeries lfp;
    lfp.fs = 1.0 / dt;
    lfp.unit = "uV";
    const auto n = static_cast<std::size_t>(duration_s / dt);
    lfp.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        lfp.samples.push_back(plant.step(dbs_pulse_train(waveform, dbs_amplitude, t)));
    }
    const TimeSeries tail = lfp.tail_from(duration_s / 3.0);  // final two-thirds
    const Spectrum s = welch_psd(tail, 2.0);
    NetworkBetaStats out;
    out.beta_power = band_power(s, 13.0, 30.0);
    out.fraction = out.beta_power / band_power(s, 1.0, 100.0);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    run_criterion(1, "metric closed forms", 1.0, [](Criterion& c) {
        const TimeSeries steady = constant_series(2.5, 30001, 1000.0);
        const double p = power_consumption(steady, 500.0, steady.duration());
        c.expect(std::abs(p - 3.125e-3) / 3.125e-3 < 1e-9, "power of constant 2.5 mA");

        for (double v : error_signal(constant_series(0.104, 101, 100.0), 0.104).samples)
            c.expect(v == 0.0, "error at target");
        for (double v : error_signal(constant_series(0.208, 101, 100.0), 0.104).samples)
            c.expect(std::abs(v - 1.0) < 1e-12, "error at twice target");
        for (double v : error_signal(constant_series(0.0, 101, 100.0), 0.104).samples)
            c.expect(v == -1.0, "error at zero");

        const TimeSeries ones = constant_series(1.0, 1001, 100.0);
        c.expect(mse(ones, ones.duration()) == 1.0, "mse of unit error");
        c.expect(mse(constant_series(0.0, 1001, 100.0), 10.0) == 0.0, "mse of zero error");
        TimeSeries square = ones;
        for (std::size_t i = 0; i < square.size(); ++i)
            square.samples[i] = (i % 2 == 0) ? 1.0 : -1.0;
        c.expect(std::abs(mse(square, square.duration()) - 1.0) < 1e-12, "mse of square wave");
    });

    run_criterion(2, "filter oracle", 1.0, [](Criterion& c) {
        const FilterCoeffs f = design_beta_bandpass(2000.0, 20.0, 8.0, 4, 1.0);
        c.expect(f.sections.size() == 2, "two sections");
        for (const BiquadSection& s : f.sections)
            c.expect(s.stable() && s.pole_radius2() < 1.0, "pole inside unit circle");
        const double db20 = 20.0 * std::log10(cascade_magnitude(f, 20.0));
        const double db10 = 20.0 * std::log10(cascade_magnitude(f, 10.0));
        const double db40 = 20.0 * std::log10(cascade_magnitude(f, 40.0));
        c.expect(db20 <= 1e-9 && db20 >= -1.0 - 1e-9, "|H(20)| in [-1, 0] dB");
        c.expect(db10 <= -20.0, "|H(10)| <= -20 dB");
        c.expect(db40 <= -20.0, "|H(40)| <= -20 dB");
    });

    run_criterion(3, "rectifier and ARV analytics", 1.0, [](Criterion& c) {
        TimeSeries sine;
        sine.fs = 1000.0;
        for (int i = 0; i < 5000; ++i)  // 100 cycles at 20 Hz
            sine.samples.push_back(std::sin(2.0 * kPi * 20.0 * i / 1000.0));
        const TimeSeries rect = full_wave_rectify(sine);
        double mean = 0.0;
        for (double v : rect.samples) mean += v;
        mean /= static_cast<double>(rect.size());
        c.expect(std::abs(mean - 2.0 / kPi) / (2.0 / kPi) < 0.005, "rectified sine mean 2/pi");

        const TimeSeries flat = constant_series(0.137, 600, 1000.0);
        const TimeSeries arv = moving_average_arv(flat, 0.1);
        for (double v : arv.samples) c.expect(v == 0.137, "ARV of constant is the constant");
    });

    run_criterion(4, "controller laws", 1.0, [](Criterion& c) {
        LifControllerParams p;
        LifControllerState s;
        s.i_dbs = 1.0;
        const double out = onoff_lif_step(s, p, 0.204);
        c.expect(std::abs(out - 1.0192) < 1e-12, "on-off increment 0.0192");

        LifControllerState hold;
        hold.i_dbs = 1.7;
        for (int i = 0; i < 100; ++i) onoff_lif_step(hold, p, 0.09);
        c.expect(hold.i_dbs == 1.7, "on-off holds below target");

        LifControllerState sat;
        const double arv = 0.204;
        const double delta = p.ts * (-(arv - p.b_target) + p.r * p.i_drive) / (p.tau_m * p.r);
        const int expected = static_cast<int>(std::ceil(3.0 / delta));
        int steps = 0;
        while (sat.i_dbs < 3.0 && steps < 100000) {
            onoff_lif_step(sat, p, arv);
            ++steps;
        }
        c.expect(steps == expected, "saturation step count");
        c.expect(sat.i_dbs == 3.0, "saturates at exactly 3.0");
        onoff_lif_step(sat, p, arv);
        c.expect(sat.i_dbs == 3.0, "stays at 3.0");

        LifControllerState d;
        d.i_dbs = 1.0;
        const double down = dual_lif_step(d, p, 0.03);
        c.expect(std::abs(down - 0.98017656) < 1e-12, "dual decrement to 0.98017656");
        d.i_dbs = 1.0;
        for (double v : {0.06, 0.08, 0.1, 0.0521})
            c.expect(dual_lif_step(d, p, v) == 1.0, "dual deadband hold");
        c.expect(dual_lif_step(d, p, 0.2) > 1.0, "dual increments above upper target");
    });

    run_criterion(5, "controller benchmark orderings", 120.0, [](Criterion& c) {
        const ExperimentConfig cfg = parse_experiment_config(nlohmann::json::object());
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const ComparisonResult r = run_compare(cfg, {seed});
            double p_ol = 0, p_on = 0, p_du = 0, e_ol = 0, e_on = 0, e_du = 0, m_on = 0, m_du = 0;
            for (const ComparisonRow& row : r.rows) {
                if (row.controller == "open_loop") { p_ol = row.power_pct; e_ol = row.efficiency_std; }
                if (row.controller == "onoff_lif") { p_on = row.power_pct; e_on = row.efficiency_std; m_on = row.mse_pct; }
                if (row.controller == "dual_lif") { p_du = row.power_pct; e_du = row.efficiency_std; m_du = row.mse_pct; }
            }
            const std::string tag = " (seed " + std::to_string(seed) + ")";
            c.expect(p_du < p_on, "power dual < on-off" + tag);
            c.expect(p_on < p_ol, "power on-off < open-loop" + tag);
            c.expect(e_du > e_on, "efficiency dual > on-off" + tag);
            c.expect(e_on > e_ol, "efficiency on-off > open-loop" + tag);
            c.expect(m_on < 100.0, "mse%% on-off < 100" + tag);
            c.expect(m_du < 100.0, "mse%% dual < 100" + tag);
        }
    });

    run_criterion(6, "network-plant behavior", 300.0, [](Criterion& c) {
        const NetworkBetaStats severe_off = network_beta(Severity::severe, 0.0, 10.0, 1);
        const NetworkBetaStats healthy_off = network_beta(Severity::healthy, 0.0, 10.0, 1);
        const NetworkBetaStats severe_dbs = network_beta(Severity::severe, 2.5, 10.0, 1);

        c.expect(severe_off.fraction >= 2.0 * healthy_off.fraction,
                 "severe beta fraction " + std::to_string(severe_off.fraction) +
                     " < 2x healthy " + std::to_string(healthy_off.fraction));
        c.expect(severe_dbs.beta_power <= 0.5 * severe_off.beta_power,
                 "2.5 mA beta power " + std::to_string(severe_dbs.beta_power) +
                     " > 50% of DBS-off " + std::to_string(severe_off.beta_power));
    });

    run_criterion(7, "simulate determinism", 120.0, [](Criterion& c) {
        const fs::path dir = fs::temp_directory_path() / "cldbs_acceptance_det";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const fs::path cfg = dir / "config.json";
        {
            std::ofstream f(cfg);
            f << R"({"plant": {"seed": 21}, "metrics": {"t_sim": 10.0}})";
        }
        auto invoke = [&](const char* sub) {
            const std::string cmd = std::string(CLDBS_TOOL_PATH) + " simulate --config " +
                                    cfg.string() + " --out " + (dir / sub).string() +
                                    " > /dev/null 2>&1";
            return std::system(cmd.c_str());
        };
        c.expect(invoke("a") == 0, "first simulate run");
        c.expect(invoke("b") == 0, "second simulate run");
        c.expect(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"),
                 "trace files byte-identical");
        c.expect(!slurp(dir / "a" / "trace.csv").empty(), "trace file non-empty");
        c.expect(slurp(dir / "a" / "metrics.json") == slurp(dir / "b" / "metrics.json"),
                 "metric JSON byte-identical");
    });

    run_criterion(8, "dataset round trip", 300.0, [](Criterion& c) {
        const fs::path dir = fs::temp_directory_path() / "cldbs_acceptance_dataset";
        fs::remove_all(dir);

        DatasetSpec spec;
        spec.severities = {Severity::healthy, Severity::mild, Severity::moderate,
                           Severity::severe};
        spec.scenarios = {"dbs_off", "open_loop"};
        spec.seeds = {1, 2};
        spec.duration_s = 10.0;

        const DatasetManifest manifest = generate_dataset(spec, dir);
        c.expect(manifest.runs.size() == 16, "16 run files");
        for (const auto& r : manifest.runs)
            c.expect(fs::exists(dir / r.file), "file exists: " + r.file);

        try {
            validate_manifest(dir / "manifest.json");
        } catch (const std::exception& e) {
            c.expect(false, std::string("manifest validation: ") + e.what());
        }

        // round trip: reading each run back and rewriting it reproduces the digest
        for (const auto& r : manifest.runs) {
            const SimulationTrace back = read_run(dir / r.file);
            const std::string digest = write_run(back, dir / (r.run_id + "_rewrite.csv"));
            c.expect(digest == r.digest, "round-trip digest for " + r.run_id);
        }

        // severity ladder: severe DBS-off mean ARV above healthy in every seed
        for (std::uint64_t seed : {1ull, 2ull}) {
            auto mean_arv = [&](const char* sev) {
                const std::string id =
                    std::string(sev) + "_dbs_off_seed" + std::to_string(seed);
                const SimulationTrace tr = read_run(dir / "runs" / (id + ".csv"));
                const TimeSeries arv = tr.beta_arv.tail_from(2.0);
                double acc = 0.0;
                for (double v : arv.samples) acc += v;
                return acc / static_cast<double>(arv.size());
            };
            c.expect(mean_arv("severe") > mean_arv("healthy"),
                     "severe > healthy ARV, seed " + std::to_string(seed));
        }
    });

    run_criterion(9, "module property suites", 120.0, [](Criterion& c) {
        std::mt19937_64 rng(4242);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        // clamp invariant
        for (int trial = 0; trial < 100; ++trial) {
            LifControllerParams p;
            p.gain = 0.1 + 60.0 * u01(rng);
            LifControllerState onoff, dual;
            onoff.i_dbs = dual.i_dbs = 3.0 * u01(rng);
            for (int k = 0; k < 100; ++k) {
                const double arv = u01(rng);
                const double a = onoff_lif_step(onoff, p, arv);
                const double b = dual_lif_step(dual, p, arv);
                if (!(a >= 0.0 && a <= 3.0 && b >= 0.0 && b <= 3.0)) {
                    c.expect(false, "clamp invariant violated");
                    return;
                }
            }
        }

        // streaming-filter chunk equivalence, bit for bit
        const FilterCoeffs coeffs = design_beta_bandpass(1000.0, 20.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(300 + static_cast<std::size_t>(u01(rng) * 700));
            for (double& v : x) v = 10.0 * (u01(rng) - 0.5);
            StreamingFilter whole(coeffs), chunked(coeffs);
            std::vector<double> a, b;
            for (double v : x) a.push_back(whole.process(v));
            std::size_t i = 0;
            while (i < x.size()) {
                const std::size_t len =
                    std::min<std::size_t>(1 + static_cast<std::size_t>(u01(rng) * 64),
                                          x.size() - i);
                for (std::size_t k = 0; k < len; ++k) b.push_back(chunked.process(x[i + k]));
                i += len;
            }
            if (a != b) {
                c.expect(false, "chunked filtering diverged");
                return;
            }
        }

        // Parseval within 5%
        for (int trial = 0; trial < 100; ++trial) {
            TimeSeries x;
            x.fs = 500.0 + 1000.0 * u01(rng);
            x.samples.resize(4096 + static_cast<std::size_t>(u01(rng) * 4096));
            std::normal_distribution<double> g(0.0, 0.5 + 2.0 * u01(rng));
            for (double& v : x.samples) v = g(rng);
            const Spectrum s = welch_psd(x, 0.5 + u01(rng));
            double total = 0.0;
            for (double p : s.psd) total += p;
            total *= s.resolution_hz;
            double msq = 0.0;
            for (double v : x.samples) msq += v * v;
            msq /= static_cast<double>(x.size());
            if (std::abs(total - msq) / msq > 0.05) {
                c.expect(false, "Parseval deviation above 5%");
                return;
            }
        }

        // quadratic scaling of mse and power
        for (int trial = 0; trial < 100; ++trial) {
            TimeSeries e;
            e.fs = 100.0;
            e.samples.resize(200 + static_cast<std::size_t>(u01(rng) * 300));
            std::normal_distribution<double> g(0.0, 1.0);
            for (double& v : e.samples) v = g(rng);
            const double k = 0.1 + 8.0 * u01(rng);
            TimeSeries scaled = e;
            for (double& v : scaled.samples) v *= k;
            const double m0 = mse(e, e.duration());
            const double m1 = mse(scaled, e.duration());
            const double p0 = power_consumption(e, 500.0, e.duration());
            const double p1 = power_consumption(scaled, 500.0, e.duration());
            if (std::abs(m1 - k * k * m0) > 1e-12 * std::max(1.0, k * k * m0) ||
                std::abs(p1 - k * k * p0) > 1e-12 * std::max(1e-12, k * k * p0)) {
                c.expect(false, "quadratic scaling violated");
                return;
            }
        }
    });

    int failures = 0;
    for (const Criterion& c : results()) failures += c.passed ? 0 : 1;
    if (failures > 0) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all %zu criteria passed\n", results().size());
    return failures == 0 ? 0 : 1;
}
