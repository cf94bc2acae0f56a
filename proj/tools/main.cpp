// cldbs: closed-loop DBS simulation bench.
//
// Subcommands: simulate, compare, sweep, gen-dataset, plot.
// Exit codes: 0 success, 1 runtime or configuration error, 2 usage error.
// stdout carries machine-readable JSON summaries; diagnostics go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "cldbs/cldbs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void emit_summary(const json& j) { std::cout << j.dump() << "\n"; }

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const cldbs::ExperimentConfig cfg = cldbs::load_experiment_config(config_path);
    fs::create_directories(out_dir);

    cldbs::RunOutput out = cldbs::run_simulate(cfg);
    const fs::path trace_path = fs::path(out_dir) / "trace.csv";
    const fs::path metrics_path = fs::path(out_dir) / "metrics.json";
    const std::string digest = cldbs::write_run(out.trace, trace_path);
    write_text(metrics_path, cldbs::to_json(out.report).dump(2) + "\n");

    emit_summary({{"command", "simulate"},
                  {"controller", out.report.controller_id},
                  {"trace", trace_path.string()},
                  {"trace_digest", digest},
                  {"metrics", metrics_path.string()},
                  {"config_digest", cldbs::config_digest(cfg)}});
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                std::vector<std::uint64_t> seeds) {
    const cldbs::ExperimentConfig cfg = cldbs::load_experiment_config(config_path);
    if (seeds.empty()) seeds.push_back(cfg.plant.seed);
    fs::create_directories(out_dir);

    const cldbs::ComparisonResult result = cldbs::run_compare(cfg, seeds);
    const fs::path csv_path = fs::path(out_dir) / "comparison.csv";
    write_text(csv_path, cldbs::comparison_csv(result));
    cldbs::render_comparison_plots(result, out_dir);

    emit_summary({{"command", "compare"},
                  {"comparison", csv_path.string()},
                  {"rows", result.rows.size()},
                  {"seeds", seeds}});
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_dir) {
    if (values.empty()) throw std::runtime_error("sweep: no values given");
    json base = read_json_file(config_path);
    fs::create_directories(out_dir);

    // dot-separated parameter path into the config document
    std::vector<std::string> keys;
    for (std::size_t start = 0; start <= param.size();) {
        const std::size_t dot = param.find('.', start);
        keys.push_back(param.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (keys.empty() || keys.front().empty()) throw std::runtime_error("sweep: empty parameter path");

    // each value is an independent, identically seeded run; fan out
    std::vector<std::future<cldbs::MetricsReport>> futures;
    futures.reserve(values.size());
    for (double value : values) {
        json doc = base;
        json* node = &doc;
        for (std::size_t i = 0; i + 1 < keys.size(); ++i) node = &((*node)[keys[i]]);
        (*node)[keys.back()] = value;
        const cldbs::ExperimentConfig cfg = cldbs::parse_experiment_config(doc);
        futures.push_back(std::async(std::launch::async,
                                     [cfg] { return cldbs::run_simulate(cfg).report; }));
    }

    std::string csv = param + ",mse_raw,mse_pct,power_w,power_pct,efficiency_std\n";
    json runs = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const cldbs::MetricsReport report = futures[i].get();
        char row[256];
        std::snprintf(row, sizeof(row), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", values[i],
                      report.mse_raw, report.mse_pct, report.power_w, report.power_pct,
                      report.efficiency_std);
        csv += row;
        json entry = cldbs::to_json(report);
        entry["value"] = values[i];
        runs.push_back(entry);
    }
    const fs::path csv_path = fs::path(out_dir) / "sweep_summary.csv";
    write_text(csv_path, csv);
    write_text(fs::path(out_dir) / "sweep_summary.json", runs.dump(2) + "\n");

    emit_summary({{"command", "sweep"},
                  {"param", param},
                  {"values", values},
                  {"summary", csv_path.string()}});
    return 0;
}

int cmd_gen_dataset(const std::string& spec_path, const std::string& out_dir) {
    const json j = read_json_file(spec_path);
    for (const auto& item : j.items()) {
        static const char* allowed[] = {"severities", "scenarios", "seeds",     "mode",
                                        "duration_s", "config",    "open_loop_amplitude"};
        bool ok = false;
        for (const char* a : allowed) ok |= item.key() == a;
        if (!ok) throw std::runtime_error("dataset spec: unexpected key '" + item.key() + "'");
    }

    cldbs::DatasetSpec spec;
    if (j.contains("config")) {
        const cldbs::ExperimentConfig cfg = cldbs::parse_experiment_config(j.at("config"));
        spec.plant_template = cfg.plant;
        spec.chain = cfg.dsp;
        spec.duration_s = cfg.metrics.t_sim;
    }
    if (j.contains("severities"))
        for (const auto& s : j.at("severities"))
            spec.severities.push_back(cldbs::severity_from_string(s.get<std::string>()));
    if (j.contains("scenarios"))
        for (const auto& s : j.at("scenarios")) spec.scenarios.push_back(s.get<std::string>());
    if (j.contains("seeds"))
        for (const auto& s : j.at("seeds")) spec.seeds.push_back(s.get<std::uint64_t>());
    if (j.contains("mode")) {
        const std::string mode = j.at("mode").get<std::string>();
        if (mode == "surrogate") spec.mode = cldbs::PlantMode::surrogate;
        else if (mode == "network") spec.mode = cldbs::PlantMode::network;
        else throw std::runtime_error("dataset spec: unknown mode '" + mode + "'");
    } else {
        spec.mode = spec.plant_template.mode;
    }
    if (j.contains("duration_s")) spec.duration_s = j.at("duration_s").get<double>();
    if (j.contains("open_loop_amplitude"))
        spec.open_loop_amplitude = j.at("open_loop_amplitude").get<double>();

    const cldbs::DatasetManifest manifest = cldbs::generate_dataset(spec, out_dir);
    emit_summary({{"command", "gen-dataset"},
                  {"runs", manifest.runs.size()},
                  {"manifest", (fs::path(out_dir) / "manifest.json").string()}});
    return 0;
}

int cmd_plot(const std::string& run_path, const std::string& comparison_path,
             const std::string& out_dir, double t_up, double t_low) {
    if (run_path.empty() == comparison_path.empty())
        throw std::runtime_error("plot: give exactly one of --run or --comparison");
    fs::create_directories(out_dir);
    json files = json::array();

    if (!run_path.empty()) {
        const cldbs::SimulationTrace tr = cldbs::read_run(run_path);
        for (const auto& p : cldbs::render_trace_plots(tr, out_dir, t_up, t_low))
            files.push_back(p.string());
    } else {
        std::ifstream in(comparison_path);
        if (!in) throw std::runtime_error("cannot open " + comparison_path);
        cldbs::ComparisonResult result;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            cldbs::ComparisonRow row;
            char controller[64] = {0};
            unsigned long long seed = 0;
            if (std::sscanf(line.c_str(), "%llu,%63[^,],%lf,%lf,%lf,%lf,%lf,%lf", &seed, controller,
                            &row.mse_pct, &row.power_pct, &row.efficiency_std,
                            &row.efficiency_as_printed, &row.mse_raw, &row.power_w) < 5)
                throw std::runtime_error("plot: malformed comparison row: " + line);
            row.seed = seed;
            row.controller = controller;
            result.rows.push_back(std::move(row));
        }
        for (const auto& p : cldbs::render_comparison_plots(result, out_dir))
            files.push_back(p.string());
    }
    emit_summary({{"command", "plot"}, {"files", files}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-loop DBS simulation bench"};
    app.require_subcommand(1);

    std::string config_path, out_dir, spec_path, run_path, comparison_path, param;
    std::vector<std::uint64_t> seeds;
    std::vector<double> values;
    double t_up = 0.104, t_low = 0.05207;

    CLI::App* simulate = app.add_subcommand("simulate", "run one closed-loop simulation");
    simulate->add_option("--config", config_path, "experiment config JSON")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();

    CLI::App* compare = app.add_subcommand("compare", "benchmark the four controllers");
    compare->add_option("--config", config_path, "experiment config JSON")->required();
    compare->add_option("--out", out_dir, "output directory")->required();
    compare->add_option("--seeds", seeds, "plant seeds (default: config seed)");

    CLI::App* sweep = app.add_subcommand("sweep", "sweep one config parameter");
    sweep->add_option("--config", config_path, "experiment config JSON")->required();
    sweep->add_option("--param", param, "dot-separated config path, e.g. controller.gain")
        ->required();
    sweep->add_option("--values", values, "values to sweep")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();

    CLI::App* gen = app.add_subcommand("gen-dataset", "generate the electrophysiology dataset");
    gen->add_option("--spec", spec_path, "dataset spec JSON")->required();
    gen->add_option("--out", out_dir, "output directory")->required();

    CLI::App* plot = app.add_subcommand("plot", "render SVG figures");
    plot->add_option("--run", run_path, "run CSV to plot");
    plot->add_option("--comparison", comparison_path, "comparison CSV to plot");
    plot->add_option("--out", out_dir, "output directory")->required();
    plot->add_option("--t-up", t_up, "upper target line for the ARV plot");
    plot->add_option("--t-low", t_low, "lower target line for the ARV plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
        if (compare->parsed()) return cmd_compare(config_path, out_dir, seeds);
        if (sweep->parsed()) return cmd_sweep(config_path, param, values, out_dir);
        if (gen->parsed()) return cmd_gen_dataset(spec_path, out_dir);
        if (plot->parsed()) return cmd_plot(run_path, comparison_path, out_dir, t_up, t_low);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
