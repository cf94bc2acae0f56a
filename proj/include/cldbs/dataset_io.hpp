#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cldbs/control.hpp"
#include "cldbs/detail/sha256.hpp"
#include "cldbs/plant.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// Run files: one CSV per simulation with the five aligned trace columns.

inline constexpr const char* kRunFileHeader =
    "time_s,lfp_raw_uv,lfp_beta_uv,beta_arv_uv,dbs_amplitude_ma,dbs_current_ma";

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    // shortest text that round-trips the exact double
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline double parse_double(std::string_view field, std::size_t row, const char* column) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw std::runtime_error("run file: row " + std::to_string(row) + ": bad value in column " +
                                 column);
    return v;
}

}  // namespace detail

/// Writes a trace as a run file and returns the SHA-256 of the file bytes.
/// The digest is computed over exactly what lands on disk.
inline std::string write_run(const SimulationTrace& trace, const std::filesystem::path& path) {
    if (!trace.aligned())
        throw std::invalid_argument("write_run: trace series are not aligned");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_run: cannot open " + path.string());

    detail::Sha256 digest;
    std::string chunk;
    chunk.reserve(1 << 20);
    chunk = kRunFileHeader;
    chunk.push_back('\n');

    const std::size_t n = trace.lfp_raw.size();
    for (std::size_t i = 0; i < n; ++i) {
        detail::append_double(chunk, trace.lfp_raw.time_at(i));
        chunk.push_back(',');
        detail::append_double(chunk, trace.lfp_raw.samples[i]);
        chunk.push_back(',');
        detail::append_double(chunk, trace.lfp_beta.samples[i]);
        chunk.push_back(',');
        detail::append_double(chunk, trace.beta_arv.samples[i]);
        chunk.push_back(',');
        detail::append_double(chunk, trace.dbs_amplitude.samples[i]);
        chunk.push_back(',');
        detail::append_double(chunk, trace.dbs_current.samples[i]);
        chunk.push_back('\n');
        if (chunk.size() > (1 << 20) - 256) {
            digest.update(chunk.data(), chunk.size());
            out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
            chunk.clear();
        }
    }
    digest.update(chunk.data(), chunk.size());
    out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    out.close();
    if (!out) throw std::runtime_error("write_run: write failed for " + path.string());
    return digest.hex_digest();
}

/// Reads a run file back into a trace. The sampling rate is inferred from the
/// time column, which must be uniform to 1e-9 s.
inline SimulationTrace read_run(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_run: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_run: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        // name the first missing/unexpected column
        std::vector<std::string> expected;
        std::stringstream es(kRunFileHeader);
        for (std::string tok; std::getline(es, tok, ',');) expected.push_back(tok);
        std::vector<std::string> got;
        std::stringstream gs(line);
        for (std::string tok; std::getline(gs, tok, ',');) got.push_back(tok);
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i >= got.size() || got[i] != expected[i]) {
                const std::string found = i < got.size() ? got[i] : "nothing";
                throw std::runtime_error("run file: header column " + std::to_string(i + 1) +
                                         " must be '" + expected[i] + "', found '" + found + "'");
            }
        }
        if (got.size() != expected.size())
            throw std::runtime_error("run file: expected 6 columns, found " +
                                     std::to_string(got.size()));
    }

    static const char* kColumns[6] = {"time_s",          "lfp_raw_uv",       "lfp_beta_uv",
                                      "beta_arv_uv",     "dbs_amplitude_ma", "dbs_current_ma"};
    std::vector<double> cols[6];
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t start = 0;
        int c = 0;
        while (c < 6) {
            const std::size_t comma = line.find(',', start);
            const bool last = comma == std::string::npos;
            if (last != (c == 5))
                throw std::runtime_error("run file: row " + std::to_string(row) +
                                         ": expected 6 columns");
            const std::string_view field(line.data() + start,
                                         (last ? line.size() : comma) - start);
            cols[c].push_back(detail::parse_double(field, row, kColumns[c]));
            start = last ? line.size() : comma + 1;
            ++c;
        }
    }
    const std::size_t n = cols[0].size();
    if (n < 2) throw std::runtime_error("run file: need at least 2 data rows");

    const double dt = cols[0][1] - cols[0][0];
    if (!(dt > 0.0)) throw std::runtime_error("run file: row 3: time is not increasing");
    for (std::size_t i = 1; i < n; ++i) {
        const double gap = cols[0][i] - cols[0][i - 1];
        if (std::abs(gap - dt) > 1e-9)
            throw std::runtime_error("run file: row " + std::to_string(i + 2) +
                                     ": non-uniform time spacing");
    }

    SimulationTrace tr;
    const double fs = 1.0 / dt;
    TimeSeries* series[5] = {&tr.lfp_raw, &tr.lfp_beta, &tr.beta_arv, &tr.dbs_amplitude,
                             &tr.dbs_current};
    const char* units[5] = {"uV", "uV", "uV", "mA", "mA"};
    for (int s = 0; s < 5; ++s) {
        series[s]->fs = fs;
        series[s]->t0 = cols[0][0];
        series[s]->unit = units[s];
        series[s]->samples = std::move(cols[s + 1]);
    }
    return tr;
}

/// Spectrum export: frequency_hz,psd per row.
inline void write_spectrum(const Spectrum& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_spectrum: cannot open " + path.string());
    std::string text = "frequency_hz,psd\n";
    for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
        detail::append_double(text, s.freq_hz[k]);
        text.push_back(',');
        detail::append_double(text, s.psd[k]);
        text.push_back('\n');
    }
    out << text;
}

// ---------------------------------------------------------------------------
// Dataset generation

struct DatasetRunEntry {
    std::string run_id;
    std::string severity;
    std::string scenario;  // controller id or "dbs_off"
    std::uint64_t seed = 0;
    std::string plant_mode;
    double fs = 0.0;
    double duration_s = 0.0;
    std::string file;  // relative to the manifest directory
    std::string digest;
};

struct DatasetManifest {
    std::string version = "1";
    std::string generated_at;
    std::string config_digest;
    std::vector<DatasetRunEntry> runs;
};

struct DatasetSpec {
    std::vector<Severity> severities;
    std::vector<std::string> scenarios;  // controller ids
    std::vector<std::uint64_t> seeds;
    PlantMode mode = PlantMode::surrogate;
    double duration_s = 30.0;
    double open_loop_amplitude = 2.5;  // mA, for the open_loop scenario
    ChainConfig chain;
    PlantConfig plant_template;  // mode/severity/seed overwritten per run
};

inline Controller make_controller(const std::string& scenario, double open_loop_amplitude = 2.5) {
    Controller c;
    c.kind = controller_kind_from_string(scenario);
    c.open_loop_amplitude = open_loop_amplitude;
    return c;
}

namespace detail {

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

inline nlohmann::json to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["generated_at"] = m.generated_at;
    j["config_digest"] = m.config_digest;
    j["runs"] = nlohmann::json::array();
    for (const auto& r : m.runs) {
        j["runs"].push_back({{"run_id", r.run_id},
                             {"severity", r.severity},
                             {"scenario", r.scenario},
                             {"seed", r.seed},
                             {"plant_mode", r.plant_mode},
                             {"fs", r.fs},
                             {"duration_s", r.duration_s},
                             {"file", r.file},
                             {"digest", r.digest}});
    }
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.version = j.at("version").get<std::string>();
    m.generated_at = j.at("generated_at").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    for (const auto& rj : j.at("runs")) {
        DatasetRunEntry r;
        r.run_id = rj.at("run_id").get<std::string>();
        r.severity = rj.at("severity").get<std::string>();
        r.scenario = rj.at("scenario").get<std::string>();
        r.seed = rj.at("seed").get<std::uint64_t>();
        r.plant_mode = rj.at("plant_mode").get<std::string>();
        r.fs = rj.at("fs").get<double>();
        r.duration_s = rj.at("duration_s").get<double>();
        r.file = rj.at("file").get<std::string>();
        r.digest = rj.at("digest").get<std::string>();
        m.runs.push_back(std::move(r));
    }
    return m;
}

/// Runs every (severity, scenario, seed) combination, writes one run file
/// each, then writes manifest.json last (atomically via rename). Runs fan out
/// across hardware threads; each one is independently seeded.
inline DatasetManifest generate_dataset(const DatasetSpec& spec,
                                        const std::filesystem::path& out_dir) {
    if (spec.severities.empty() || spec.scenarios.empty() || spec.seeds.empty())
        throw std::invalid_argument("generate_dataset: empty specification");
    if (!(spec.duration_s >= 5.0))
        throw std::invalid_argument("generate_dataset: duration must be >= 5 s");

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "runs", ec);
    if (ec || !std::filesystem::is_directory(out_dir / "runs"))
        throw std::runtime_error("generate_dataset: cannot create " + (out_dir / "runs").string());

    struct Job {
        Severity severity;
        std::string scenario;
        std::uint64_t seed;
        std::string run_id;
    };
    std::vector<Job> jobs;
    for (Severity sv : spec.severities)
        for (const std::string& sc : spec.scenarios)
            for (std::uint64_t seed : spec.seeds) {
                Job job{sv, sc, seed,
                        std::string(to_string(sv)) + "_" + sc + "_seed" + std::to_string(seed)};
                for (const Job& other : jobs)
                    if (other.run_id == job.run_id)
                        throw std::runtime_error("generate_dataset: duplicate run id " + job.run_id);
                jobs.push_back(std::move(job));
            }

    DatasetManifest manifest;
    manifest.generated_at = detail::utc_timestamp();
    manifest.runs.resize(jobs.size());

    auto run_one = [&](std::size_t idx) {
        const Job& job = jobs[idx];
        PlantConfig pc = spec.plant_template;
        pc.mode = spec.mode;
        pc.severity = job.severity;
        pc.seed = job.seed;
        Plant plant(pc);
        Controller ctrl = make_controller(job.scenario, spec.open_loop_amplitude);
        SimulationTrace tr = run_closed_loop(plant, ctrl, spec.duration_s, spec.chain);
        tr.meta.seed = job.seed;

        const std::string rel = "runs/" + job.run_id + ".csv";
        const std::string digest = write_run(tr, out_dir / rel);

        DatasetRunEntry e;
        e.run_id = job.run_id;
        e.severity = to_string(job.severity);
        e.scenario = job.scenario;
        e.seed = job.seed;
        e.plant_mode = pc.mode == PlantMode::surrogate ? "surrogate" : "network";
        e.fs = tr.lfp_raw.fs;
        e.duration_s = spec.duration_s;
        e.file = rel;
        e.digest = digest;
        manifest.runs[idx] = std::move(e);
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, jobs.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    } else {
        std::mutex m;
        std::size_t next = 0;
        std::exception_ptr failure;
        auto worker = [&] {
            for (;;) {
                std::size_t idx;
                {
                    std::lock_guard lock(m);
                    if (failure || next >= jobs.size()) return;
                    idx = next++;
                }
                try {
                    run_one(idx);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // config digest covers the run table (ids + digests)
    {
        detail::Sha256 h;
        for (const auto& r : manifest.runs) {
            h.update(r.run_id.data(), r.run_id.size());
            h.update(r.digest.data(), r.digest.size());
        }
        manifest.config_digest = h.hex_digest();
    }

    const auto tmp = out_dir / "manifest.json.tmp";
    const auto final_path = out_dir / "manifest.json";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("generate_dataset: cannot write " + tmp.string());
        out << to_json(manifest).dump(2) << "\n";
    }
    std::filesystem::rename(tmp, final_path);
    return manifest;
}

/// Recomputes every run-file digest listed in a manifest; throws on the first
/// missing file or mismatch.
inline DatasetManifest validate_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("validate_manifest: cannot open " + manifest_path.string());
    nlohmann::json j;
    in >> j;
    DatasetManifest m = manifest_from_json(j);
    const auto dir = manifest_path.parent_path();
    for (const auto& r : m.runs) {
        const auto file = dir / r.file;
        std::ifstream f(file, std::ios::binary);
        if (!f)
            throw std::runtime_error("validate_manifest: missing file for run " + r.run_id);
        detail::Sha256 h;
        char buf[1 << 16];
        while (f.read(buf, sizeof(buf)) || f.gcount() > 0)
            h.update(buf, static_cast<std::size_t>(f.gcount()));
        if (h.hex_digest() != r.digest)
            throw std::runtime_error("validate_manifest: digest mismatch for run " + r.run_id);
    }
    return m;
}

}  // namespace cldbs
