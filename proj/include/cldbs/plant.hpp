#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cldbs/network.hpp"
#include "cldbs/random.hpp"

namespace cldbs {

enum class PlantMode { network, surrogate };
enum class Severity { healthy, mild, moderate, severe };

inline const char* to_string(Severity s) {
    switch (s) {
        case Severity::healthy: return "healthy";
        case Severity::mild: return "mild";
        case Severity::moderate: return "moderate";
        case Severity::severe: return "severe";
    }
    return "?";
}

inline Severity severity_from_string(const std::string& s) {
    if (s == "healthy") return Severity::healthy;
    if (s == "mild") return Severity::mild;
    if (s == "moderate") return Severity::moderate;
    if (s == "severe") return Severity::severe;
    throw std::invalid_argument("unknown severity: " + s);
}

/// Baseline beta amplitude of the surrogate envelope per disease state, uV.
inline double surrogate_b0_for(Severity s) {
    switch (s) {
        case Severity::healthy: return 0.04;
        case Severity::mild: return 0.10;
        case Severity::moderate: return 0.15;
        case Severity::severe: return 0.20;
    }
    return 0.20;
}

/// STN bias-current multiplier per disease state (network mode).
inline double stn_bias_multiplier_for(Severity s) {
    switch (s) {
        case Severity::healthy: return 0.25;
        case Severity::mild: return 0.6;
        case Severity::moderate: return 0.8;
        case Severity::severe: return 1.0;
    }
    return 1.0;
}

/// Closed-form stochastic beta-envelope model. The envelope follows a
/// logistic suppression law in the low-pass-filtered stimulation amplitude,
/// perturbed by Ornstein-Uhlenbeck noise; the output is a beta tone carrying
/// that envelope plus broadband background noise.
///
/// b0 = 0 means "derive from the severity ladder".
struct SurrogateConfig {
    double b0 = 0.0;          // baseline beta ARV, uV
    double i50 = 1.5;         // half-suppression current, mA
    double k = 2.0;           // suppression steepness, 1/mA
    double f_beta = 20.0;     // beta tone frequency, Hz
    double tau_p = 0.1;       // stimulation low-pass time constant, s
    double noise_amp = 0.05;  // background white noise std on the LFP, uV
    double ou_tau = 0.5;      // envelope noise time constant, s
    double ou_std = 0.015;    // envelope noise stationary std, uV
};

struct PlantConfig {
    PlantMode mode = PlantMode::surrogate;
    double dt = 0.0;  // s; 0 picks the mode default
    std::uint64_t seed = 42;
    Severity severity = Severity::severe;
    SurrogateConfig surrogate;
    NetworkConfig network;

    static constexpr double kDefaultDtSurrogate = 1e-3;
    static constexpr double kDefaultDtNetwork = 25e-6;

    double resolved_dt() const {
        if (dt > 0.0) return dt;
        return mode == PlantMode::surrogate ? kDefaultDtSurrogate : kDefaultDtNetwork;
    }
    double resolved_b0() const {
        return surrogate.b0 > 0.0 ? surrogate.b0 : surrogate_b0_for(severity);
    }
};

/// The beta-oscillation generator. Stepped with the instantaneous DBS
/// current; returns raw LFP samples in uV. Single-owner: one stepping
/// sequence at a time. Distinct instances are independent.
class Plant {
  public:
    explicit Plant(const PlantConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
        validate(cfg_);
        dt_ = cfg_.resolved_dt();
        if (cfg_.mode == PlantMode::network) {
            network_ = std::make_unique<BasalGangliaNetwork>(
                cfg_.network, stn_bias_multiplier_for(cfg_.severity), dt_, cfg_.seed);
        } else {
            b0_ = cfg_.resolved_b0();
            b_inst_ = b0_ * logistic(cfg_.surrogate.k * cfg_.surrogate.i50);
        }
    }

    /// One integration step under instantaneous DBS current i_dbs (mA).
    /// dt must equal the configured step size.
    double step(double i_dbs_ma, double dt_s) {
        if (!(dt_s > 0.0)) throw std::invalid_argument("plant_step: dt must be > 0");
        if (std::abs(dt_s - dt_) > 1e-12)
            throw std::invalid_argument("plant_step: dt does not match the configured step size");
        if (!(i_dbs_ma >= 0.0 && i_dbs_ma <= 3.0))
            throw std::invalid_argument("plant_step: i_dbs must lie in [0, 3] mA");
        double lfp;
        if (cfg_.mode == PlantMode::network) {
            lfp = network_->step(i_dbs_ma);
        } else {
            lfp = surrogate_step(i_dbs_ma);
        }
        ++steps_;
        return lfp;
    }

    double step(double i_dbs_ma) { return step(i_dbs_ma, dt_); }

    /// Simulation clock: exact integer step counting.
    double time() const { return static_cast<double>(steps_) * dt_; }
    std::uint64_t steps_taken() const { return steps_; }
    double dt() const { return dt_; }
    const PlantConfig& config() const { return cfg_; }
    PlantMode mode() const { return cfg_.mode; }

    /// Surrogate-mode instantaneous beta envelope (for tests/calibration).
    double surrogate_beta() const {
        if (cfg_.mode != PlantMode::surrogate)
            throw std::logic_error("surrogate_beta: plant is in network mode");
        return b_inst_;
    }

    const BasalGangliaNetwork& network() const {
        if (!network_) throw std::logic_error("network: plant is in surrogate mode");
        return *network_;
    }

    static void validate(const PlantConfig& cfg) {
        if (!(cfg.resolved_dt() > 0.0))
            throw std::invalid_argument("plant config: dt must be > 0");
        if (cfg.mode == PlantMode::surrogate) {
            const SurrogateConfig& s = cfg.surrogate;
            if (!(cfg.resolved_b0() > 0.0))
                throw std::invalid_argument("plant config: surrogate b0 must be > 0");
            if (!(s.i50 >= 0.0 && s.i50 <= 3.0))
                throw std::invalid_argument("plant config: surrogate i50 must lie in [0, 3] mA");
            if (!(s.f_beta >= 13.0 && s.f_beta <= 30.0))
                throw std::invalid_argument("plant config: f_beta must lie in the beta band [13, 30] Hz");
            if (!(s.tau_p > 0.0) || !(s.ou_tau > 0.0))
                throw std::invalid_argument("plant config: time constants must be > 0");
            if (s.noise_amp < 0.0 || s.ou_std < 0.0)
                throw std::invalid_argument("plant config: noise amplitudes must be >= 0");
        } else {
            const NetworkConfig& n = cfg.network;
            auto check = [](int size, int indeg, bool self, const char* name) {
                const int avail = self ? size - 1 : size;
                if (indeg > avail)
                    throw std::invalid_argument(std::string("plant config: in-degree for ") + name +
                                                " (" + std::to_string(indeg) +
                                                ") exceeds source population (" +
                                                std::to_string(avail) + " available)");
                if (indeg < 0)
                    throw std::invalid_argument(std::string("plant config: negative in-degree for ") + name);
            };
            check(n.n_gpe, n.indeg.stn_from_gpe, false, "stn<-gpe");
            check(n.n_cortical, n.indeg.stn_from_ctx, false, "stn<-cortex");
            check(n.n_gpe, n.indeg.gpe_from_gpe, true, "gpe<-gpe");
            check(n.n_stn, n.indeg.gpe_from_stn, false, "gpe<-stn");
            check(n.n_stn, n.indeg.gpi_from_stn, false, "gpi<-stn");
            check(n.n_gpe, n.indeg.gpi_from_gpe, false, "gpi<-gpe");
            check(n.n_gpi, n.indeg.thal_from_gpi, false, "thal<-gpi");
            check(n.n_thal, n.indeg.ctx_from_thal, false, "cortex<-thal");
            check(n.n_interneuron, n.indeg.ctx_from_interneuron, false, "cortex<-interneuron");
            check(n.n_cortical, n.indeg.interneuron_from_ctx, false, "interneuron<-cortex");
            if (n.striatal_rate_hz < 0.0)
                throw std::invalid_argument("plant config: striatal rate must be >= 0");
        }
    }

  private:
    static double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

    double surrogate_step(double i_dbs_ma) {
        const SurrogateConfig& s = cfg_.surrogate;
        // first-order response of the tissue to the stimulation envelope
        i_filtered_ += (i_dbs_ma - i_filtered_) * dt_ / s.tau_p;
        if (s.ou_std > 0.0)
            ou_ += -ou_ * dt_ / s.ou_tau + s.ou_std * std::sqrt(2.0 * dt_ / s.ou_tau) * rng_.normal();
        b_inst_ = b0_ * logistic(s.k * (s.i50 - i_filtered_)) + ou_;
        if (b_inst_ < 0.0) b_inst_ = 0.0;
        phase_ += 2.0 * pi * s.f_beta * dt_;
        if (phase_ > 2.0 * pi) phase_ -= 2.0 * pi;
        double lfp = (pi / 2.0) * b_inst_ * std::sin(phase_);
        if (s.noise_amp > 0.0) lfp += s.noise_amp * rng_.normal();
        return lfp;
    }

    static constexpr double pi = 3.14159265358979323846;

    PlantConfig cfg_;
    RandomSource rng_;
    double dt_ = 0.0;
    std::uint64_t steps_ = 0;

    // surrogate state
    double b0_ = 0.0;
    double i_filtered_ = 0.0;
    double ou_ = 0.0;
    double b_inst_ = 0.0;
    double phase_ = 0.0;

    std::unique_ptr<BasalGangliaNetwork> network_;
};

inline Plant build_plant(const PlantConfig& cfg) { return Plant(cfg); }

/// Independent homogeneous Poisson spike trains; times strictly increasing
/// within [0, duration).
inline std::vector<std::vector<double>> striatal_spike_trains(int n, double rate_hz,
                                                              double duration_s,
                                                              RandomSource& rng) {
    if (n < 0) throw std::invalid_argument("striatal_spike_trains: n must be >= 0");
    if (rate_hz < 0.0) throw std::invalid_argument("striatal_spike_trains: rate must be >= 0");
    if (duration_s < 0.0) throw std::invalid_argument("striatal_spike_trains: duration must be >= 0");
    std::vector<std::vector<double>> trains(static_cast<std::size_t>(n));
    if (rate_hz == 0.0 || duration_s == 0.0) return trains;
    for (auto& train : trains) {
        double t = rng.exponential(rate_hz);
        while (t < duration_s) {
            train.push_back(t);
            t += rng.exponential(rate_hz);
        }
    }
    return trains;
}

}  // namespace cldbs
