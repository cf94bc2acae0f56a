#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "cldbs/dsp.hpp"
#include "cldbs/plant.hpp"
#include "cldbs/time_series.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// LIF stimulation controllers.
//
// The measured beta ARV plays the role of the membrane potential and the
// target plays the threshold. When the "neuron" fires, the leaky-integrator
// rate (-(v - v_th) + R*I) / tau_m, taken over one control period and divided
// by R, becomes the stimulation increment. All table values are plain
// numerics in their stated units.

struct LifControllerParams {
    double tau_m = 5.0;       // membrane time constant, s
    double r = 0.5;           // membrane resistance, ohm
    double i_drive = 5.0;     // LIF input current, mA
    double b_target = 0.104;  // on-off target, uV
    double t_up = 0.104;      // dual upper target, uV
    double t_low = 0.05207;   // dual lower target, uV
    double i_min = 0.0;       // mA
    double i_max = 3.0;       // mA
    double ts = 0.02;         // control period, s
    double gain = 1.0;        // dimensionless update scale
    double v_reset = 0.0;     // unused: the ARV is an external signal and is
                              // not reset on firing; kept for completeness

    void validate() const {
        if (!(tau_m > 0.0)) throw std::invalid_argument("controller: tau_m must be > 0");
        if (!(r > 0.0)) throw std::invalid_argument("controller: r must be > 0");
        if (!(i_min < i_max)) throw std::invalid_argument("controller: i_min must be < i_max");
        if (!(t_low < t_up)) throw std::invalid_argument("controller: t_low must be < t_up");
        if (!(ts > 0.0)) throw std::invalid_argument("controller: ts must be > 0");
    }
};

struct LifControllerState {
    double i_dbs = 0.0;    // commanded amplitude, mA
    double last_arv = 0.0; // uV
    std::uint64_t steps = 0;
};

namespace detail {

inline double clamp_current(double i, const LifControllerParams& p) {
    return std::min(p.i_max, std::max(p.i_min, i));
}

inline double lif_increment(double error_uv, const LifControllerParams& p) {
    // Euler step of dv/dt = (-(error) + R*I) / tau_m, converted to a current
    // increment through I = (dv/dt) / R over one control period.
    return p.gain * p.ts * (-error_uv + p.r * p.i_drive) / (p.tau_m * p.r);
}

}  // namespace detail

/// On-off controller: ramps the stimulation while the ARV sits at or above
/// the target, holds otherwise.
inline double onoff_lif_step(LifControllerState& state, const LifControllerParams& p,
                             double beta_arv_uv) {
    if (beta_arv_uv < 0.0) throw std::invalid_argument("onoff_lif_step: negative beta ARV");
    if (beta_arv_uv >= p.b_target) {
        const double delta = detail::lif_increment(beta_arv_uv - p.b_target, p);
        state.i_dbs = detail::clamp_current(state.i_dbs + delta, p);
    }
    state.last_arv = beta_arv_uv;
    ++state.steps;
    return state.i_dbs;
}

/// Dual-threshold controller: ramps up above the upper target, ramps down by
/// the mirrored law below the lower target, holds inside the band.
inline double dual_lif_step(LifControllerState& state, const LifControllerParams& p,
                            double beta_arv_uv) {
    if (beta_arv_uv < 0.0) throw std::invalid_argument("dual_lif_step: negative beta ARV");
    if (beta_arv_uv > p.t_up) {
        const double delta = detail::lif_increment(beta_arv_uv - p.t_up, p);
        state.i_dbs = detail::clamp_current(state.i_dbs + delta, p);
    } else if (beta_arv_uv < p.t_low) {
        const double delta = -detail::lif_increment(p.t_low - beta_arv_uv, p);
        state.i_dbs = detail::clamp_current(state.i_dbs + delta, p);
    }
    state.last_arv = beta_arv_uv;
    ++state.steps;
    return state.i_dbs;
}

/// Constant stimulation regardless of the measured state.
inline double open_loop_step(double amplitude_ma) {
    if (!(amplitude_ma >= 0.0 && amplitude_ma <= 3.0))
        throw std::invalid_argument("open_loop_step: amplitude must lie in [0, 3] mA");
    return amplitude_ma;
}

// ---------------------------------------------------------------------------
// Stimulation waveform

struct DbsWaveformSpec {
    double frequency_hz = 130.0;
    double pulse_width_s = 60e-6;

    double duty() const { return frequency_hz * pulse_width_s; }
    void validate() const {
        if (!(frequency_hz > 0.0) || !(pulse_width_s > 0.0) || !(duty() < 1.0))
            throw std::invalid_argument("waveform: need frequency, width > 0 and duty < 100%");
    }
};

/// Square pulse train value at time t: the commanded amplitude inside the
/// pulse window of each period, zero elsewhere.
inline double dbs_pulse_train(const DbsWaveformSpec& spec, double amplitude_ma, double t_s) {
    if (!(amplitude_ma >= 0.0 && amplitude_ma <= 3.0))
        throw std::invalid_argument("dbs_pulse_train: amplitude must lie in [0, 3] mA");
    if (amplitude_ma == 0.0) return 0.0;
    const double period = 1.0 / spec.frequency_hz;
    const double phase = t_s - std::floor(t_s / period) * period;
    return phase < spec.pulse_width_s ? amplitude_ma : 0.0;
}

// ---------------------------------------------------------------------------
// Controller dispatch

enum class ControllerKind { dbs_off, open_loop, onoff_lif, dual_lif };

inline const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::dbs_off: return "dbs_off";
        case ControllerKind::open_loop: return "open_loop";
        case ControllerKind::onoff_lif: return "onoff_lif";
        case ControllerKind::dual_lif: return "dual_lif";
    }
    return "?";
}

inline ControllerKind controller_kind_from_string(const std::string& s) {
    if (s == "dbs_off") return ControllerKind::dbs_off;
    if (s == "open_loop") return ControllerKind::open_loop;
    if (s == "onoff_lif") return ControllerKind::onoff_lif;
    if (s == "dual_lif") return ControllerKind::dual_lif;
    throw std::invalid_argument("unknown controller: " + s);
}

struct Controller {
    ControllerKind kind = ControllerKind::onoff_lif;
    double open_loop_amplitude = 2.5;  // mA, open_loop only
    LifControllerParams params;
    LifControllerState state;
    DbsWaveformSpec waveform;

    double step(double beta_arv_uv) {
        switch (kind) {
            case ControllerKind::dbs_off: return 0.0;
            case ControllerKind::open_loop: return open_loop_step(open_loop_amplitude);
            case ControllerKind::onoff_lif: return onoff_lif_step(state, params, beta_arv_uv);
            case ControllerKind::dual_lif: return dual_lif_step(state, params, beta_arv_uv);
        }
        return 0.0;
    }

    void reset() { state = LifControllerState{}; }
    const char* id() const { return to_string(kind); }
};

// ---------------------------------------------------------------------------
// Closed-loop execution

/// Beta extraction chain settings. f_center = 0 re-centers the bandpass on
/// the DBS-off beta peak of a baseline run (estimated once per run).
struct ChainConfig {
    double f_center = 0.0;   // Hz
    double bandwidth = 8.0;  // Hz
    int order = 4;
    double ripple_db = 1.0;
    double arv_window = 0.1; // s
};

struct TraceMeta {
    std::uint64_t seed = 0;
    std::string controller_id;
    std::string config_digest;  // filled by callers that serialize the config
    double f_center_hz = 0.0;
    double b_target = 0.0;      // target lines for plotting; 0 = none
    double t_low = 0.0;
};

/// Aligned record of one run: raw LFP, beta-filtered LFP, beta ARV, commanded
/// amplitude and instantaneous electrode current. All series share fs and
/// length; the amplitude is piecewise-constant at the control period.
struct SimulationTrace {
    TimeSeries lfp_raw;        // uV
    TimeSeries lfp_beta;       // uV
    TimeSeries beta_arv;       // uV
    TimeSeries dbs_amplitude;  // mA
    TimeSeries dbs_current;    // mA
    TraceMeta meta;

    bool aligned() const {
        const std::size_t n = lfp_raw.size();
        const double fs = lfp_raw.fs;
        for (const TimeSeries* s : {&lfp_beta, &beta_arv, &dbs_amplitude, &dbs_current})
            if (s->size() != n || s->fs != fs) return false;
        return true;
    }
};

/// Estimates the beta peak from a DBS-off run of a plant built with the same
/// configuration (the pre-run consumes its own random stream).
inline double estimate_dbs_off_beta_peak(const PlantConfig& cfg, double horizon_s = 10.0) {
    Plant baseline(cfg);
    const double dt = baseline.dt();
    const auto n = static_cast<std::size_t>(std::llround(horizon_s / dt));
    TimeSeries lfp;
    lfp.fs = 1.0 / dt;
    lfp.unit = "uV";
    lfp.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) lfp.samples.push_back(baseline.step(0.0));
    return estimate_beta_peak(lfp);
}

/// Runs the loop: the plant is stepped at its own dt, the DSP chain streams
/// over the LFP, the controller executes every ts seconds on the latest ARV
/// and the commanded amplitude shapes the pulse train delivered to the plant.
/// The network plant receives the pulse train itself; the surrogate, whose
/// envelope law responds to the stimulation amplitude, receives the
/// zero-order-held command.
inline SimulationTrace run_closed_loop(Plant& plant, Controller& controller, double duration_s,
                                       const ChainConfig& chain = {}) {
    if (!(duration_s >= 5.0))
        throw std::invalid_argument("run_closed_loop: duration must be >= 5 s");
    controller.params.validate();
    controller.waveform.validate();

    const double dt = plant.dt();
    const double fs = 1.0 / dt;
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));

    double f_center = chain.f_center;
    if (f_center <= 0.0)
        f_center = estimate_dbs_off_beta_peak(plant.config(), std::min(duration_s, 10.0));

    StreamingFilter filter(design_beta_bandpass(fs, f_center, chain.bandwidth, chain.order,
                                                chain.ripple_db));
    StreamingMovingAverage arv(static_cast<std::size_t>(std::floor(chain.arv_window * fs + 0.5)));

    auto control_every = static_cast<std::size_t>(std::llround(controller.params.ts / dt));
    if (control_every == 0) control_every = 1;

    SimulationTrace tr;
    for (TimeSeries* s : {&tr.lfp_raw, &tr.lfp_beta, &tr.beta_arv})
        s->unit = "uV";
    for (TimeSeries* s : {&tr.dbs_amplitude, &tr.dbs_current})
        s->unit = "mA";
    for (TimeSeries* s : {&tr.lfp_raw, &tr.lfp_beta, &tr.beta_arv, &tr.dbs_amplitude,
                          &tr.dbs_current}) {
        s->fs = fs;
        s->t0 = 0.0;
        s->samples.reserve(n);
    }

    const bool pulse_drive = plant.mode() == PlantMode::network;
    double latest_arv = 0.0;
    double amplitude = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % control_every == 0) amplitude = controller.step(latest_arv);
        const double t = static_cast<double>(k) * dt;
        const double pulse = dbs_pulse_train(controller.waveform, amplitude, t);
        const double lfp = plant.step(pulse_drive ? pulse : amplitude, dt);
        const double beta = filter.process(lfp);
        latest_arv = arv.process(std::abs(beta));
        tr.lfp_raw.samples.push_back(lfp);
        tr.lfp_beta.samples.push_back(beta);
        tr.beta_arv.samples.push_back(latest_arv);
        tr.dbs_amplitude.samples.push_back(amplitude);
        tr.dbs_current.samples.push_back(pulse);
    }

    tr.meta.seed = plant.config().seed;
    tr.meta.controller_id = controller.id();
    tr.meta.f_center_hz = f_center;
    if (controller.kind == ControllerKind::onoff_lif) {
        tr.meta.b_target = controller.params.b_target;
    } else if (controller.kind == ControllerKind::dual_lif) {
        tr.meta.b_target = controller.params.t_up;
        tr.meta.t_low = controller.params.t_low;
    }
    return tr;
}

}  // namespace cldbs
