#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cldbs/control.hpp"
#include "cldbs/time_series.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// Controller assessment: normalized tracking error, electrical power and
// suppression efficiency. Time integrals use the trapezoidal rule over the
// retained (post-burn-in) span; unit conversions are centralized here.

namespace detail {

inline double trapezoid(const TimeSeries& x, double (*f)(double)) {
    if (x.size() < 2) throw std::invalid_argument("metrics: series too short to integrate");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (f(x.samples[i - 1]) + f(x.samples[i]));
    return acc / x.fs;
}

}  // namespace detail

/// e(t) = (b_measured - b_target) / b_target, pointwise and dimensionless.
inline TimeSeries error_signal(const TimeSeries& b_measured, double b_target_uv) {
    if (!(b_target_uv > 0.0)) throw std::invalid_argument("error_signal: b_target must be > 0");
    TimeSeries e = b_measured;
    e.unit = "";
    for (double& v : e.samples) v = (v - b_target_uv) / b_target_uv;
    return e;
}

/// Mean squared error (1/t_sim) * integral of e(t)^2 over the series span.
inline double mse(const TimeSeries& e, double t_sim_s) {
    if (e.empty()) throw std::invalid_argument("mse: empty series");
    if (!(t_sim_s > 0.0)) throw std::invalid_argument("mse: t_sim must be > 0");
    return detail::trapezoid(e, [](double v) { return v * v; }) / t_sim_s;
}

/// MSE as a percentage of the DBS-off baseline.
inline double mse_percent(double mse_controller, double mse_dbs_off) {
    if (!(mse_dbs_off > 0.0)) throw std::invalid_argument("mse_percent: zero baseline");
    return 100.0 * mse_controller / mse_dbs_off;
}

/// Mean electrical power (1/t_sim) * integral of Z_E * i(t)^2, with the
/// current converted from mA to A. Result in watts.
inline double power_consumption(const TimeSeries& i_dbs_ma, double z_e_ohm, double t_sim_s) {
    if (!(z_e_ohm > 0.0)) throw std::invalid_argument("power_consumption: z_e must be > 0");
    if (!(t_sim_s > 0.0)) throw std::invalid_argument("power_consumption: t_sim must be > 0");
    return z_e_ohm *
           detail::trapezoid(i_dbs_ma, [](double v) { return 1e-6 * v * v; }) / t_sim_s;
}

enum class EfficiencyVariant { standard, as_printed };

/// Beta suppression per unit power, %/uW.
///
/// `standard` reports the time-mean suppressed fraction divided by the power;
/// `as_printed` keeps the complementary fraction in the numerator, so it is
/// maximal when nothing is suppressed. Both are provided; `standard` is the
/// variant whose ordering is consistent across the comparison figures.
inline double suppression_efficiency(const TimeSeries& b_off, const TimeSeries& b_ctrl,
                                     double power_uw, EfficiencyVariant variant) {
    if (b_off.size() != b_ctrl.size() || b_off.size() < 2)
        throw std::invalid_argument("suppression_efficiency: traces must be aligned");
    if (!(power_uw > 0.0)) throw std::invalid_argument("suppression_efficiency: zero power");
    // trapezoidal time-mean of the pointwise suppressed fraction
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < b_off.size(); ++i) {
        if (!(b_off.samples[i] > 0.0))
            throw std::invalid_argument("suppression_efficiency: baseline must stay positive");
        const double frac = (b_off.samples[i] - b_ctrl.samples[i]) / b_off.samples[i];
        if (i > 0) acc += 0.5 * (prev + frac);
        prev = frac;
    }
    const double mean_suppression = acc / static_cast<double>(b_off.size() - 1);
    const double numerator =
        variant == EfficiencyVariant::standard ? mean_suppression : 1.0 - mean_suppression;
    return 100.0 * numerator / power_uw;
}

// ---------------------------------------------------------------------------
// Whole-run report

struct MetricsConfig {
    double z_e = 500.0;       // electrode impedance, ohm
    double b_target = 0.104;  // uV
    double t_sim = 30.0;      // total run duration, s
    double burn_in = 2.0;     // excluded from every integral, s

    void validate() const {
        if (!(z_e > 0.0)) throw std::invalid_argument("metrics config: z_e must be > 0");
        if (!(t_sim > burn_in)) throw std::invalid_argument("metrics config: t_sim must exceed burn_in");
        if (burn_in < 0.0) throw std::invalid_argument("metrics config: burn_in must be >= 0");
    }
};

struct MetricsReport {
    std::string controller_id;
    double mse_raw = 0.0;
    double mse_pct = 0.0;
    double power_w = 0.0;
    double power_pct = 0.0;
    double efficiency_std = std::numeric_limits<double>::quiet_NaN();
    double efficiency_as_printed = std::numeric_limits<double>::quiet_NaN();
    double t_sim = 0.0;             // retained span, s
    double burn_in_excluded = 0.0;  // s
};

/// Mean pulse-train power of a run. The amplitude column is integrated and
/// scaled by the waveform duty cycle: sampled pulse trains alias at plant
/// rates, while the duty-scaled amplitude integral is exact for commands held
/// over whole periods.
inline double trace_power_w(const SimulationTrace& trace, const MetricsConfig& cfg, double duty) {
    const TimeSeries amp = trace.dbs_amplitude.tail_from(cfg.burn_in);
    return duty * power_consumption(amp, cfg.z_e, amp.duration());
}

/// Builds the report for one run against the DBS-off baseline of the same
/// plant seed and the open-loop reference power.
inline MetricsReport compute_report(const SimulationTrace& trace, const SimulationTrace& dbs_off,
                                    double reference_power_w, const MetricsConfig& cfg,
                                    double duty) {
    cfg.validate();
    if (!trace.aligned() || !dbs_off.aligned())
        throw std::invalid_argument("compute_report: traces must be aligned");

    const TimeSeries arv = trace.beta_arv.tail_from(cfg.burn_in);
    const TimeSeries arv_off = dbs_off.beta_arv.tail_from(cfg.burn_in);
    if (arv.size() != arv_off.size())
        throw std::invalid_argument("compute_report: baseline length mismatch");
    const double t_ret = arv.duration();

    MetricsReport rep;
    rep.controller_id = trace.meta.controller_id;
    rep.t_sim = t_ret;
    rep.burn_in_excluded = cfg.burn_in;
    rep.mse_raw = mse(error_signal(arv, cfg.b_target), t_ret);
    rep.mse_pct = mse_percent(rep.mse_raw, mse(error_signal(arv_off, cfg.b_target), t_ret));
    rep.power_w = trace_power_w(trace, cfg, duty);
    rep.power_pct = reference_power_w > 0.0 ? 100.0 * rep.power_w / reference_power_w
                                            : std::numeric_limits<double>::quiet_NaN();
    const double power_uw = rep.power_w * 1e6;
    if (power_uw > 0.0) {
        rep.efficiency_std =
            suppression_efficiency(arv_off, arv, power_uw, EfficiencyVariant::standard);
        rep.efficiency_as_printed =
            suppression_efficiency(arv_off, arv, power_uw, EfficiencyVariant::as_printed);
    }
    return rep;
}

}  // namespace cldbs
