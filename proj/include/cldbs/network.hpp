#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cldbs/random.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// Conductance-based point neuron.
//
// One template covers all six populations: a fast Na/K spiking core plus
// optional low-threshold Ca (rebound), high-voltage Ca with Ca-gated K
// (adaptation / afterhyperpolarization) and A-type K. Populations select
// their channel inventory through the conductances; g = 0 disables a channel.
// Units: mV, ms, uA/cm^2, mS/cm^2, uF/cm^2.

struct NeuronParams {
    double c_m = 1.0;
    double g_na = 35.0, e_na = 55.0;
    double g_k = 9.0, e_k = -90.0;
    double g_l = 0.1, e_l = -65.0;
    double g_t = 0.0;      // low-threshold Ca
    double g_hva = 0.0;    // high-voltage Ca
    double e_ca = 120.0;
    double g_ahp = 0.0;    // Ca-gated K
    double g_a = 0.0;      // A-type K
    double phi = 5.0;      // gating rate scale of the spiking core
    double bias = 0.0;     // intracellular bias current setting the firing rate
    double tau_r = 30.0;   // T-current deinactivation, ms
    double tau_q = 25.0;   // A-current inactivation, ms
    double tau_ca = 80.0;  // Ca removal, ms
    double ca_alpha = 0.02;
    double ca_half = 1.0;
};

struct NeuronState {
    double v = -65.0;
    double h = 0.6, n = 0.3;   // spiking core gates
    double r = 0.0;            // T-current deinactivation
    double q = 0.3;            // A-current inactivation
    double ca = 0.0;
    bool above_threshold = false;
};

namespace detail {

// x / (1 - exp(-x/s)) with the removable singularity handled
inline double vtrap(double x, double s) {
    const double y = x / s;
    if (std::abs(y) < 1e-6) return s * (1.0 + y / 2.0);
    return x / (1.0 - std::exp(-y));
}

}  // namespace detail

/// Advances one neuron by dt_ms given the total synaptic current (uA/cm^2,
/// positive = outward) and an injected current (positive = depolarizing).
/// Returns true on an upward threshold crossing at -10 mV.
inline bool step_neuron(NeuronState& s, const NeuronParams& p, double i_syn,
                        double i_inject, double dt_ms) {
    const double v = s.v;

    const double am = 0.1 * detail::vtrap(v + 35.0, 10.0);
    const double bm = 4.0 * std::exp(-(v + 60.0) / 18.0);
    const double m_inf = am / (am + bm);

    const double ah = 0.07 * std::exp(-(v + 58.0) / 20.0);
    const double bh = 1.0 / (1.0 + std::exp(-(v + 28.0) / 10.0));
    const double an = 0.01 * detail::vtrap(v + 34.0, 10.0);
    const double bn = 0.125 * std::exp(-(v + 44.0) / 80.0);

    const double i_na = p.g_na * m_inf * m_inf * m_inf * s.h * (v - p.e_na);
    const double i_k = p.g_k * s.n * s.n * s.n * s.n * (v - p.e_k);
    const double i_l = p.g_l * (v - p.e_l);

    double i_t = 0.0;
    if (p.g_t > 0.0) {
        const double a_inf = 1.0 / (1.0 + std::exp(-(v + 57.0) / 6.2));
        i_t = p.g_t * a_inf * a_inf * s.r * (v - p.e_ca);
    }
    double i_hva = 0.0;
    if (p.g_hva > 0.0) {
        const double sa = 1.0 / (1.0 + std::exp(-(v + 20.0) / 9.0));
        i_hva = p.g_hva * sa * sa * (v - p.e_ca);
    }
    double i_ahp = 0.0;
    if (p.g_ahp > 0.0) i_ahp = p.g_ahp * (v - p.e_k) * s.ca / (s.ca + p.ca_half);
    double i_a = 0.0;
    if (p.g_a > 0.0) {
        const double pa = 1.0 / (1.0 + std::exp(-(v + 45.0) / 14.7));
        i_a = p.g_a * pa * pa * s.q * (v - p.e_k);
    }

    const double dv =
        (-(i_na + i_k + i_l + i_t + i_hva + i_ahp + i_a) - i_syn + i_inject + p.bias) / p.c_m;

    // explicit Euler with overshoot guards: gates live in [0, 1], Ca >= 0
    auto unit = [](double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); };
    s.v = v + dt_ms * dv;
    if (s.v < -150.0) s.v = -150.0;
    if (s.v > 80.0) s.v = 80.0;
    s.h = unit(s.h + dt_ms * p.phi * (ah * (1.0 - s.h) - bh * s.h));
    s.n = unit(s.n + dt_ms * p.phi * (an * (1.0 - s.n) - bn * s.n));
    if (p.g_t > 0.0) {
        const double r_inf = 1.0 / (1.0 + std::exp((v + 81.0) / 4.0));
        s.r = unit(s.r + dt_ms * (r_inf - s.r) / p.tau_r);
    }
    if (p.g_a > 0.0) {
        const double q_inf = 1.0 / (1.0 + std::exp((v + 56.0) / 7.5));
        s.q = unit(s.q + dt_ms * (q_inf - s.q) / p.tau_q);
    }
    if (p.g_hva > 0.0 || p.g_t > 0.0) {
        s.ca += dt_ms * (-p.ca_alpha * (i_hva + i_t) - s.ca / p.tau_ca);
        if (s.ca < 0.0) s.ca = 0.0;
    }

    const bool was_above = s.above_threshold;
    s.above_threshold = s.v >= -10.0;
    return s.above_threshold && !was_above;
}

// ---------------------------------------------------------------------------
// Network wiring

struct InDegrees {
    int stn_from_gpe = 5;
    int stn_from_ctx = 5;
    int gpe_from_striatum = 1;
    int gpe_from_gpe = 1;
    int gpe_from_stn = 2;
    int gpi_from_stn = 1;
    int gpi_from_gpe = 1;
    int thal_from_gpi = 1;
    int ctx_from_thal = 1;
    int ctx_from_interneuron = 10;
    int interneuron_from_ctx = 10;
};

/// Synaptic weights (total conductance per target, split across afferents),
/// delays, bias currents, stimulation coupling and the LFP output gain.
/// These values are hand-calibrated against the plant acceptance properties;
/// see tools/plant_probe.cpp for the calibration harness.
struct NetworkTuning {
    // total synaptic conductances, mS/cm^2
    double w_stn_from_gpe = 2.0;
    double w_stn_from_ctx = 0.05;
    double w_gpe_from_striatum = 1.5;
    double w_gpe_from_gpe = 0.3;
    double w_gpe_from_stn = 2.0;
    double w_gpi_from_stn = 0.4;
    double w_gpi_from_gpe = 0.6;
    double w_thal_from_gpi = 0.5;
    double w_ctx_from_thal = 0.4;
    double w_ctx_from_interneuron = 1.2;
    double w_interneuron_from_ctx = 0.5;
    // delays, ms
    double d_stn_from_gpe = 4.0;
    double d_stn_from_ctx = 4.0;
    double d_gpe_from_gpe = 3.0;
    double d_gpe_from_stn = 4.0;
    double d_gpi = 3.0;
    double d_thal_from_gpi = 3.0;
    double d_ctx_from_thal = 3.0;
    double d_ctx_loop = 3.0;
    // synapse kinetics
    double tau_ampa_ms = 5.0;
    double tau_gaba_ms = 8.0;
    double e_ampa = 0.0;
    double e_gaba = -85.0;
    // bias currents, uA/cm^2 (STN bias is scaled by the severity multiplier)
    double bias_stn = 4.5;
    double bias_gpe = 1.2;
    double bias_gpi = 1.4;
    double bias_thal = 0.3;
    double bias_ctx = 1.5;
    double bias_interneuron = 0.0;
    // DBS coupling, uA/cm^2 per mA of electrode current
    double dbs_gain_gpe = 200.0;
    double dbs_gain_ctx = 150.0;
    // fixed per-neuron spread of the bias currents (fraction of the mean)
    double bias_jitter = 0.05;
    // far-field background at the recording site (unmodeled populations),
    // summed into the LFP before the output gain; slow, so most of its power
    // sits below the beta band
    double lfp_noise_std = 16.0;   // weighted-current units
    double lfp_noise_tau_ms = 80.0;
    // LFP output scale, calibrated so severe DBS-off beta ARV ~ 0.2 uV
    double lfp_gain = 1.85e-2;
};

struct NetworkConfig {
    int n_stn = 100;
    int n_gpe = 100;
    int n_gpi = 100;
    int n_thal = 100;
    int n_interneuron = 100;
    int n_cortical = 100;
    InDegrees indeg;
    double striatal_rate_hz = 3.0;
    NetworkTuning tuning;

    int total_neurons() const {
        return n_stn + n_gpe + n_gpi + n_thal + n_interneuron + n_cortical;
    }
};

/// Reduced copy for fast runs: population sizes divided by `scale`, in-degrees
/// divided where the division is exact and kept as-is otherwise (they remain
/// satisfiable because no default in-degree exceeds the reduced sizes).
inline NetworkConfig make_reduced_config(const NetworkConfig& base, int scale) {
    if (scale <= 0) throw std::invalid_argument("make_reduced_config: scale must be positive");
    NetworkConfig c = base;
    auto shrink = [scale](int n) { return std::max(1, n / scale); };
    c.n_stn = shrink(base.n_stn);
    c.n_gpe = shrink(base.n_gpe);
    c.n_gpi = shrink(base.n_gpi);
    c.n_thal = shrink(base.n_thal);
    c.n_interneuron = shrink(base.n_interneuron);
    c.n_cortical = shrink(base.n_cortical);
    auto reduce = [scale](int d) { return d % scale == 0 ? d / scale : d; };
    InDegrees& g = c.indeg;
    for (int* d : {&g.stn_from_gpe, &g.stn_from_ctx, &g.gpe_from_striatum, &g.gpe_from_gpe,
                   &g.gpe_from_stn, &g.gpi_from_stn, &g.gpi_from_gpe, &g.thal_from_gpi,
                   &g.ctx_from_thal, &g.ctx_from_interneuron, &g.interneuron_from_ctx})
        *d = reduce(*d);
    return c;
}

/// Sum of per-neuron synaptic currents under fixed distance weights; the raw
/// network LFP observable.
inline double lfp_from_synaptic_currents(std::span<const double> currents,
                                         std::span<const double> weights) {
    if (currents.size() != weights.size())
        throw std::invalid_argument("lfp_from_synaptic_currents: one weight per current");
    double sum = 0.0;
    for (std::size_t i = 0; i < currents.size(); ++i) sum += weights[i] * currents[i];
    return sum;
}

/// One projection: fixed in-degree wiring plus an exponential conductance per
/// target and a delay line for in-flight spikes.
class Projection {
  public:
    Projection() = default;
    Projection(std::string name, int n_source, int n_target, int in_degree, double total_w,
               double delay_ms, double tau_ms, double e_rev, double dt_ms, bool exclude_self,
               RandomSource& rng)
        : name_(std::move(name)),
          n_source_(n_source),
          weight_(in_degree > 0 ? total_w / in_degree : 0.0),
          e_rev_(e_rev),
          decay_(std::exp(-dt_ms / tau_ms)),
          delay_steps_(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(delay_ms / dt_ms)))),
          sources_(static_cast<std::size_t>(n_target)),
          g_(static_cast<std::size_t>(n_target), 0.0),
          fanout_(static_cast<std::size_t>(n_source)),
          buckets_(delay_steps_ + 1) {
        const int limit = exclude_self ? n_source - 1 : n_source;
        if (in_degree > limit)
            throw std::invalid_argument("network config: in-degree " + std::to_string(in_degree) +
                                        " for " + name_ + " exceeds available sources (" +
                                        std::to_string(limit) + ")");
        for (int t = 0; t < n_target; ++t) {
            auto& list = sources_[static_cast<std::size_t>(t)];
            while (static_cast<int>(list.size()) < in_degree) {
                const auto s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_source)));
                if (exclude_self && s == t) continue;
                bool dup = false;
                for (int existing : list) dup |= existing == s;
                if (!dup) list.push_back(s);
            }
            for (int s : list)
                fanout_[static_cast<std::size_t>(s)].push_back(t);
        }
    }

    /// Registers a source spike occurring at the current step.
    void on_spike(int source, std::size_t step) {
        const std::size_t slot = (step + delay_steps_) % buckets_.size();
        for (int t : fanout_[static_cast<std::size_t>(source)])
            buckets_[slot].push_back(t);
    }

    /// Applies due spikes and decays conductances; call once per step before
    /// reading currents.
    void advance(std::size_t step) {
        for (double& g : g_) g *= decay_;
        auto& due = buckets_[step % buckets_.size()];
        for (int t : due) g_[static_cast<std::size_t>(t)] += weight_;
        due.clear();
    }

    /// Synaptic current onto target t at membrane voltage v (uA/cm^2,
    /// positive = outward/hyperpolarizing convention of step_neuron).
    double current(int t, double v) const {
        return g_[static_cast<std::size_t>(t)] * (v - e_rev_);
    }

    double conductance(int t) const { return g_[static_cast<std::size_t>(t)]; }
    const std::vector<std::vector<int>>& sources() const { return sources_; }
    const std::string& name() const { return name_; }

  private:
    std::string name_;
    int n_source_ = 0;
    double weight_ = 0.0;
    double e_rev_ = 0.0;
    double decay_ = 1.0;
    std::size_t delay_steps_ = 1;
    std::vector<std::vector<int>> sources_;   // per-target afferent lists
    std::vector<double> g_;
    std::vector<std::vector<int>> fanout_;    // per-source target lists
    std::vector<std::vector<int>> buckets_;   // delay line of pending arrivals
};

// ---------------------------------------------------------------------------
// The cortico-basal-ganglia plant

class BasalGangliaNetwork {
  public:
    BasalGangliaNetwork(const NetworkConfig& cfg, double severity_multiplier, double dt_s,
                        std::uint64_t seed)
        : cfg_(cfg), dt_ms_(dt_s * 1e3), rng_(seed) {
        if (!(dt_ms_ > 0.0)) throw std::invalid_argument("network: dt must be > 0");

        const NetworkTuning& t = cfg.tuning;
        stn_.assign(static_cast<std::size_t>(cfg.n_stn), NeuronState{});
        gpe_.assign(static_cast<std::size_t>(cfg.n_gpe), NeuronState{});
        gpi_.assign(static_cast<std::size_t>(cfg.n_gpi), NeuronState{});
        thal_.assign(static_cast<std::size_t>(cfg.n_thal), NeuronState{});
        inter_.assign(static_cast<std::size_t>(cfg.n_interneuron), NeuronState{});
        ctx_.assign(static_cast<std::size_t>(cfg.n_cortical), NeuronState{});

        p_stn_ = NeuronParams{};
        p_stn_.g_t = 1.2;
        p_stn_.g_hva = 0.3;
        p_stn_.g_ahp = 0.4;
        p_stn_.g_a = 0.5;
        p_stn_.bias = t.bias_stn * severity_multiplier;

        p_gpe_ = NeuronParams{};
        p_gpe_.g_t = 0.3;
        p_gpe_.g_hva = 0.3;
        p_gpe_.g_ahp = 0.2;
        p_gpe_.bias = t.bias_gpe;

        p_gpi_ = p_gpe_;
        p_gpi_.bias = t.bias_gpi;

        p_thal_ = NeuronParams{};
        p_thal_.g_t = 0.5;
        p_thal_.bias = t.bias_thal;

        p_ctx_ = NeuronParams{};
        p_ctx_.g_hva = 0.3;
        p_ctx_.g_ahp = 1.0;
        p_ctx_.tau_ca = 20.0;
        p_ctx_.bias = t.bias_ctx;

        p_int_ = NeuronParams{};
        p_int_.bias = t.bias_interneuron;

        const double ta = t.tau_ampa_ms, tg = t.tau_gaba_ms;
        const double ea = t.e_ampa, eg = t.e_gaba;
        stn_from_gpe_ = Projection("stn<-gpe", cfg.n_gpe, cfg.n_stn, cfg.indeg.stn_from_gpe,
                                   t.w_stn_from_gpe, t.d_stn_from_gpe, tg, eg, dt_ms_, false, rng_);
        stn_from_ctx_ = Projection("stn<-cortex", cfg.n_cortical, cfg.n_stn, cfg.indeg.stn_from_ctx,
                                   t.w_stn_from_ctx, t.d_stn_from_ctx, ta, ea, dt_ms_, false, rng_);
        gpe_from_gpe_ = Projection("gpe<-gpe", cfg.n_gpe, cfg.n_gpe, cfg.indeg.gpe_from_gpe,
                                   t.w_gpe_from_gpe, t.d_gpe_from_gpe, tg, eg, dt_ms_, true, rng_);
        gpe_from_stn_ = Projection("gpe<-stn", cfg.n_stn, cfg.n_gpe, cfg.indeg.gpe_from_stn,
                                   t.w_gpe_from_stn, t.d_gpe_from_stn, ta, ea, dt_ms_, false, rng_);
        gpi_from_stn_ = Projection("gpi<-stn", cfg.n_stn, cfg.n_gpi, cfg.indeg.gpi_from_stn,
                                   t.w_gpi_from_stn, t.d_gpi, ta, ea, dt_ms_, false, rng_);
        gpi_from_gpe_ = Projection("gpi<-gpe", cfg.n_gpe, cfg.n_gpi, cfg.indeg.gpi_from_gpe,
                                   t.w_gpi_from_gpe, t.d_gpi, tg, eg, dt_ms_, false, rng_);
        thal_from_gpi_ = Projection("thal<-gpi", cfg.n_gpi, cfg.n_thal, cfg.indeg.thal_from_gpi,
                                    t.w_thal_from_gpi, t.d_thal_from_gpi, tg, eg, dt_ms_, false, rng_);
        ctx_from_thal_ = Projection("cortex<-thal", cfg.n_thal, cfg.n_cortical, cfg.indeg.ctx_from_thal,
                                    t.w_ctx_from_thal, t.d_ctx_from_thal, ta, ea, dt_ms_, false, rng_);
        ctx_from_int_ = Projection("cortex<-interneuron", cfg.n_interneuron, cfg.n_cortical,
                                   cfg.indeg.ctx_from_interneuron, t.w_ctx_from_interneuron,
                                   t.d_ctx_loop, tg, eg, dt_ms_, false, rng_);
        int_from_ctx_ = Projection("interneuron<-cortex", cfg.n_cortical, cfg.n_interneuron,
                                   cfg.indeg.interneuron_from_ctx, t.w_interneuron_from_ctx,
                                   t.d_ctx_loop, ta, ea, dt_ms_, false, rng_);

        // striatal GABA drive on GPe: one independent 3 Hz Poisson afferent each
        g_striatal_.assign(static_cast<std::size_t>(cfg.n_gpe), 0.0);
        striatal_decay_ = std::exp(-dt_ms_ / tg);
        striatal_p_spike_ = cfg.striatal_rate_hz * dt_ms_ * 1e-3 *
                            static_cast<double>(cfg.indeg.gpe_from_striatum);

        // LFP distance weights 1/d, d uniform in [0.5, 2] mm
        lfp_weights_.reserve(static_cast<std::size_t>(cfg.n_stn));
        for (int i = 0; i < cfg.n_stn; ++i)
            lfp_weights_.push_back(1.0 / (0.5 + 1.5 * rng_.uniform01()));

        // desynchronized start
        for (auto* pop : {&stn_, &gpe_, &gpi_, &thal_, &inter_, &ctx_})
            for (NeuronState& s : *pop) s.v += 10.0 * (rng_.uniform01() - 0.5);

        // fixed per-neuron bias spread
        auto draw_offsets = [&](std::vector<double>& dst, std::size_t n, double mean_bias) {
            dst.resize(n);
            for (double& v : dst)
                v = mean_bias * t.bias_jitter * (2.0 * rng_.uniform01() - 1.0);
        };
        draw_offsets(bias_offset_stn_, stn_.size(), p_stn_.bias);
        draw_offsets(bias_offset_gpe_, gpe_.size(), p_gpe_.bias);
        draw_offsets(bias_offset_gpi_, gpi_.size(), p_gpi_.bias);
        draw_offsets(bias_offset_thal_, thal_.size(), p_thal_.bias);
        draw_offsets(bias_offset_int_, inter_.size(), p_int_.bias);
        draw_offsets(bias_offset_ctx_, ctx_.size(), p_ctx_.bias);

        stn_syn_current_.assign(static_cast<std::size_t>(cfg.n_stn), 0.0);
    }

    /// Advances the network one step under the instantaneous electrode
    /// current (mA) and returns the raw LFP sample (uV).
    double step(double i_dbs_ma) {
        const NetworkTuning& t = cfg_.tuning;
        for (Projection* pr : projections())
            pr->advance(step_);

        // striatal Poisson arrivals (no delay line needed)
        for (double& g : g_striatal_) {
            g *= striatal_decay_;
            if (rng_.uniform01() < striatal_p_spike_)
                g += t.w_gpe_from_striatum / std::max(1, cfg_.indeg.gpe_from_striatum);
        }

        const double i_gpe_dbs = t.dbs_gain_gpe * i_dbs_ma;
        const double i_ctx_dbs = t.dbs_gain_ctx * i_dbs_ma;

        for (int j = 0; j < cfg_.n_stn; ++j) {
            NeuronState& s = stn_[static_cast<std::size_t>(j)];
            const double i_syn = stn_from_gpe_.current(j, s.v) + stn_from_ctx_.current(j, s.v);
            stn_syn_current_[static_cast<std::size_t>(j)] = i_syn;
            if (step_neuron(s, p_stn_, i_syn, bias_offset_stn_[static_cast<std::size_t>(j)],
                            dt_ms_)) {
                gpe_from_stn_.on_spike(j, step_);
                gpi_from_stn_.on_spike(j, step_);
                ++spike_counts_[0];
            }
        }
        for (int j = 0; j < cfg_.n_gpe; ++j) {
            NeuronState& s = gpe_[static_cast<std::size_t>(j)];
            const double i_syn = gpe_from_stn_.current(j, s.v) + gpe_from_gpe_.current(j, s.v) +
                                 g_striatal_[static_cast<std::size_t>(j)] * (s.v - t.e_gaba);
            if (step_neuron(s, p_gpe_, i_syn,
                            i_gpe_dbs + bias_offset_gpe_[static_cast<std::size_t>(j)], dt_ms_)) {
                stn_from_gpe_.on_spike(j, step_);
                gpe_from_gpe_.on_spike(j, step_);
                gpi_from_gpe_.on_spike(j, step_);
                ++spike_counts_[1];
            }
        }
        for (int j = 0; j < cfg_.n_gpi; ++j) {
            NeuronState& s = gpi_[static_cast<std::size_t>(j)];
            const double i_syn = gpi_from_stn_.current(j, s.v) + gpi_from_gpe_.current(j, s.v);
            if (step_neuron(s, p_gpi_, i_syn, bias_offset_gpi_[static_cast<std::size_t>(j)],
                            dt_ms_)) {
                thal_from_gpi_.on_spike(j, step_);
                ++spike_counts_[2];
            }
        }
        for (int j = 0; j < cfg_.n_thal; ++j) {
            NeuronState& s = thal_[static_cast<std::size_t>(j)];
            if (step_neuron(s, p_thal_, thal_from_gpi_.current(j, s.v),
                            bias_offset_thal_[static_cast<std::size_t>(j)], dt_ms_)) {
                ctx_from_thal_.on_spike(j, step_);
                ++spike_counts_[3];
            }
        }
        for (int j = 0; j < cfg_.n_interneuron; ++j) {
            NeuronState& s = inter_[static_cast<std::size_t>(j)];
            if (step_neuron(s, p_int_, int_from_ctx_.current(j, s.v),
                            bias_offset_int_[static_cast<std::size_t>(j)], dt_ms_)) {
                ctx_from_int_.on_spike(j, step_);
                ++spike_counts_[4];
            }
        }
        for (int j = 0; j < cfg_.n_cortical; ++j) {
            NeuronState& s = ctx_[static_cast<std::size_t>(j)];
            const double i_syn = ctx_from_thal_.current(j, s.v) + ctx_from_int_.current(j, s.v);
            if (step_neuron(s, p_ctx_, i_syn,
                            i_ctx_dbs + bias_offset_ctx_[static_cast<std::size_t>(j)], dt_ms_)) {
                stn_from_ctx_.on_spike(j, step_);
                int_from_ctx_.on_spike(j, step_);
                ++spike_counts_[5];
            }
        }

        if (t.lfp_noise_std > 0.0) {
            const double k = dt_ms_ / t.lfp_noise_tau_ms;
            lfp_noise_ += -lfp_noise_ * k + t.lfp_noise_std * std::sqrt(2.0 * k) * rng_.normal();
        }

        ++step_;
        return cfg_.tuning.lfp_gain *
               (lfp_from_synaptic_currents(stn_syn_current_, lfp_weights_) + lfp_noise_);
    }

    const NetworkConfig& config() const { return cfg_; }
    std::span<const double> lfp_weights() const { return lfp_weights_; }
    std::span<const double> stn_synaptic_currents() const { return stn_syn_current_; }

    const Projection& projection(const std::string& name) const {
        for (const Projection* p : projections())
            if (p->name() == name) return *p;
        throw std::invalid_argument("network: unknown projection " + name);
    }

    /// Cumulative spike counts per population, in the order
    /// stn, gpe, gpi, thal, interneuron, cortex.
    const std::array<std::uint64_t, 6>& spike_counts() const { return spike_counts_; }

    /// Total synaptic conductance seen by STN neuron j, split by channel.
    double stn_gaba_conductance(int j) const { return stn_from_gpe_.conductance(j); }
    double stn_ampa_conductance(int j) const { return stn_from_ctx_.conductance(j); }

  private:
    std::array<Projection*, 10> projections() {
        return {&stn_from_gpe_, &stn_from_ctx_, &gpe_from_gpe_, &gpe_from_stn_, &gpi_from_stn_,
                &gpi_from_gpe_, &thal_from_gpi_, &ctx_from_thal_, &ctx_from_int_, &int_from_ctx_};
    }
    std::array<const Projection*, 10> projections() const {
        return {&stn_from_gpe_, &stn_from_ctx_, &gpe_from_gpe_, &gpe_from_stn_, &gpi_from_stn_,
                &gpi_from_gpe_, &thal_from_gpi_, &ctx_from_thal_, &ctx_from_int_, &int_from_ctx_};
    }

    NetworkConfig cfg_;
    double dt_ms_;
    RandomSource rng_;
    std::size_t step_ = 0;

    std::vector<NeuronState> stn_, gpe_, gpi_, thal_, inter_, ctx_;
    NeuronParams p_stn_, p_gpe_, p_gpi_, p_thal_, p_ctx_, p_int_;

    Projection stn_from_gpe_, stn_from_ctx_, gpe_from_gpe_, gpe_from_stn_;
    Projection gpi_from_stn_, gpi_from_gpe_, thal_from_gpi_;
    Projection ctx_from_thal_, ctx_from_int_, int_from_ctx_;

    std::vector<double> g_striatal_;
    double striatal_decay_ = 1.0;
    double striatal_p_spike_ = 0.0;

    std::vector<double> bias_offset_stn_, bias_offset_gpe_, bias_offset_gpi_;
    std::vector<double> bias_offset_thal_, bias_offset_int_, bias_offset_ctx_;
    double lfp_noise_ = 0.0;

    std::vector<double> lfp_weights_;
    std::vector<double> stn_syn_current_;
    std::array<std::uint64_t, 6> spike_counts_{};
};

}  // namespace cldbs
