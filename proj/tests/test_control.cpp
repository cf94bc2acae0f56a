#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cldbs/control.hpp"

using namespace cldbs;

TEST_CASE("on-off controller applies the discretized increment") {
    LifControllerParams p;
    LifControllerState s;
    s.i_dbs = 1.0;

    // hand evaluation: 0.02 * (-(0.204 - 0.104) + 2.5) / (5 * 0.5) = 0.0192
    const double expected = p.gain * p.ts * (-(0.204 - 0.104) + p.r * p.i_drive) / (p.tau_m * p.r);
    CHECK(expected == Catch::Approx(0.0192).margin(1e-15));

    const double out = onoff_lif_step(s, p, 0.204);
    CHECK(out == Catch::Approx(1.0192).margin(1e-12));
    CHECK(out == 1.0 + expected);
}

TEST_CASE("on-off controller holds below target") {
    LifControllerParams p;
    LifControllerState s;
    s.i_dbs = 1.25;
    for (int i = 0; i < 50; ++i) CHECK(onoff_lif_step(s, p, 0.05) == 1.25);
    // firing threshold is inclusive
    CHECK(onoff_lif_step(s, p, 0.104) > 1.25);
}

TEST_CASE("on-off controller clamps at the maximal current") {
    LifControllerParams p;
    LifControllerState s;
    s.i_dbs = 2.995;
    CHECK(onoff_lif_step(s, p, 0.204) == 3.0);
    CHECK(onoff_lif_step(s, p, 0.5) == 3.0);
}

TEST_CASE("on-off controller saturates from zero in a computable step count") {
    LifControllerParams p;
    LifControllerState s;
    const double arv = 2.0 * p.b_target;
    const double delta = p.gain * p.ts * (-(arv - p.b_target) + p.r * p.i_drive) / (p.tau_m * p.r);
    const int expected_steps = static_cast<int>(std::ceil(3.0 / delta));
    CHECK(expected_steps == 157);

    int steps = 0;
    while (s.i_dbs < 3.0) {
        onoff_lif_step(s, p, arv);
        ++steps;
        REQUIRE(steps <= expected_steps);
    }
    CHECK(steps == expected_steps);
    onoff_lif_step(s, p, arv);
    CHECK(s.i_dbs == 3.0);
}

TEST_CASE("on-off controller rejects negative ARV") {
    LifControllerParams p;
    LifControllerState s;
    CHECK_THROWS_AS(onoff_lif_step(s, p, -0.01), std::invalid_argument);
}

TEST_CASE("dual controller decrements by the mirrored law") {
    LifControllerParams p;
    LifControllerState s;
    s.i_dbs = 1.0;
    // hand evaluation: -0.02 * (-(0.05207 - 0.03) + 2.5) / 2.5 = -0.01982
    const double out = dual_lif_step(s, p, 0.03);
    CHECK(out == Catch::Approx(0.98017656).margin(1e-9));
}

TEST_CASE("dual controller holds inside the deadband and ramps above it") {
    LifControllerParams p;
    LifControllerState s;
    s.i_dbs = 1.0;
    for (double arv : {0.08, 0.06, 0.1, 0.0521, 0.10399}) CHECK(dual_lif_step(s, p, arv) == 1.0);
    CHECK(dual_lif_step(s, p, 0.2) > 1.0);
}

TEST_CASE("dual controller clamps at both bounds") {
    LifControllerParams p;
    LifControllerState s;
    s.i_dbs = 0.004;
    CHECK(dual_lif_step(s, p, 0.0) == 0.0);
    s.i_dbs = 2.999;
    CHECK(dual_lif_step(s, p, 0.3) == 3.0);
}

TEST_CASE("doubling the gain doubles every unclamped update") {
    LifControllerParams p1, p2;
    p2.gain = 2.0;
    for (double arv : {0.104, 0.15, 0.204, 0.3}) {
        LifControllerState a, b;
        a.i_dbs = b.i_dbs = 1.0;
        const double d1 = onoff_lif_step(a, p1, arv) - 1.0;
        const double d2 = onoff_lif_step(b, p2, arv) - 1.0;
        CHECK(d2 == Catch::Approx(2.0 * d1).epsilon(1e-12));
    }
}

TEST_CASE("open-loop controller passes amplitudes through") {
    CHECK(open_loop_step(2.5) == 2.5);
    CHECK(open_loop_step(0.0) == 0.0);
    CHECK_THROWS_AS(open_loop_step(3.5), std::invalid_argument);
    CHECK_THROWS_AS(open_loop_step(-0.1), std::invalid_argument);
}

TEST_CASE("pulse train duty cycle") {
    DbsWaveformSpec spec;  // 130 Hz, 60 us
    CHECK(spec.duty() == Catch::Approx(0.0078).margin(1e-12));

    for (double t : {0.0, 0.001, 0.0077, 1.0}) CHECK(dbs_pulse_train(spec, 0.0, t) == 0.0);

    // mean over one period = amplitude * duty
    const double period = 1.0 / spec.frequency_hz;
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += dbs_pulse_train(spec, 2.0, static_cast<double>(i) * period / n);
    CHECK(acc / n == Catch::Approx(2.0 * 0.0078).epsilon(1e-3));

    CHECK(dbs_pulse_train(spec, 2.0, 59e-6) == 2.0);
    CHECK(dbs_pulse_train(spec, 2.0, 61e-6) == 0.0);
    CHECK(dbs_pulse_train(spec, 2.0, period + 59e-6) == 2.0);
    CHECK(dbs_pulse_train(spec, 2.0, period + 61e-6) == 0.0);
}

namespace {

PlantConfig quiet_severe_plant(std::uint64_t seed) {
    PlantConfig pc;
    pc.mode = PlantMode::surrogate;
    pc.seed = seed;
    pc.severity = Severity::severe;
    pc.surrogate.noise_amp = 0.0;
    pc.surrogate.ou_std = 0.0;
    return pc;
}

}  // namespace

TEST_CASE("closed loop: open-loop command is constant") {
    Plant plant(quiet_severe_plant(1));
    Controller ctrl;
    ctrl.kind = ControllerKind::open_loop;
    ctrl.open_loop_amplitude = 2.5;
    ChainConfig chain;
    chain.f_center = 20.0;
    const SimulationTrace tr = run_closed_loop(plant, ctrl, 6.0, chain);
    REQUIRE(tr.aligned());
    for (double a : tr.dbs_amplitude.samples) CHECK(a == 2.5);
}

TEST_CASE("closed loop: on-off ramps monotonically then plateaus (quiet plant)") {
    Plant plant(quiet_severe_plant(2));
    Controller ctrl;
    ctrl.kind = ControllerKind::onoff_lif;
    ChainConfig chain;
    chain.f_center = 20.0;
    const SimulationTrace tr = run_closed_loop(plant, ctrl, 12.0, chain);
    REQUIRE(tr.aligned());

    const auto& amp = tr.dbs_amplitude.samples;
    for (std::size_t i = 1; i < amp.size(); ++i) CHECK(amp[i] >= amp[i - 1]);
    // plateau: unchanged over the last two seconds
    const std::size_t tail = amp.size() - static_cast<std::size_t>(2.0 * tr.dbs_amplitude.fs);
    for (std::size_t i = tail; i < amp.size(); ++i) CHECK(amp[i] == amp[tail]);
    CHECK(amp.back() > 0.5);  // it did ramp

    // command changes only at control-period boundaries
    const auto every = static_cast<std::size_t>(std::llround(ctrl.params.ts * tr.dbs_amplitude.fs));
    for (std::size_t i = 1; i < amp.size(); ++i)
        if (amp[i] != amp[i - 1]) CHECK(i % every == 0);
}

TEST_CASE("closed loop rejects too-short runs") {
    Plant plant(quiet_severe_plant(3));
    Controller ctrl;
    CHECK_THROWS_AS(run_closed_loop(plant, ctrl, 1.0), std::invalid_argument);
}

TEST_CASE("trace series share rate and length") {
    Plant plant(quiet_severe_plant(4));
    Controller ctrl;
    ctrl.kind = ControllerKind::dual_lif;
    ChainConfig chain;
    chain.f_center = 20.0;
    const SimulationTrace tr = run_closed_loop(plant, ctrl, 5.0, chain);
    REQUIRE(tr.aligned());
    CHECK(tr.lfp_raw.size() == 5000);
    CHECK(tr.meta.controller_id == "dual_lif");
    CHECK(tr.meta.b_target == Catch::Approx(0.104));
    CHECK(tr.meta.t_low == Catch::Approx(0.05207));
}
