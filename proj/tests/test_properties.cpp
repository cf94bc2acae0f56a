#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "cldbs/control.hpp"
#include "cldbs/dsp.hpp"
#include "cldbs/metrics.hpp"

// Randomized property suites. Each one runs at least 100 generated cases.

using namespace cldbs;

namespace {

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    TimeSeries signal(std::size_t n, double fs, double scale) {
        TimeSeries x;
        x.fs = fs;
        x.samples.reserve(n);
        std::normal_distribution<double> g(0.0, scale);
        for (std::size_t i = 0; i < n; ++i) x.samples.push_back(g(rng));
        return x;
    }
};

}  // namespace

TEST_CASE("property: controller commands stay clamped to [0, 3] mA") {
    Gen gen(101);
    for (int trial = 0; trial < 120; ++trial) {
        LifControllerParams p;
        p.gain = gen.uniform(0.1, 50.0);
        p.ts = gen.uniform(0.001, 0.5);
        LifControllerState onoff, dual;
        onoff.i_dbs = dual.i_dbs = gen.uniform(0.0, 3.0);
        for (int step = 0; step < 200; ++step) {
            const double arv = gen.uniform(0.0, 1.0);
            const double a = onoff_lif_step(onoff, p, arv);
            const double b = dual_lif_step(dual, p, arv);
            REQUIRE(a >= 0.0);
            REQUIRE(a <= 3.0);
            REQUIRE(b >= 0.0);
            REQUIRE(b <= 3.0);
        }
    }
}

TEST_CASE("property: on-off holds for any sequence strictly below target") {
    Gen gen(102);
    for (int trial = 0; trial < 110; ++trial) {
        LifControllerParams p;
        LifControllerState s;
        s.i_dbs = gen.uniform(0.0, 3.0);
        const double start = s.i_dbs;
        for (int step = 0; step < 100; ++step)
            onoff_lif_step(s, p, gen.uniform(0.0, p.b_target * 0.999));
        REQUIRE(s.i_dbs == start);
    }
}

TEST_CASE("property: dual deadband holds, above is non-decreasing, below non-increasing") {
    Gen gen(103);
    for (int trial = 0; trial < 110; ++trial) {
        LifControllerParams p;
        LifControllerState s;
        s.i_dbs = gen.uniform(0.0, 3.0);
        const double start = s.i_dbs;
        for (int step = 0; step < 60; ++step)
            dual_lif_step(s, p, gen.uniform(p.t_low * 1.001, p.t_up * 0.999));
        REQUIRE(s.i_dbs == start);

        double prev = s.i_dbs;
        for (int step = 0; step < 60; ++step) {
            dual_lif_step(s, p, gen.uniform(p.t_up * 1.001, 1.0));
            REQUIRE(s.i_dbs >= prev);
            prev = s.i_dbs;
        }
        for (int step = 0; step < 60; ++step) {
            dual_lif_step(s, p, gen.uniform(0.0, p.t_low * 0.999));
            REQUIRE(s.i_dbs <= prev);
            prev = s.i_dbs;
        }
    }
}

TEST_CASE("property: streaming filter equals chunked filtering bit for bit") {
    Gen gen(104);
    const FilterCoeffs coeffs = design_beta_bandpass(1000.0, 20.0);
    for (int trial = 0; trial < 100; ++trial) {
        const TimeSeries x = gen.signal(512 + gen.index(1024), 1000.0, gen.uniform(0.01, 10.0));

        StreamingFilter one(coeffs);
        std::vector<double> whole;
        whole.reserve(x.size());
        for (double v : x.samples) whole.push_back(one.process(v));

        StreamingFilter chunked(coeffs);
        std::vector<double> pieces;
        pieces.reserve(x.size());
        std::size_t i = 0;
        while (i < x.size()) {
            const std::size_t len = std::min<std::size_t>(1 + gen.index(97), x.size() - i);
            for (std::size_t k = 0; k < len; ++k) pieces.push_back(chunked.process(x.samples[i + k]));
            i += len;
        }
        REQUIRE(whole == pieces);
    }
}

TEST_CASE("property: welch scaling is Parseval-consistent within 5%") {
    Gen gen(105);
    for (int trial = 0; trial < 100; ++trial) {
        const double fs = gen.uniform(200.0, 2000.0);
        TimeSeries x = gen.signal(8192 + gen.index(8192), fs, gen.uniform(0.1, 5.0));
        // sometimes add tones so the spectrum is not white
        if (trial % 3 == 0) {
            const double f = gen.uniform(5.0, fs / 4.0);
            const double amp = gen.uniform(0.5, 3.0);
            for (std::size_t i = 0; i < x.size(); ++i)
                x.samples[i] += amp * std::sin(2.0 * 3.14159265358979323846 * f *
                                               static_cast<double>(i) / fs);
        }
        const Spectrum s = welch_psd(x, gen.uniform(0.5, 2.0));
        double total = 0.0;
        for (double p : s.psd) total += p;
        total *= s.resolution_hz;
        double msq = 0.0;
        for (double v : x.samples) msq += v * v;
        msq /= static_cast<double>(x.size());
        REQUIRE(total == Catch::Approx(msq).epsilon(0.05));
    }
}

TEST_CASE("property: mse and power obey the quadratic scaling law") {
    Gen gen(106);
    for (int trial = 0; trial < 110; ++trial) {
        const TimeSeries e = gen.signal(256 + gen.index(512), 100.0, gen.uniform(0.1, 2.0));
        const double c = gen.uniform(0.1, 7.0);
        TimeSeries scaled = e;
        for (double& v : scaled.samples) v *= c;

        const double base = mse(e, e.duration());
        REQUIRE(mse(scaled, e.duration()) == Catch::Approx(c * c * base).epsilon(1e-12));

        TimeSeries i_ma = e;
        for (double& v : i_ma.samples) v = std::abs(v);
        TimeSeries i_scaled = i_ma;
        for (double& v : i_scaled.samples) v *= c;
        const double p = power_consumption(i_ma, 500.0, i_ma.duration());
        REQUIRE(power_consumption(i_scaled, 500.0, i_ma.duration()) ==
                Catch::Approx(c * c * p).epsilon(1e-12));
        REQUIRE(p >= 0.0);
    }
}

TEST_CASE("property: rectifier idempotence and ARV bounds") {
    Gen gen(107);
    for (int trial = 0; trial < 100; ++trial) {
        const TimeSeries x = gen.signal(200 + gen.index(400), 500.0, gen.uniform(0.1, 3.0));
        const TimeSeries r1 = full_wave_rectify(x);
        const TimeSeries r2 = full_wave_rectify(r1);
        REQUIRE(r1.samples == r2.samples);

        const double window_s = gen.uniform(0.01, 0.2);
        const TimeSeries arv = moving_average_arv(r1, window_s);
        const auto w = static_cast<std::size_t>(std::floor(window_s * x.fs + 0.5));
        for (std::size_t i = 0; i < arv.size(); ++i) {
            const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
            double peak = 0.0;
            for (std::size_t k = lo; k <= i; ++k) peak = std::max(peak, r1.samples[k]);
            REQUIRE(arv.samples[i] >= 0.0);
            REQUIRE(arv.samples[i] <= peak * (1.0 + 1e-12) + 1e-15);
        }
    }
}
