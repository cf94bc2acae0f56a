#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cldbs/time_series.hpp"

namespace cldbs {

// ---------------------------------------------------------------------------
// Filter types

struct BiquadSection {
    // y[k] = b0 x[k] + b1 x[k-1] + b2 x[k-2] - a1 y[k-1] - a2 y[k-2]
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    /// Pole modulus^2 of the section denominator (conjugate pair assumed).
    double pole_radius2() const { return a2; }
    bool stable() const {
        // |a2| < 1 and |a1| < 1 + a2 is the stability triangle for real biquads
        return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
    }
};

struct FilterDesign {
    int order = 0;             // overall bandpass order (2 per section)
    double f_center = 0.0;     // Hz
    double bandwidth = 0.0;    // Hz
    double ripple_db = 0.0;    // passband ripple
    double fs = 0.0;           // design rate, Hz
};

struct FilterCoeffs {
    std::vector<BiquadSection> sections;
    FilterDesign design;
};

// ---------------------------------------------------------------------------
// Chebyshev type-I bandpass design

namespace detail {

inline std::complex<double> bilinear(std::complex<double> s, double fs) {
    const double k = 2.0 * fs;
    return (k + s) / (k - s);
}

}  // namespace detail

/// Designs a Chebyshev type-I bandpass of the given overall order with
/// passband edges f_center +/- bandwidth/2. The analog prototype of order
/// order/2 is frequency-transformed to a bandpass and discretized with the
/// bilinear transform (edges prewarped), yielding order/2 biquad sections.
/// The cascade gain is normalized so the ripple band tops out at 0 dB.
inline FilterCoeffs design_beta_bandpass(double fs, double f_center,
                                         double bandwidth = 8.0, int order = 4,
                                         double ripple_db = 1.0) {
    if (!(fs > 0.0)) throw std::invalid_argument("design_beta_bandpass: fs must be > 0");
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("design_beta_bandpass: order must be even and >= 2");
    if (!(ripple_db > 0.0))
        throw std::invalid_argument("design_beta_bandpass: ripple must be > 0 dB");
    const double f_lo = f_center - bandwidth / 2.0;
    const double f_hi = f_center + bandwidth / 2.0;
    if (!(f_lo > 0.0) || !(f_hi < fs / 2.0))
        throw std::invalid_argument(
            "design_beta_bandpass: band edges must lie strictly inside (0, fs/2)");

    const int np = order / 2;  // analog prototype order
    const double pi = std::acos(-1.0);

    // prewarped analog edge frequencies, rad/s
    const double w1 = 2.0 * fs * std::tan(pi * f_lo / fs);
    const double w2 = 2.0 * fs * std::tan(pi * f_hi / fs);
    const double w0 = std::sqrt(w1 * w2);
    const double bw = w2 - w1;

    // Chebyshev-I prototype poles on the ellipse
    const double eps = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
    const double mu = std::asinh(1.0 / eps) / np;
    std::vector<std::complex<double>> proto;
    proto.reserve(static_cast<std::size_t>(np));
    for (int k = 1; k <= np; ++k) {
        const double theta = pi * (2.0 * k - 1.0) / (2.0 * np);
        proto.emplace_back(-std::sinh(mu) * std::sin(theta),
                           std::cosh(mu) * std::cos(theta));
    }

    // lowpass->bandpass: each prototype pole p solves s^2 - p*bw*s + w0^2 = 0
    std::vector<std::complex<double>> poles;
    poles.reserve(static_cast<std::size_t>(order));
    for (const auto& p : proto) {
        const std::complex<double> pb = p * bw * 0.5;
        const std::complex<double> disc = std::sqrt(pb * pb - w0 * w0);
        poles.push_back(detail::bilinear(pb + disc, fs));
        poles.push_back(detail::bilinear(pb - disc, fs));
    }

    // group into conjugate pairs: keep poles with non-negative imaginary part
    std::vector<std::complex<double>> upper;
    for (const auto& z : poles)
        if (z.imag() >= 0.0) upper.push_back(z);
    if (static_cast<int>(upper.size()) != np)
        throw std::runtime_error("design_beta_bandpass: pole pairing failed");
    std::sort(upper.begin(), upper.end(),
              [](const auto& a, const auto& b) { return std::arg(a) < std::arg(b); });

    FilterCoeffs out;
    out.design = {order, f_center, bandwidth, ripple_db, fs};
    for (const auto& z : upper) {
        BiquadSection s;
        // zeros at z = +1 and z = -1 from the n zeros at s=0 and s=inf
        s.b0 = 1.0;
        s.b1 = 0.0;
        s.b2 = -1.0;
        s.a1 = -2.0 * z.real();
        s.a2 = std::norm(z);
        if (!s.stable())
            throw std::runtime_error("design_beta_bandpass: unstable section");
        out.sections.push_back(s);
    }

    // normalize: at the (warped) center frequency the prototype sits at its
    // ripple floor for even order, at 1 for odd order
    const double w_center = 2.0 * std::atan(w0 / (2.0 * fs));  // rad/sample
    const std::complex<double> zc = std::polar(1.0, w_center);
    std::complex<double> h{1.0, 0.0};
    for (const auto& s : out.sections) {
        const std::complex<double> zi1 = 1.0 / zc;
        const std::complex<double> zi2 = zi1 * zi1;
        h *= (s.b0 + s.b1 * zi1 + s.b2 * zi2) / (1.0 + s.a1 * zi1 + s.a2 * zi2);
    }
    const double target = (np % 2 == 0) ? 1.0 / std::sqrt(1.0 + eps * eps) : 1.0;
    const double g = std::pow(target / std::abs(h), 1.0 / np);
    for (auto& s : out.sections) {
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Streaming application

/// Causal biquad cascade with carried state (direct form II transposed).
/// Feeding a signal in arbitrary chunk splits reproduces the single-pass
/// output bit for bit.
class StreamingFilter {
  public:
    StreamingFilter() = default;
    explicit StreamingFilter(FilterCoeffs coeffs)
        : coeffs_(std::move(coeffs)), state_(coeffs_.sections.size()) {}

    double process(double x) {
        for (std::size_t i = 0; i < coeffs_.sections.size(); ++i) {
            const BiquadSection& c = coeffs_.sections[i];
            State& st = state_[i];
            const double y = c.b0 * x + st.s1;
            st.s1 = c.b1 * x - c.a1 * y + st.s2;
            st.s2 = c.b2 * x - c.a2 * y;
            x = y;
        }
        return x;
    }

    void reset() { std::fill(state_.begin(), state_.end(), State{}); }
    const FilterCoeffs& coeffs() const { return coeffs_; }

  private:
    struct State {
        double s1 = 0.0, s2 = 0.0;
    };
    FilterCoeffs coeffs_;
    std::vector<State> state_;
};

/// One-shot causal filtering from zero initial state.
inline TimeSeries filter_signal(const FilterCoeffs& coeffs, const TimeSeries& x) {
    require_valid(x, "filter_signal");
    if (std::abs(x.fs - coeffs.design.fs) > 1e-9 * coeffs.design.fs)
        throw std::invalid_argument("filter_signal: signal rate does not match design rate");
    StreamingFilter f(coeffs);
    TimeSeries y;
    y.fs = x.fs;
    y.t0 = x.t0;
    y.unit = x.unit;
    y.samples.reserve(x.samples.size());
    for (double v : x.samples) y.samples.push_back(f.process(v));
    return y;
}

// ---------------------------------------------------------------------------
// Rectification and ARV

inline TimeSeries full_wave_rectify(const TimeSeries& x) {
    TimeSeries y = x;
    for (double& v : y.samples) v = std::abs(v);
    return y;
}

/// Causal trailing mean over a fixed sample window. The partial window at the
/// start averages the samples seen so far. The incremental update keeps a
/// constant input exactly constant at the output.
class StreamingMovingAverage {
  public:
    explicit StreamingMovingAverage(std::size_t window_samples)
        : window_(window_samples == 0 ? 1 : window_samples), buf_(window_, 0.0) {}

    double process(double x) {
        if (count_ < window_) {
            ++count_;
            mean_ += (x - mean_) / static_cast<double>(count_);
        } else {
            mean_ += (x - buf_[idx_]) / static_cast<double>(window_);
        }
        buf_[idx_] = x;
        idx_ = (idx_ + 1) % window_;
        return mean_;
    }

    std::size_t window() const { return window_; }

  private:
    std::size_t window_;
    std::vector<double> buf_;
    std::size_t count_ = 0;
    std::size_t idx_ = 0;
    double mean_ = 0.0;
};

/// Beta ARV: trailing moving average of a rectified signal.
inline TimeSeries moving_average_arv(const TimeSeries& x, double window_s = 0.1) {
    require_valid(x, "moving_average_arv");
    if (window_s < 1.0 / x.fs - 1e-12)
        throw std::invalid_argument("moving_average_arv: window shorter than one sample period");
    const auto n = static_cast<std::size_t>(std::floor(window_s * x.fs + 0.5));
    StreamingMovingAverage avg(n);
    TimeSeries y;
    y.fs = x.fs;
    y.t0 = x.t0;
    y.unit = x.unit;
    y.samples.reserve(x.samples.size());
    for (double v : x.samples) y.samples.push_back(avg.process(v));
    return y;
}

// ---------------------------------------------------------------------------
// Spectral estimation

struct Spectrum {
    std::vector<double> freq_hz;   // strictly increasing bins
    std::vector<double> psd;       // unit^2 / Hz, one-sided
    double resolution_hz = 0.0;
};

namespace detail {

inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n < 2) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = std::acos(-1.0);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace detail

/// Welch PSD with periodic Hann windows. Scaling is Parseval-consistent:
/// sum(psd) * resolution recovers the signal mean square.
inline Spectrum welch_psd(const TimeSeries& x, double segment_s, double overlap = 0.5) {
    require_valid(x, "welch_psd");
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw std::invalid_argument("welch_psd: overlap must lie in [0, 1)");
    const auto nperseg = static_cast<std::size_t>(std::floor(segment_s * x.fs + 0.5));
    if (nperseg < 8) throw std::invalid_argument("welch_psd: segment must span >= 8 samples");
    if (nperseg > x.samples.size())
        throw std::invalid_argument("welch_psd: segment longer than signal");

    const std::size_t nfft = detail::next_pow2(nperseg);
    const std::size_t nbins = nfft / 2 + 1;
    const double pi = std::acos(-1.0);

    std::vector<double> window(nperseg);
    double u = 0.0;  // window power
    for (std::size_t i = 0; i < nperseg; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) /
                                         static_cast<double>(nperseg));
        u += window[i] * window[i];
    }

    std::size_t hop = nperseg - static_cast<std::size_t>(std::floor(overlap * static_cast<double>(nperseg)));
    if (hop == 0) hop = 1;

    std::vector<double> acc(nbins, 0.0);
    std::vector<std::complex<double>> buf(nfft);
    std::size_t nseg = 0;
    for (std::size_t start = 0; start + nperseg <= x.samples.size(); start += hop) {
        for (std::size_t i = 0; i < nperseg; ++i)
            buf[i] = x.samples[start + i] * window[i];
        std::fill(buf.begin() + static_cast<std::ptrdiff_t>(nperseg), buf.end(),
                  std::complex<double>{0.0, 0.0});
        detail::fft_radix2(buf);
        const double scale = 1.0 / (x.fs * u);
        for (std::size_t k = 0; k < nbins; ++k) {
            double p = std::norm(buf[k]) * scale;
            if (k != 0 && k != nfft / 2) p *= 2.0;  // one-sided
            acc[k] += p;
        }
        ++nseg;
    }
    if (nseg == 0) throw std::invalid_argument("welch_psd: no complete segment");

    Spectrum s;
    s.resolution_hz = x.fs / static_cast<double>(nfft);
    s.freq_hz.resize(nbins);
    s.psd.resize(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        s.freq_hz[k] = static_cast<double>(k) * s.resolution_hz;
        s.psd[k] = acc[k] / static_cast<double>(nseg);
    }
    return s;
}

/// Integrated power over [f_lo, f_hi] as sum(psd) * bin width.
inline double band_power(const Spectrum& s, double f_lo, double f_hi) {
    if (!(f_lo < f_hi)) throw std::invalid_argument("band_power: empty band");
    if (s.freq_hz.empty() || f_hi < s.freq_hz.front() || f_lo > s.freq_hz.back())
        throw std::invalid_argument("band_power: band outside spectrum range");
    double total = 0.0;
    for (std::size_t k = 0; k < s.freq_hz.size(); ++k)
        if (s.freq_hz[k] >= f_lo && s.freq_hz[k] <= f_hi) total += s.psd[k];
    return total * s.resolution_hz;
}

inline constexpr double kBetaLowHz = 13.0;
inline constexpr double kBetaHighHz = 30.0;

/// Frequency of the Welch PSD maximum restricted to the beta band.
inline double estimate_beta_peak(const TimeSeries& x) {
    require_valid(x, "estimate_beta_peak");
    if (x.duration() < 5.0 - 1e-9)
        throw std::invalid_argument("estimate_beta_peak: signal must span at least 5 s");
    const Spectrum s = welch_psd(x, 2.0, 0.5);
    double best_f = kBetaLowHz;
    double best_p = -1.0;
    for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
        const double f = s.freq_hz[k];
        if (f < kBetaLowHz || f > kBetaHighHz) continue;
        if (s.psd[k] > best_p) {
            best_p = s.psd[k];
            best_f = f;
        }
    }
    return best_f;
}

}  // namespace cldbs
