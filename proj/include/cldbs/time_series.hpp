#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cldbs {

/// Uniformly sampled real-valued signal. The common currency between the
/// plant, the DSP chain, the controllers and the metrics.
struct TimeSeries {
    std::vector<double> samples;
    double fs = 0.0;        // sampling rate, Hz
    double t0 = 0.0;        // start time, s
    std::string unit;       // "uV", "mA", "" (dimensionless)

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double dt() const { return 1.0 / fs; }

    /// Time of sample i.
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / fs; }

    /// Span between first and last sample, s. Zero for fewer than two samples.
    double duration() const {
        return samples.size() < 2 ? 0.0 : static_cast<double>(samples.size() - 1) / fs;
    }

    /// Copy of the tail starting at the first sample with time >= t_start.
    TimeSeries tail_from(double t_start) const {
        TimeSeries out;
        out.fs = fs;
        out.unit = unit;
        std::size_t begin = 0;
        if (t_start > t0) {
            begin = static_cast<std::size_t>(std::ceil((t_start - t0) * fs - 1e-9));
            if (begin > samples.size()) begin = samples.size();
        }
        out.t0 = time_at(begin);
        out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(begin), samples.end());
        return out;
    }
};

inline void require_valid(const TimeSeries& x, const char* who) {
    if (!(x.fs > 0.0))
        throw std::invalid_argument(std::string(who) + ": sampling rate must be > 0");
    for (double v : x.samples)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(who) + ": non-finite sample");
}

}  // namespace cldbs
