#include "ldme/signal.hpp"

#include <cmath>

namespace ldme {

void validate(const SignalSegment& seg) {
    if (seg.samples.size() < 8) {
        throw Error("SignalSegment: need at least 8 samples, got " +
                    std::to_string(seg.samples.size()));
    }
    if (!(seg.sample_rate_hz > 0.0) || !std::isfinite(seg.sample_rate_hz)) {
        throw Error("SignalSegment: sample_rate_hz must be positive and finite");
    }
    if (seg.cycle_index < 0) {
        throw Error("SignalSegment: cycle_index must be non-negative");
    }
    require_finite(seg.samples, "segment cycle " + std::to_string(seg.cycle_index));
}

void require_finite(std::span<const double> x, const std::string& context) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw Error("non-finite sample at index " + std::to_string(i) + " in " + context);
        }
    }
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) {
        const double d = v - m;
        s += d * d;
    }
    return s / static_cast<double>(x.size());
}

double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

double energy(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

}  // namespace ldme
