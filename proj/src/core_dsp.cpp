#include "ldme/core_dsp.hpp"

#include <cmath>
#include <complex>

#include "ldme/fft.hpp"

namespace ldme {

Spectrum fft_magnitude(const SignalSegment& seg, std::size_t n_fft) {
    validate(seg);
    if (!fft::is_pow2(n_fft)) {
        throw Error("fft_magnitude: n_fft must be a power of two, got " + std::to_string(n_fft));
    }
    if (n_fft < seg.samples.size()) {
        throw Error("fft_magnitude: n_fft (" + std::to_string(n_fft) +
                    ") must be >= segment length (" + std::to_string(seg.samples.size()) + ")");
    }

    std::vector<std::complex<double>> buf(n_fft, {0.0, 0.0});
    for (std::size_t i = 0; i < seg.samples.size(); ++i) buf[i] = seg.samples[i];
    fft::transform_pow2(buf, false);

    // Amplitude scaling: a unit-amplitude tone on a bin reads 1.0 there (DC
    // and Nyquist carry no conjugate partner, so they are not doubled).
    Spectrum spec;
    spec.n_fft = n_fft;
    spec.bin_hz = seg.sample_rate_hz / static_cast<double>(n_fft);
    spec.magnitudes.resize(n_fft / 2 + 1);
    const double scale = 1.0 / static_cast<double>(n_fft);
    for (std::size_t k = 0; k <= n_fft / 2; ++k) {
        const double one_sided = (k == 0 || k == n_fft / 2) ? 1.0 : 2.0;
        spec.magnitudes[k] = one_sided * scale * std::abs(buf[k]);
    }
    return spec;
}

SignalSegment analytic_envelope(const SignalSegment& seg) {
    validate(seg);
    const std::size_t n = seg.samples.size();

    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = seg.samples[i];
    auto spec = fft::dft(buf, false);

    // one-sided analytic spectrum
    if (n % 2 == 0) {
        for (std::size_t k = 1; k < n / 2; ++k) spec[k] *= 2.0;
        for (std::size_t k = n / 2 + 1; k < n; ++k) spec[k] = 0.0;
    } else {
        for (std::size_t k = 1; k <= (n - 1) / 2; ++k) spec[k] *= 2.0;
        for (std::size_t k = (n - 1) / 2 + 1; k < n; ++k) spec[k] = 0.0;
    }

    auto analytic = fft::dft(spec, true);

    SignalSegment out;
    out.sample_rate_hz = seg.sample_rate_hz;
    out.cycle_index = seg.cycle_index;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = std::abs(analytic[i]);
    return out;
}

Spectrum envelope_spectrum(const SignalSegment& seg, std::size_t n_fft) {
    SignalSegment env = analytic_envelope(seg);
    const double m = mean(env.samples);
    for (double& v : env.samples) v -= m;
    return fft_magnitude(env, n_fft);
}

std::optional<double> kurtosis(std::span<const double> window) {
    if (window.size() < 4) {
        throw Error("kurtosis: window must have at least 4 samples, got " +
                    std::to_string(window.size()));
    }
    const double m = mean(window);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : window) {
        const double d = v - m;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    const double n = static_cast<double>(window.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) return std::nullopt;
    return m4 / (m2 * m2);
}

double spectral_flatness(const Spectrum& spec) {
    if (spec.magnitudes.empty()) throw Error("spectral_flatness: empty spectrum");

    double max_power = 0.0;
    for (double m : spec.magnitudes) max_power = std::max(max_power, m * m);
    if (max_power <= 0.0) throw Error("spectral_flatness: all-zero spectrum");

    constexpr double kFloor = 1e-30;
    const std::size_t n = spec.magnitudes.size();
    double log_sum = 0.0;
    double arith_sum = 0.0;
    for (double m : spec.magnitudes) {
        const double p = (m * m) / max_power;
        arith_sum += p;
        log_sum += std::log(std::max(p, kFloor));
    }
    const double geo = std::exp(log_sum / static_cast<double>(n));
    const double arith = arith_sum / static_cast<double>(n);
    return std::min(1.0, geo / arith);
}

}  // namespace ldme
