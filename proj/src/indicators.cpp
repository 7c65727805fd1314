#include "ldme/indicators.hpp"

#include <algorithm>
#include <cmath>

#include "ldme/fft.hpp"

namespace ldme {

void KinematicsSpec::validate() const {
    if (n_tooth < 2) throw Error("KinematicsSpec: n_tooth must be >= 2");
    if (!(fund_hz > 0.0) || !std::isfinite(fund_hz)) {
        throw Error("KinematicsSpec: fund_hz must be positive");
    }
    if (!(shaft_hz > 0.0) || !std::isfinite(shaft_hz)) {
        throw Error("KinematicsSpec: shaft_hz must be positive");
    }
    if (planet_count < 1) throw Error("KinematicsSpec: planet_count must be >= 1");
}

double KinematicsSpec::characteristic_hz(const std::string& fault_type) const {
    auto it = char_coeffs.find(fault_type);
    if (it == char_coeffs.end()) {
        throw Error("KinematicsSpec: unknown fault type '" + fault_type + "'");
    }
    return it->second * shaft_hz;
}

SignalSegment ht_tsa(std::span<const SignalSegment> history, int averages) {
    if (history.empty()) throw Error("ht_tsa: empty segment history");
    if (averages < 1) throw Error("ht_tsa: averages must be >= 1");

    const std::size_t use = std::min<std::size_t>(history.size(),
                                                  static_cast<std::size_t>(averages));
    const SignalSegment& last = history.back();
    const std::size_t n = last.samples.size();
    for (std::size_t i = history.size() - use; i < history.size(); ++i) {
        if (history[i].samples.size() != n) {
            throw Error("ht_tsa: segment length mismatch at history index " +
                        std::to_string(i) + " (" +
                        std::to_string(history[i].samples.size()) + " vs " +
                        std::to_string(n) + ")");
        }
    }

    SignalSegment avg;
    avg.sample_rate_hz = last.sample_rate_hz;
    avg.cycle_index = last.cycle_index;
    avg.samples.assign(n, 0.0);
    const double inv = 1.0 / static_cast<double>(use);
    for (std::size_t i = history.size() - use; i < history.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) avg.samples[j] += history[i].samples[j];
    }
    for (double& v : avg.samples) v *= inv;
    return analytic_envelope(avg);
}

Spectrum cycle_spectrum(const SignalSegment& tsa_out) {
    validate(tsa_out);
    const double m = mean(tsa_out.samples);
    SignalSegment centered;
    centered.sample_rate_hz = tsa_out.sample_rate_hz;
    centered.cycle_index = tsa_out.cycle_index;
    centered.samples.resize(tsa_out.samples.size());
    for (std::size_t i = 0; i < centered.samples.size(); ++i) {
        centered.samples[i] = tsa_out.samples[i] - m;
    }
    const double r = rms(centered.samples);
    if (r == 0.0) throw Error("cycle_spectrum: zero-RMS input after mean removal");
    for (double& v : centered.samples) v /= r;
    return fft_magnitude(centered, fft::next_pow2(centered.samples.size()));
}

CiRecord compute_ci(const Spectrum& spec, const KinematicsSpec& kin, long cycle_index) {
    kin.validate();
    if (spec.magnitudes.size() < 2 || spec.bin_hz <= 0.0) {
        throw Error("compute_ci: invalid spectrum");
    }
    const std::size_t last = spec.magnitudes.size() - 1;
    const double max_hz = spec.bin_hz * static_cast<double>(last);
    const int n_harm = 2 * kin.n_tooth;
    if (static_cast<double>(n_harm) * kin.fund_hz > max_hz * (1.0 + 1e-12)) {
        throw Error("compute_ci: harmonic range " + std::to_string(n_harm) + " x " +
                    std::to_string(kin.fund_hz) + " Hz exceeds the spectrum Nyquist of " +
                    std::to_string(max_hz) + " Hz");
    }
    // +-1-bin windows around consecutive harmonics must not overlap, or CI1
    // could double-count bins and push CI2 past 1.
    if (kin.fund_hz < 3.0 * spec.bin_hz) {
        throw Error("compute_ci: fund_hz (" + std::to_string(kin.fund_hz) +
                    " Hz) must span at least 3 spectrum bins (bin " +
                    std::to_string(spec.bin_hz) + " Hz); use a longer FFT");
    }

    double ci1 = 0.0;
    for (int k = 1; k <= n_harm; ++k) {
        const auto center = static_cast<std::size_t>(
            std::lround(static_cast<double>(k) * kin.fund_hz / spec.bin_hz));
        const std::size_t lo = center > 1 ? center - 1 : 1;
        const std::size_t hi = std::min(last, center + 1);
        double peak = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) peak = std::max(peak, spec.magnitudes[i]);
        ci1 += peak;
    }

    double denom = 0.0;
    for (std::size_t i = 1; i <= last; ++i) denom += spec.magnitudes[i];

    CiRecord rec;
    rec.cycle_index = cycle_index;
    rec.ci1 = ci1;
    rec.ci2 = denom > 0.0 ? std::min(1.0, ci1 / denom) : 0.0;
    rec.cci = (rec.ci1 + rec.ci2) / 2.0;
    return rec;
}

SignalSegment adaptive_modulation(const SignalSegment& seg, double cci,
                                  double reference_cci, double gamma) {
    validate(seg);
    if (!(reference_cci > 0.0) || !std::isfinite(reference_cci)) {
        throw Error("adaptive_modulation: reference_cci must be positive");
    }
    const double gain = 1.0 + gamma * std::max(0.0, cci / reference_cci - 1.0);
    SignalSegment out = seg;
    for (double& v : out.samples) v *= gain;
    return out;
}

}  // namespace ldme
