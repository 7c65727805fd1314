#include "ldme/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace ldme {

void EnhanceConfig::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw Error("EnhanceConfig: beta must lie in (0,1), got " + std::to_string(beta));
    }
    if (band_selection.empty()) {
        throw Error("EnhanceConfig: band_selection must not be empty");
    }
    for (int b : band_selection) {
        if (b < 1) {
            throw Error("EnhanceConfig: band_selection entries must be detail levels >= 1");
        }
    }
}

SignalSegment band_select(const WaveletCoeffs& coeffs, const std::set<int>& bands,
                          WaveletFamily family, double sample_rate_hz, long cycle_index) {
    if (bands.empty()) throw Error("band_select: empty band selection");
    const int levels = static_cast<int>(coeffs.details.size());
    for (int b : bands) {
        if (b < 0 || b > levels) {
            throw Error("band_select: band " + std::to_string(b) +
                        " outside 0.." + std::to_string(levels));
        }
    }

    WaveletCoeffs kept = coeffs;
    if (bands.count(0) == 0) {
        std::fill(kept.approx.begin(), kept.approx.end(), 0.0);
    }
    for (int lvl = 1; lvl <= levels; ++lvl) {
        if (bands.count(lvl) == 0) {
            auto& band = kept.details[static_cast<std::size_t>(lvl - 1)];
            std::fill(band.begin(), band.end(), 0.0);
        }
    }

    SignalSegment out;
    out.sample_rate_hz = sample_rate_hz;
    out.cycle_index = cycle_index;
    out.samples = idwt(kept, family);
    return out;
}

SignalSegment tkeo(const SignalSegment& seg) {
    validate(seg);
    const std::size_t n = seg.samples.size();
    SignalSegment out;
    out.sample_rate_hz = seg.sample_rate_hz;
    out.cycle_index = seg.cycle_index;
    out.samples.resize(n);
    const auto& x = seg.samples;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out.samples[i] = x[i] * x[i] - x[i - 1] * x[i + 1];
    }
    out.samples[0] = out.samples[1];
    out.samples[n - 1] = out.samples[n - 2];
    return out;
}

HadamardCaputoPlan::HadamardCaputoPlan(std::size_t n, double beta, FractionalNorm norm,
                                       std::size_t memory_window)
    : n_(n), beta_(beta), norm_(norm) {
    if (n < 2) throw Error("HadamardCaputoPlan: need at least 2 samples");
    if (!(beta > 0.0 && beta < 1.0)) {
        throw Error("HadamardCaputoPlan: beta must lie in (0,1), got " + std::to_string(beta));
    }
    window_ = (memory_window == 0) ? n : std::min(memory_window, n);
    if (window_ < 1) throw Error("HadamardCaputoPlan: memory window must be >= 1");

    // Triangle storage is ~4 MB at n=1024 and ~67 MB at n=4096. Beyond a few
    // hundred MB fall back to recomputing weights per row.
    std::uint64_t total = 0;
    for (std::size_t row = 0; row < n_; ++row) total += std::min(row + 1, window_);
    precomputed_ = total * sizeof(double) <= (std::uint64_t{1} << 28);
    if (!precomputed_) return;

    offsets_.resize(n_);
    scale_.resize(n_);
    weights_.resize(total);
    std::size_t at = 0;
    for (std::size_t row = 0; row < n_; ++row) {
        offsets_[row] = at;
        fill_row(row, weights_.data() + at, &scale_[row]);
        at += row + 1 - first_k(row);
    }
}

void HadamardCaputoPlan::fill_row(std::size_t row, double* w, double* scale) const {
    const double inv_gamma = 1.0 / std::tgamma(beta_);
    const double inv_gamma1 = 1.0 / std::tgamma(beta_ + 1.0);
    const std::size_t first = first_k(row);
    const double tn = static_cast<double>(row + 1);
    std::size_t j = 0;
    for (std::size_t k = first; k < row; ++k, ++j) {
        const double log_ratio = std::log(tn / static_cast<double>(k + 1));
        const double cell = std::log1p(1.0 / static_cast<double>(k + 1));
        w[j] = inv_gamma * std::pow(log_ratio, beta_ - 1.0) * cell;
    }
    w[j] = inv_gamma1 * std::pow(std::log1p(1.0 / tn), beta_);

    if (norm_ == FractionalNorm::unit_dc_gain) {
        double sum = 0.0;
        for (std::size_t i = 0; i <= j; ++i) sum += w[i];
        *scale = 1.0 / sum;
    } else {
        *scale = 1.0;
    }
}

double HadamardCaputoPlan::row_dot(std::span<const double> in, std::size_t row) const {
    const std::size_t first = first_k(row);
    const std::size_t len = row + 1 - first;
    double acc = 0.0;
    if (precomputed_) {
        const double* w = weights_.data() + offsets_[row];
        for (std::size_t j = 0; j < len; ++j) acc += w[j] * in[first + j];
        return acc * scale_[row];
    }
    std::vector<double> w(len);
    double scale = 1.0;
    fill_row(row, w.data(), &scale);
    for (std::size_t j = 0; j < len; ++j) acc += w[j] * in[first + j];
    return acc * scale;
}

void HadamardCaputoPlan::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != n_ || out.size() != n_) {
        throw Error("HadamardCaputoPlan::apply: size mismatch (plan " + std::to_string(n_) +
                    ", input " + std::to_string(in.size()) + ")");
    }
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < n; ++row) {
        out[static_cast<std::size_t>(row)] = row_dot(in, static_cast<std::size_t>(row));
    }
}

void HadamardCaputoPlan::apply_serial(std::span<const double> in, std::span<double> out) const {
    if (in.size() != n_ || out.size() != n_) {
        throw Error("HadamardCaputoPlan::apply_serial: size mismatch (plan " +
                    std::to_string(n_) + ", input " + std::to_string(in.size()) + ")");
    }
    for (std::size_t row = 0; row < n_; ++row) out[row] = row_dot(in, row);
}

SignalSegment hadamard_caputo(const SignalSegment& seg, double beta, FractionalNorm norm,
                              std::size_t memory_window) {
    validate(seg);
    HadamardCaputoPlan plan(seg.samples.size(), beta, norm, memory_window);
    SignalSegment out;
    out.sample_rate_hz = seg.sample_rate_hz;
    out.cycle_index = seg.cycle_index;
    out.samples.resize(seg.samples.size());
    plan.apply(seg.samples, out.samples);
    return out;
}

SignalSegment ldme_operator(const SignalSegment& seg, const DenoiseConfig& dcfg,
                            const EnhanceConfig& ecfg) {
    return ldme_operator(seg, dcfg, ecfg, StageMask{}, nullptr, nullptr);
}

SignalSegment ldme_operator(const SignalSegment& seg, const DenoiseConfig& dcfg,
                            const EnhanceConfig& ecfg, const StageMask& mask,
                            const HadamardCaputoPlan* plan,
                            SignalSegment* reconstruction_out) {
    validate(seg);
    dcfg.validate();
    ecfg.validate();

    SignalSegment y_w = mask.wavelet_path ? wavelet_denoise(seg, dcfg) : seg;
    SignalSegment y_sg = mask.sg_path
                             ? sg_filter(seg, dcfg.sg_half_window, dcfg.sg_poly_order)
                             : seg;
    SegmentStats stats;
    if (dcfg.fusion_mode == FusionMode::adaptive) stats = compute_segment_stats(seg);
    SignalSegment x = fuse(y_w, y_sg, dcfg, stats);

    if (mask.band_select) {
        const int levels = dcfg.resolve_levels(x.samples.size());
        for (int b : ecfg.band_selection) {
            if (b > levels) {
                throw Error("ldme_operator: band_selection level " + std::to_string(b) +
                            " exceeds decomposition depth " + std::to_string(levels));
            }
        }
        WaveletCoeffs coeffs = dwt(x.samples, dcfg.wavelet_family, levels);
        x = band_select(coeffs, ecfg.band_selection, dcfg.wavelet_family,
                        x.sample_rate_hz, x.cycle_index);
    }
    if (reconstruction_out != nullptr) *reconstruction_out = x;
    if (ecfg.tkeo_enabled && mask.tkeo) {
        x = tkeo(x);
    }
    if (mask.fractional) {
        if (plan != nullptr) {
            if (plan->size() != x.samples.size() || plan->beta() != ecfg.beta ||
                plan->normalization() != ecfg.fractional_normalization) {
                throw Error("ldme_operator: fractional plan does not match the enhance config");
            }
            SignalSegment u;
            u.sample_rate_hz = x.sample_rate_hz;
            u.cycle_index = x.cycle_index;
            u.samples.resize(x.samples.size());
            plan->apply(x.samples, u.samples);
            x = std::move(u);
        } else {
            x = hadamard_caputo(x, ecfg.beta, ecfg.fractional_normalization,
                                ecfg.memory_window);
        }
    }
    return x;
}

}  // namespace ldme
