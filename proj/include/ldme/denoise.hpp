#pragma once

#include <array>
#include <span>
#include <vector>

#include "ldme/signal.hpp"
#include "ldme/wavelet.hpp"

namespace ldme {

enum class ThresholdMode { soft, hard };
enum class FusionMode { fixed, adaptive };

struct DenoiseConfig {
    WaveletFamily wavelet_family = WaveletFamily::sym8;
    int decomposition_levels = 0;  // 0 = auto: min(5, floor(log2 N) - 3)
    ThresholdMode threshold_mode = ThresholdMode::soft;
    int sg_half_window = 3;
    int sg_poly_order = 3;
    FusionMode fusion_mode = FusionMode::fixed;
    std::array<double, 2> fixed_weights = {0.4, 1.6};  // (wavelet, SG), fused as sum/2
    // adaptive fusion: alpha = logistic(a*(kurt - 3) + b*(1 - flatness))
    double adaptive_a = 0.5;
    double adaptive_b = 1.0;

    // Throws Error on an invalid field combination.
    void validate() const;

    // Levels actually used for a signal of length n (resolves the auto rule
    // and checks the configured value against the signal).
    int resolve_levels(std::size_t n) const;
};

// Robust noise scale from the finest detail band: median(|d1|) / 0.6745.
double noise_sigma(std::span<const double> detail_level_1);

// Universal threshold sigma * sqrt(2 ln N).
double universal_threshold(double sigma, std::size_t n);

// Soft: shrink toward zero by t. Hard: zero out |v| <= t.
double apply_threshold(double v, double t, ThresholdMode mode);

// DWT -> universal threshold on every detail band (sigma from the finest
// band only) -> reconstruct.
SignalSegment wavelet_denoise(const SignalSegment& seg, const DenoiseConfig& cfg);

// Savitzky-Golay smoothing kernel over offsets -m..m: the central row of
// the least-squares polynomial-fit operator. Symmetric, sums to 1.
std::vector<double> sg_coefficients(int half_window, int poly_order);

// Convolution with sg_coefficients; edges use mirror extension
// (whole-point reflection, x[-k] = x[k]).
SignalSegment sg_filter(const SignalSegment& seg, int half_window, int poly_order);

// Per-segment statistics steering the adaptive fusion weight.
struct SegmentStats {
    double windowed_kurtosis = 3.0;  // max kurtosis over sliding windows
    double flatness = 1.0;           // spectral flatness of the raw segment
};

SegmentStats compute_segment_stats(const SignalSegment& raw);

// Adaptive fusion weight for the wavelet path, in (0, 1).
double fusion_alpha(const SegmentStats& stats, const DenoiseConfig& cfg);

// Fixed mode: (w0*Yw + w1*Ysg) / 2. Adaptive: alpha*Yw + (1-alpha)*Ysg.
SignalSegment fuse(const SignalSegment& y_wavelet, const SignalSegment& y_sg,
                   const DenoiseConfig& cfg, const SegmentStats& stats);

}  // namespace ldme
