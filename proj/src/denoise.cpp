#include "ldme/denoise.hpp"

#include <algorithm>
#include <cmath>

#include "ldme/core_dsp.hpp"
#include "ldme/fft.hpp"

namespace ldme {

void DenoiseConfig::validate() const {
    if (sg_half_window < 1) throw Error("DenoiseConfig: sg_half_window must be >= 1");
    if (sg_poly_order < 0) throw Error("DenoiseConfig: sg_poly_order must be >= 0");
    if (2 * sg_half_window + 1 <= sg_poly_order) {
        throw Error("DenoiseConfig: SG window 2m+1 must exceed the polynomial order");
    }
    if (decomposition_levels < 0) throw Error("DenoiseConfig: decomposition_levels must be >= 0");
    if (fusion_mode == FusionMode::fixed) {
        const double s = fixed_weights[0] + fixed_weights[1];
        if (std::abs(s - 2.0) > 1e-12) {
            throw Error("DenoiseConfig: fixed fusion weights must sum to 2.0");
        }
    }
}

int DenoiseConfig::resolve_levels(std::size_t n) const {
    int log2n = 0;
    while ((std::size_t{1} << (log2n + 1)) <= n) ++log2n;
    if (decomposition_levels == 0) {
        const int auto_levels = std::min(5, log2n - 3);
        if (auto_levels < 1) {
            throw Error("DenoiseConfig: signal too short (" + std::to_string(n) +
                        " samples) for automatic level selection");
        }
        return auto_levels;
    }
    if (decomposition_levels > log2n - 2) {
        throw Error("DenoiseConfig: decomposition_levels " + std::to_string(decomposition_levels) +
                    " exceeds floor(log2 N) - 2 for N = " + std::to_string(n));
    }
    return decomposition_levels;
}

double noise_sigma(std::span<const double> detail_level_1) {
    if (detail_level_1.size() < 8) {
        throw Error("noise_sigma: need at least 8 coefficients, got " +
                    std::to_string(detail_level_1.size()));
    }
    std::vector<double> mags(detail_level_1.size());
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(detail_level_1[i]);
    const std::size_t mid = mags.size() / 2;
    std::nth_element(mags.begin(), mags.begin() + mid, mags.end());
    double med = mags[mid];
    if (mags.size() % 2 == 0) {
        const double lower = *std::max_element(mags.begin(), mags.begin() + mid);
        med = 0.5 * (med + lower);
    }
    return med / 0.6745;
}

double universal_threshold(double sigma, std::size_t n) {
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

double apply_threshold(double v, double t, ThresholdMode mode) {
    if (mode == ThresholdMode::hard) {
        return std::abs(v) <= t ? 0.0 : v;
    }
    const double mag = std::abs(v) - t;
    if (mag <= 0.0) return 0.0;
    return v < 0.0 ? -mag : mag;
}

SignalSegment wavelet_denoise(const SignalSegment& seg, const DenoiseConfig& cfg) {
    validate(seg);
    cfg.validate();
    const int levels = cfg.resolve_levels(seg.samples.size());

    WaveletCoeffs coeffs = dwt(seg.samples, cfg.wavelet_family, levels);
    const double sigma = noise_sigma(coeffs.details.front());
    const double t = universal_threshold(sigma, seg.samples.size());
    for (auto& band : coeffs.details) {
        for (double& v : band) v = apply_threshold(v, t, cfg.threshold_mode);
    }

    SignalSegment out;
    out.sample_rate_hz = seg.sample_rate_hz;
    out.cycle_index = seg.cycle_index;
    out.samples = idwt(coeffs, cfg.wavelet_family);
    return out;
}

std::vector<double> sg_coefficients(int half_window, int poly_order) {
    const int m = half_window;
    const int p = poly_order;
    if (m < 1 || p < 0 || 2 * m + 1 <= p) {
        throw Error("sg_coefficients: require window 2m+1 > polynomial order");
    }

    // Normal equations M z = e0 with M[q][r] = sum_j j^(q+r), j = -m..m.
    const int dim = p + 1;
    std::vector<double> moments(2 * p + 1, 0.0);
    for (int j = -m; j <= m; ++j) {
        double pw = 1.0;
        for (int q = 0; q <= 2 * p; ++q) {
            moments[q] += pw;
            pw *= j;
        }
    }
    std::vector<std::vector<double>> mat(dim, std::vector<double>(dim + 1, 0.0));
    for (int q = 0; q < dim; ++q) {
        for (int r = 0; r < dim; ++r) mat[q][r] = moments[q + r];
        mat[q][dim] = (q == 0) ? 1.0 : 0.0;
    }
    // Gaussian elimination with partial pivoting; the design is full rank
    // whenever 2m+1 > p.
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int row = col + 1; row < dim; ++row) {
            if (std::abs(mat[row][col]) > std::abs(mat[pivot][col])) pivot = row;
        }
        std::swap(mat[col], mat[pivot]);
        if (mat[col][col] == 0.0) throw Error("sg_coefficients: singular normal equations");
        for (int row = 0; row < dim; ++row) {
            if (row == col) continue;
            const double factor = mat[row][col] / mat[col][col];
            for (int c = col; c <= dim; ++c) mat[row][c] -= factor * mat[col][c];
        }
    }
    std::vector<double> z(dim);
    for (int q = 0; q < dim; ++q) z[q] = mat[q][dim] / mat[q][q];

    std::vector<double> kernel(2 * m + 1, 0.0);
    for (int j = -m; j <= m; ++j) {
        double pw = 1.0;
        double w = 0.0;
        for (int q = 0; q < dim; ++q) {
            w += z[q] * pw;
            pw *= j;
        }
        kernel[j + m] = w;
    }
    return kernel;
}

namespace {

// whole-point mirror: ... x[2] x[1] | x[0] x[1] ... x[n-1] | x[n-2] x[n-3] ...
std::size_t mirror_index(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

}  // namespace

SignalSegment sg_filter(const SignalSegment& seg, int half_window, int poly_order) {
    validate(seg);
    const auto kernel = sg_coefficients(half_window, poly_order);
    const long n = static_cast<long>(seg.samples.size());
    const long m = half_window;
    if (n < 2 * m + 1) {
        throw Error("sg_filter: segment shorter than the SG window");
    }

    SignalSegment out;
    out.sample_rate_hz = seg.sample_rate_hz;
    out.cycle_index = seg.cycle_index;
    out.samples.resize(seg.samples.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long j = -m; j <= m; ++j) {
            acc += kernel[j + m] * seg.samples[mirror_index(i + j, n)];
        }
        out.samples[i] = acc;
    }
    return out;
}

SegmentStats compute_segment_stats(const SignalSegment& raw) {
    validate(raw);
    SegmentStats stats;

    const std::size_t n = raw.samples.size();
    const std::size_t win = std::min<std::size_t>(256, n);
    const std::size_t hop = std::max<std::size_t>(1, win / 2);
    double max_kurt = 0.0;
    bool any = false;
    for (std::size_t start = 0; start + win <= n; start += hop) {
        auto k = kurtosis(std::span<const double>(raw.samples).subspan(start, win));
        if (k) {
            max_kurt = any ? std::max(max_kurt, *k) : *k;
            any = true;
        }
        if (start + win == n) break;
    }
    stats.windowed_kurtosis = any ? max_kurt : 3.0;

    try {
        stats.flatness = spectral_flatness(fft_magnitude(raw, fft::next_pow2(n)));
    } catch (const Error&) {
        stats.flatness = 1.0;  // all-zero segment: treat as featureless
    }
    return stats;
}

double fusion_alpha(const SegmentStats& stats, const DenoiseConfig& cfg) {
    const double z = cfg.adaptive_a * (stats.windowed_kurtosis - 3.0) +
                     cfg.adaptive_b * (1.0 - stats.flatness);
    return 1.0 / (1.0 + std::exp(-z));
}

SignalSegment fuse(const SignalSegment& y_wavelet, const SignalSegment& y_sg,
                   const DenoiseConfig& cfg, const SegmentStats& stats) {
    if (y_wavelet.samples.size() != y_sg.samples.size()) {
        throw Error("fuse: path outputs differ in length (" +
                    std::to_string(y_wavelet.samples.size()) + " vs " +
                    std::to_string(y_sg.samples.size()) + ")");
    }
    cfg.validate();

    double ww;
    double ws;
    if (cfg.fusion_mode == FusionMode::fixed) {
        ww = cfg.fixed_weights[0] / 2.0;
        ws = cfg.fixed_weights[1] / 2.0;
    } else {
        const double alpha = fusion_alpha(stats, cfg);
        ww = alpha;
        ws = 1.0 - alpha;
    }

    SignalSegment out;
    out.sample_rate_hz = y_wavelet.sample_rate_hz;
    out.cycle_index = y_wavelet.cycle_index;
    out.samples.resize(y_wavelet.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = ww * y_wavelet.samples[i] + ws * y_sg.samples[i];
    }
    return out;
}

}  // namespace ldme
