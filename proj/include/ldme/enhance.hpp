#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "ldme/denoise.hpp"
#include "ldme/signal.hpp"
#include "ldme/wavelet.hpp"

namespace ldme {

enum class FractionalNorm { unit_dc_gain, none };

struct EnhanceConfig {
    double beta = 0.5;  // fractional order, must stay in (0,1)
    bool tkeo_enabled = true;
    // Detail levels kept by W(.); 1 = finest. The approximation band is
    // always dropped inside the pipeline.
    std::set<int> band_selection = {1, 2};
    FractionalNorm fractional_normalization = FractionalNorm::unit_dc_gain;
    // Samples of fractional memory; 0 = full history. A finite window keeps
    // the normalized kernel identical for every sample past the window, so
    // spectral lines stay sharp instead of smearing as the memory grows.
    std::size_t memory_window = 512;

    void validate() const;
};

// W(.): reconstruct from a subset of bands. Band 0 is the approximation,
// bands 1..L are detail levels (1 = finest). Unselected bands are zeroed.
SignalSegment band_select(const WaveletCoeffs& coeffs, const std::set<int>& bands,
                          WaveletFamily family, double sample_rate_hz,
                          long cycle_index = 0);

// Psi[x](n) = x(n)^2 - x(n-1) x(n+1); endpoints replicated from the nearest
// interior value so the output keeps the input length.
SignalSegment tkeo(const SignalSegment& seg);

// Discrete Hadamard fractional integral on the shifted grid t_k = k+1:
//   u[n] = (1/G(b)) sum_{k<n} (ln(t_n/t_k))^(b-1) x[k] ln(t_{k+1}/t_k)
//        + (1/G(b+1)) (ln(t_{n+1}/t_n))^b x[n]
// With unit_dc_gain each u[n] is scaled so a constant input is preserved.
// The plan precomputes the weight triangle once so repeated applications at
// a fixed length are plain dot products (the O(N^2) hot path).
class HadamardCaputoPlan {
public:
    HadamardCaputoPlan(std::size_t n, double beta, FractionalNorm norm,
                       std::size_t memory_window = 0);

    std::size_t size() const { return n_; }
    std::size_t window() const { return window_; }
    double beta() const { return beta_; }
    FractionalNorm normalization() const { return norm_; }

    // Parallel over output samples (OpenMP); bit-identical to apply_serial
    // because each output is an independent dot product in fixed k order.
    void apply(std::span<const double> in, std::span<double> out) const;
    // Plain-loop reference implementation kept for tests and benchmarks.
    void apply_serial(std::span<const double> in, std::span<double> out) const;

private:
    std::size_t first_k(std::size_t row) const {
        return row + 1 > window_ ? row + 1 - window_ : 0;
    }
    double row_dot(std::span<const double> in, std::size_t row) const;
    void fill_row(std::size_t row, double* w, double* scale) const;

    std::size_t n_ = 0;
    std::size_t window_ = 0;
    double beta_ = 0.0;
    FractionalNorm norm_ = FractionalNorm::unit_dc_gain;
    bool precomputed_ = false;      // large n falls back to on-the-fly weights
    std::vector<double> weights_;   // rows packed back to back
    std::vector<std::size_t> offsets_;
    std::vector<double> scale_;     // per-row gain (1 or 1/row_sum)
};

SignalSegment hadamard_caputo(const SignalSegment& seg, double beta,
                              FractionalNorm norm = FractionalNorm::unit_dc_gain,
                              std::size_t memory_window = 0);

// Ablation switchboard: a disabled stage becomes the identity.
struct StageMask {
    bool wavelet_path = true;
    bool sg_path = true;
    bool band_select = true;
    bool tkeo = true;
    bool fractional = true;
    bool cci_modulation = true;  // consumed by the pipeline, not by ldme_operator
};

// Full L_LDME[x] = H_beta(Psi_d(W(fused denoise(x)))).
SignalSegment ldme_operator(const SignalSegment& seg, const DenoiseConfig& dcfg,
                            const EnhanceConfig& ecfg);
// Variant with ablation mask and an optional shared fractional plan (must
// match the segment length and the enhance config). When reconstruction_out
// is non-null it receives the waveform-domain signal after band selection,
// before the energy operators.
SignalSegment ldme_operator(const SignalSegment& seg, const DenoiseConfig& dcfg,
                            const EnhanceConfig& ecfg, const StageMask& mask,
                            const HadamardCaputoPlan* plan,
                            SignalSegment* reconstruction_out = nullptr);

}  // namespace ldme
