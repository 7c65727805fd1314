#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "ldme/signal.hpp"

namespace ldme {

/// One-sided magnitude spectrum of the zero-padded segment.
/// n_fft must be a power of two and >= segment length.
Spectrum fft_magnitude(const SignalSegment& seg, std::size_t n_fft);

/// Magnitude of the analytic signal |x + i*Hilbert(x)|, computed by the
/// one-sided spectrum construction (zero negative frequencies, double
/// positive, keep DC and Nyquist). Exact-length DFT, so the input need not
/// be a power of two. Output has the same length as the input.
SignalSegment analytic_envelope(const SignalSegment& seg);

/// fft_magnitude of the mean-removed analytic envelope.
Spectrum envelope_spectrum(const SignalSegment& seg, std::size_t n_fft);

/// Standardized fourth moment m4/m2^2, biased (moment-ratio) estimator.
/// Returns nullopt for a degenerate (zero-variance) window.
/// Throws for windows shorter than 4 samples.
std::optional<double> kurtosis(std::span<const double> window);

/// Geometric mean / arithmetic mean of power (magnitude^2), in [0, 1].
/// Power is normalized by its maximum before a 1e-30 floor is applied to
/// zero bins, which keeps the measure scale invariant. Throws on an
/// all-zero spectrum.
double spectral_flatness(const Spectrum& spec);

}  // namespace ldme
