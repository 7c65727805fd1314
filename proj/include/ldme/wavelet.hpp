#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ldme {

enum class WaveletFamily { sym4, sym8, db4 };

WaveletFamily wavelet_family_from_string(const std::string& name);
std::string to_string(WaveletFamily family);

/// Decomposition filter length of the family.
std::size_t wavelet_filter_length(WaveletFamily family);

/// Result of a Mallat cascade. details[0] is level 1 (finest band),
/// details[L-1] is level L (coarsest detail). approx is the level-L
/// approximation band.
struct WaveletCoeffs {
    std::vector<double> approx;
    std::vector<std::vector<double>> details;

    std::size_t levels() const { return details.size(); }
    std::size_t signal_length() const;
};

/// Multi-level DWT with periodic boundary extension. The signal length must
/// be divisible by 2 at every level and each working length must be at least
/// the filter length. Orthogonal filters, so the transform preserves energy
/// and idwt(dwt(x)) reconstructs x exactly.
WaveletCoeffs dwt(std::span<const double> x, WaveletFamily family, int levels);

std::vector<double> idwt(const WaveletCoeffs& coeffs, WaveletFamily family);

/// Largest level count dwt() accepts for a signal of length n.
int max_dwt_levels(std::size_t n, WaveletFamily family);

}  // namespace ldme
