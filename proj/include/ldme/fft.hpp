#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ldme::fft {

bool is_pow2(std::size_t n);
std::size_t next_pow2(std::size_t n);

/// In-place radix-2 complex transform. `n` must be a power of two.
/// Inverse applies the 1/n scale, so inverse(forward(x)) == x.
void transform_pow2(std::vector<std::complex<double>>& a, bool inverse);

/// DFT of arbitrary length (Bluestein chirp-z for non power-of-two sizes).
/// Same inverse convention as transform_pow2.
std::vector<std::complex<double>> dft(std::span<const std::complex<double>> x, bool inverse);

}  // namespace ldme::fft
