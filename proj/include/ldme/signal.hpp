#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldme {

/// Raised for any contract violation (bad input, bad config, I/O failure).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// One cycle-synchronous vibration record.
struct SignalSegment {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
    long cycle_index = 0;
};

/// One-sided magnitude spectrum.
struct Spectrum {
    double bin_hz = 0.0;
    std::vector<double> magnitudes;  // size = n_fft/2 + 1
    std::size_t n_fft = 0;

    double max_frequency_hz() const {
        return magnitudes.empty() ? 0.0 : bin_hz * static_cast<double>(magnitudes.size() - 1);
    }
};

/// Throws Error unless the segment satisfies its invariants
/// (length >= 8, positive sample rate, all samples finite).
void validate(const SignalSegment& seg);

/// Throws Error if any value is non-finite. `context` names the data source.
void require_finite(std::span<const double> x, const std::string& context);

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // population (1/N), mean removed
double rms(std::span<const double> x);
double energy(std::span<const double> x);    // sum of squares

}  // namespace ldme
