#pragma once

#include <map>
#include <span>
#include <string>

#include "ldme/core_dsp.hpp"
#include "ldme/signal.hpp"

namespace ldme {

struct KinematicsSpec {
    int n_tooth = 8;
    double fund_hz = 29.296875;   // fundamental used for the CI harmonic comb
    double shaft_hz = 29.296875;  // shaft rotation rate
    std::map<std::string, double> char_coeffs = {
        {"BPFI", 5.415}, {"BSF", 4.714}, {"BPFO", 3.585}};
    int planet_count = 3;  // used by the PLANET-TSA baseline only

    void validate() const;
    double characteristic_hz(const std::string& fault_type) const;
};

struct CiRecord {
    long cycle_index = 0;
    double ci1 = 0.0;
    double ci2 = 0.0;
    double cci = 0.0;
};

// Mean of the most recent `averages` segments (fewer if history is shorter),
// then the analytic envelope of the average.
SignalSegment ht_tsa(std::span<const SignalSegment> history, int averages);

// fft_magnitude of the mean-removed, RMS-normalized TSA output.
Spectrum cycle_spectrum(const SignalSegment& tsa_out);

// CI1 sums harmonic magnitudes k*fund_hz for k = 1..2*n_tooth, each read as
// the max within +-1 bin; CI2 normalizes by the total magnitude sum (DC
// excluded); CCI is their mean.
CiRecord compute_ci(const Spectrum& spec, const KinematicsSpec& kin, long cycle_index = 0);

// Pure gain 1 + gamma*max(0, cci/reference - 1); no spectral shaping.
SignalSegment adaptive_modulation(const SignalSegment& seg, double cci,
                                  double reference_cci, double gamma = 1.0);

}  // namespace ldme
