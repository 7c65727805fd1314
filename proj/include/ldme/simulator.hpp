#pragma once

#include <cstdint>
#include <vector>

#include "ldme/signal.hpp"

namespace ldme {

struct MeshHarmonic {
    int order = 1;
    double amplitude = 0.0;
    double phase = 0.0;
};

// Synthetic gearbox cycle: mesh harmonics + growing damped-resonance impulse
// train + AR(1) noise. Defaults put the mesh harmonics and the impulse
// repetition exactly on FFT bins (4096 samples at 12 kHz = 10 shaft
// revolutions at 29.296875 Hz).
struct SimulatorConfig {
    long n_cycles = 500;                   // C
    std::size_t samples_per_cycle = 4096;  // N
    double sample_rate_hz = 12000.0;
    double mesh_fund_hz = 234.375;  // 8 teeth x 29.296875 Hz shaft
    std::vector<MeshHarmonic> mesh_harmonics = {
        {1, 1.0, 0.0}, {2, 0.5, 0.0}, {3, 0.25, 0.0}};
    long crack_onset_cycle = 250;  // c_0
    double crack_growth = 0.1;     // g: impulse amplitude per cycle past onset
    double impulse_resonance_hz = 2000.0;
    double impulse_damping = 0.02;  // zeta
    double impulse_repetition_hz = 29.296875;
    double snr_db = 0.0;           // vs the deterministic part at c = C
    double ar1_coefficient = 0.0;  // rho; 0 = white, raise for colored noise
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimulatedCycle {
    SignalSegment segment;
    bool faulty = false;
};

struct Dataset {
    SimulatorConfig config;
    std::vector<SignalSegment> cycles;       // cycle c at index c-1
    std::vector<int> labels;                 // 0 healthy, 1 faulty
    std::vector<double> amplitude_schedule;  // A(c)
};

// A(c) = crack_growth * max(0, c - crack_onset_cycle).
double crack_amplitude(const SimulatorConfig& cfg, long cycle);

// Unit-amplitude impulse train p[n] for one cycle: damped sinusoids
// exp(-zeta*2*pi*f_res*t) * sin(2*pi*f_res*t) repeating at repetition_hz.
std::vector<double> impulse_train(const SimulatorConfig& cfg);

// Noise-free part of cycle c: mesh harmonics + A(c) * p.
std::vector<double> deterministic_part(const SimulatorConfig& cfg, long cycle);

// Deterministic for fixed (config, cycle): noise comes from a per-cycle
// substream, so cycles can be generated independently and in parallel.
SimulatedCycle generate_cycle(const SimulatorConfig& cfg, long cycle);

Dataset generate_dataset(const SimulatorConfig& cfg);

}  // namespace ldme
