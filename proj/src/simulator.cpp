#include "ldme/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace ldme {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t cycle_stream_seed(std::uint64_t seed, long cycle) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= static_cast<std::uint64_t>(cycle) * 0xD1B54A32D192ED03ull;
    return splitmix64(s);
}

// Box-Muller over mt19937_64. Hand-rolled because std::normal_distribution's
// algorithm is implementation-defined and the determinism contract is
// bit-exact across platforms.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = unit(gen_());
        const double u2 = unit(gen_());
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static double unit(std::uint64_t x) {  // (0, 1], so log() is safe
        return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
    }
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

std::vector<double> ar1_noise(const SimulatorConfig& cfg, long cycle) {
    NormalStream rng(cycle_stream_seed(cfg.seed, cycle));
    const double rho = cfg.ar1_coefficient;
    const double drive = std::sqrt(1.0 - rho * rho);  // unit marginal variance
    std::vector<double> w(cfg.samples_per_cycle);
    double state = rng.next();
    w[0] = state;
    for (std::size_t i = 1; i < w.size(); ++i) {
        state = rho * state + drive * rng.next();
        w[i] = state;
    }
    return w;
}

double population_variance(std::span<const double> x) { return variance(x); }

}  // namespace

void SimulatorConfig::validate() const {
    if (n_cycles < 1) throw Error("SimulatorConfig: n_cycles must be >= 1");
    if (samples_per_cycle < 8) throw Error("SimulatorConfig: samples_per_cycle must be >= 8");
    if (!(sample_rate_hz > 0.0)) throw Error("SimulatorConfig: sample_rate_hz must be positive");
    if (crack_onset_cycle < 1 || crack_onset_cycle > n_cycles) {
        throw Error("SimulatorConfig: crack_onset_cycle must lie in 1..n_cycles");
    }
    if (crack_growth < 0.0) throw Error("SimulatorConfig: crack_growth must be >= 0");
    if (!(ar1_coefficient >= 0.0 && ar1_coefficient < 1.0)) {
        throw Error("SimulatorConfig: ar1_coefficient must lie in [0,1)");
    }
    const double nyquist = sample_rate_hz / 2.0;
    if (!(impulse_resonance_hz > 0.0) || impulse_resonance_hz >= nyquist) {
        throw Error("SimulatorConfig: impulse_resonance_hz must lie in (0, Nyquist)");
    }
    if (!(impulse_repetition_hz > 0.0) || impulse_repetition_hz >= nyquist / 4.0) {
        throw Error("SimulatorConfig: impulse_repetition_hz must lie in (0, Nyquist/4)");
    }
    if (!(impulse_damping > 0.0)) throw Error("SimulatorConfig: impulse_damping must be positive");
    if (!(mesh_fund_hz >= 0.0)) throw Error("SimulatorConfig: mesh_fund_hz must be >= 0");
    for (const MeshHarmonic& h : mesh_harmonics) {
        if (h.order < 1) throw Error("SimulatorConfig: mesh harmonic orders must be >= 1");
        if (h.amplitude < 0.0) throw Error("SimulatorConfig: mesh amplitudes must be >= 0");
        if (h.order * mesh_fund_hz >= nyquist) {
            throw Error("SimulatorConfig: mesh harmonic " + std::to_string(h.order) +
                        " x " + std::to_string(mesh_fund_hz) + " Hz is at or above Nyquist");
        }
    }
}

double crack_amplitude(const SimulatorConfig& cfg, long cycle) {
    return cfg.crack_growth * std::max(0.0, static_cast<double>(cycle - cfg.crack_onset_cycle));
}

std::vector<double> impulse_train(const SimulatorConfig& cfg) {
    const std::size_t n = cfg.samples_per_cycle;
    const double fs = cfg.sample_rate_hz;
    const double decay = cfg.impulse_damping * kTwoPi * cfg.impulse_resonance_hz;
    std::vector<double> p(n, 0.0);
    for (long i = 0;; ++i) {
        const double t_i = static_cast<double>(i) / cfg.impulse_repetition_hz;
        auto n0 = static_cast<long>(std::ceil(t_i * fs));
        if (n0 >= static_cast<long>(n)) break;
        if (n0 < 0) n0 = 0;
        for (std::size_t j = static_cast<std::size_t>(n0); j < n; ++j) {
            const double tau = static_cast<double>(j) / fs - t_i;
            const double env = std::exp(-decay * tau);
            if (env < 1e-14) break;
            p[j] += env * std::sin(kTwoPi * cfg.impulse_resonance_hz * tau);
        }
    }
    return p;
}

std::vector<double> deterministic_part(const SimulatorConfig& cfg, long cycle) {
    const std::size_t n = cfg.samples_per_cycle;
    std::vector<double> x(n, 0.0);
    for (const MeshHarmonic& h : cfg.mesh_harmonics) {
        const double w = kTwoPi * static_cast<double>(h.order) * cfg.mesh_fund_hz /
                         cfg.sample_rate_hz;
        for (std::size_t j = 0; j < n; ++j) {
            x[j] += h.amplitude * std::cos(w * static_cast<double>(j) + h.phase);
        }
    }
    const double a = crack_amplitude(cfg, cycle);
    if (a > 0.0) {
        const std::vector<double> p = impulse_train(cfg);
        for (std::size_t j = 0; j < n; ++j) x[j] += a * p[j];
    }
    return x;
}

namespace {

// Noise realization scaled so its measured (sample) variance hits the SNR
// target exactly, referenced against the deterministic part at c = C.
std::vector<double> scaled_noise(const SimulatorConfig& cfg, long cycle) {
    const std::vector<double> det_at_c = deterministic_part(cfg, cfg.n_cycles);
    const double det_var = population_variance(det_at_c);
    if (!(det_var > 0.0)) {
        throw Error("simulator: deterministic part at c = C has zero variance; "
                    "cannot reference the SNR target");
    }
    const double target_var = det_var / std::pow(10.0, cfg.snr_db / 10.0);
    std::vector<double> w = ar1_noise(cfg, cycle);
    const double w_var = population_variance(w);
    if (!(w_var > 0.0)) throw Error("simulator: degenerate noise realization");
    const double scale = std::sqrt(target_var / w_var);
    for (double& v : w) v *= scale;
    return w;
}

}  // namespace

SimulatedCycle generate_cycle(const SimulatorConfig& cfg, long cycle) {
    cfg.validate();
    if (cycle < 1 || cycle > cfg.n_cycles) {
        throw Error("generate_cycle: cycle " + std::to_string(cycle) + " outside 1.." +
                    std::to_string(cfg.n_cycles));
    }
    SimulatedCycle out;
    out.faulty = cycle > cfg.crack_onset_cycle;
    out.segment.sample_rate_hz = cfg.sample_rate_hz;
    out.segment.cycle_index = cycle;
    out.segment.samples = deterministic_part(cfg, cycle);
    const std::vector<double> w = scaled_noise(cfg, cycle);
    for (std::size_t j = 0; j < out.segment.samples.size(); ++j) {
        out.segment.samples[j] += w[j];
    }
    return out;
}

Dataset generate_dataset(const SimulatorConfig& cfg) {
    cfg.validate();
    Dataset ds;
    ds.config = cfg;
    ds.cycles.resize(static_cast<std::size_t>(cfg.n_cycles));
    ds.labels.resize(static_cast<std::size_t>(cfg.n_cycles));
    ds.amplitude_schedule.resize(static_cast<std::size_t>(cfg.n_cycles));

    // Shared deterministic building blocks; per-cycle composition below must
    // match generate_cycle() operation for operation so both paths are
    // bit-identical.
    const std::vector<double> mesh = deterministic_part(cfg, cfg.crack_onset_cycle);
    const std::vector<double> p = impulse_train(cfg);
    const std::vector<double> det_at_c = deterministic_part(cfg, cfg.n_cycles);
    const double det_var = population_variance(det_at_c);
    if (!(det_var > 0.0)) {
        throw Error("simulator: deterministic part at c = C has zero variance; "
                    "cannot reference the SNR target");
    }
    const double target_var = det_var / std::pow(10.0, cfg.snr_db / 10.0);

    const long c_total = cfg.n_cycles;
#pragma omp parallel for schedule(dynamic)
    for (long c = 1; c <= c_total; ++c) {
        const auto idx = static_cast<std::size_t>(c - 1);
        const double a = crack_amplitude(cfg, c);
        SignalSegment seg;
        seg.sample_rate_hz = cfg.sample_rate_hz;
        seg.cycle_index = c;
        seg.samples = mesh;
        if (a > 0.0) {
            for (std::size_t j = 0; j < seg.samples.size(); ++j) seg.samples[j] += a * p[j];
        }
        std::vector<double> w = ar1_noise(cfg, c);
        const double w_var = population_variance(w);
        const double scale = std::sqrt(target_var / w_var);
        for (std::size_t j = 0; j < seg.samples.size(); ++j) {
            seg.samples[j] += w[j] * scale;
        }
        ds.cycles[idx] = std::move(seg);
        ds.labels[idx] = c > cfg.crack_onset_cycle ? 1 : 0;
        ds.amplitude_schedule[idx] = a;
    }
    return ds;
}

}  // namespace ldme
