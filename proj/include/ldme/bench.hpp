#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ldme/pipeline.hpp"

namespace ldme {

struct BenchmarkRun {
    std::string method;
    std::string dataset_id;
    DetectionReport report;
    std::optional<double> snr_enh_db;  // median over faulty cycles; needs ground truth
    double wall_time_s = 0.0;          // informational only, never written to artifacts
    std::vector<std::string> flags;
};

// TSA baselines: raw cycles -> synchronous averaging -> cycle spectrum -> CI
// -> the same detector as the full pipeline. Only the enhancement layer
// differs, which is the point of the comparison.
DetectionReport baseline_ht_tsa(const CycleSeries& series, const KinematicsSpec& kin,
                                const DetectorConfig& detector, int averages = 1);

// HT-TSA restricted to interleaved planet-phase subsets: cycle i averages the
// most recent cycles j <= i with j = i (mod planet_count). planet_count = 1
// reduces to baseline_ht_tsa exactly.
DetectionReport baseline_planet_tsa(const CycleSeries& series, const KinematicsSpec& kin,
                                    const DetectorConfig& detector, int averages = 1);

// SNR(reconstructed) - SNR(raw) in dB, where each SNR comes from least-squares
// projection onto the (mean-removed) fault template: 10*log10(var(projection)
// / var(residual)). Capped to +/-60 dB; exact-recovery residuals hit the +60
// sentinel.
double snr_enhancement(const SignalSegment& raw, const SignalSegment& reconstructed,
                       const SignalSegment& fault_template);

// Stage names accepted by the ablation harness: wavelet_path, sg_path,
// band_select, tkeo, fractional, cci_modulation.
StageMask mask_from_stage_names(const std::set<std::string>& disable);

// One run per disable set, each with the named stages replaced by identity
// pass-throughs. The empty set reproduces the full pipeline bit-exactly.
std::vector<BenchmarkRun> ablation(const CycleSeries& series, const PipelineConfig& cfg,
                                   const std::vector<std::set<std::string>>& disable_sets,
                                   const std::string& dataset_id = "");

// methods: any of ldme, ht_tsa, planet_tsa. SNR enhancement is filled in when
// the series manifest carries the simulator ground truth.
std::vector<BenchmarkRun> run_methods(const CycleSeries& series, const PipelineConfig& cfg,
                                      const std::vector<std::string>& methods,
                                      const std::string& dataset_id = "");

// comparison.csv + comparison.md: method, detection/maintenance cycles,
// % improvement of detection vs the worst run, FAR/AUCs, SNR enhancement.
void write_comparison(const std::vector<BenchmarkRun>& runs,
                      const std::filesystem::path& out_dir);

}  // namespace ldme
