#pragma once

#include <filesystem>

#include "ldme/anomaly.hpp"
#include "ldme/config.hpp"
#include "ldme/enhance.hpp"
#include "ldme/io.hpp"

namespace ldme {

struct PipelineResult {
    DetectionReport report;
    std::vector<CiRecord> ci_records;
    double reference_cci = 0.0;     // median calibration CCI
    Spectrum calibration_spectrum;  // cycle spectrum at the last calibration cycle
    Spectrum final_spectrum;        // cycle spectrum of the last cycle
    std::vector<SignalSegment> reconstructions;  // filled only when requested
};

// Detector pass shared by the pipeline and the bench baselines: calibrate on
// the first H records, score every cycle against the frozen state, run the
// hysteresis over post-calibration cycles, and (when labels are present)
// evaluate FAR/AUCs over the post-calibration cycles at threshold mad_k.
DetectionReport detect_from_records(const std::vector<CiRecord>& records,
                                    const DetectorConfig& cfg,
                                    const std::vector<int>& labels);

// Algorithm 1 over the whole series: per-cycle denoise+enhance and TSA/CI
// extraction run in parallel across cycles; the detector pass is sequential.
PipelineResult run_pipeline(const CycleSeries& series, const PipelineConfig& cfg,
                            const StageMask& mask = {},
                            bool keep_reconstructions = false);

// Plain-loop reference for the parallel phases; output is bit-identical.
PipelineResult run_pipeline_serial(const CycleSeries& series, const PipelineConfig& cfg,
                                   const StageMask& mask = {},
                                   bool keep_reconstructions = false);

// ingest + run + artifacts: ci_trace.csv, scores.csv, report.json, envelope
// plot data, optional per-cycle reconstructions.
DetectionReport run_pipeline_to_dir(const PipelineConfig& cfg,
                                    const std::filesystem::path& data_dir,
                                    const std::string& data_format,
                                    const std::filesystem::path& out_dir);

}  // namespace ldme
