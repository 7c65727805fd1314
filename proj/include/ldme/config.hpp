#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "ldme/anomaly.hpp"
#include "ldme/denoise.hpp"
#include "ldme/enhance.hpp"
#include "ldme/indicators.hpp"
#include "ldme/simulator.hpp"

namespace ldme {

struct BenchSettings {
    int ht_averages = 1;      // TSA depth of the HT-TSA baseline
    int planet_averages = 1;  // per-phase-class depth of the PLANET baseline
};

struct PipelineConfig {
    DenoiseConfig denoise;
    EnhanceConfig enhance;
    KinematicsSpec kinematics;
    DetectorConfig detector;
    SimulatorConfig simulator;
    int averages = 1;               // HT-TSA depth inside the LDME pipeline
    double modulation_gamma = 1.0;  // adaptive-modulation gain slope
    bool emit_reconstruction = false;
    int threads = 0;  // 0 = leave the OpenMP default alone
    BenchSettings bench;

    void validate() const;
};

// TOML-style subset: [section] headers, key = value, '#' comments, strings in
// double quotes, booleans, numbers, single-line arrays. Unknown keys are
// rejected with the offending name and line.
PipelineConfig parse_config(const std::string& text, const std::string& origin);
PipelineConfig load_config(const std::filesystem::path& path);

// Full config echo embedded in reports so runs can be reproduced exactly.
nlohmann::json config_echo(const PipelineConfig& cfg);

}  // namespace ldme
