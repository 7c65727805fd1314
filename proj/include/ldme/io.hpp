#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldme/signal.hpp"
#include "ldme/simulator.hpp"

namespace ldme {

struct CycleSeries {
    std::vector<SignalSegment> cycles;
    std::vector<int> labels;  // empty when ground truth is unknown
    nlohmann::json manifest;  // null when the dataset ships no manifest
};

// 17 significant digits: enough to round-trip binary64 through text.
std::string fmt_g17(double v);

// Write-to-temp + rename so files are either complete or absent.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Dataset directory layout: cycle_%04d.csv (one sample per line, '# key=value'
// header carrying fs and cycle index) plus manifest.json.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

// formats: csv_dir, raw_f32, raw_f64. Raw formats read <path>.meta for
// sample_rate_hz / samples_per_cycle / n_cycles and then the packed
// little-endian samples from <path>.
CycleSeries ingest(const std::filesystem::path& path, const std::string& format);

// Single-column loose CSV used by `envspec`: '#' comment lines and an
// optional non-numeric first header line are skipped; returns samples plus
// the fs from a '# fs_hz=' header when present.
struct SingleColumn {
    std::vector<double> samples;
    std::optional<double> fs_hz;
};
SingleColumn read_single_column(const std::filesystem::path& path);

nlohmann::json simulator_to_json(const SimulatorConfig& cfg);
SimulatorConfig simulator_from_json(const nlohmann::json& j);

// Two-column plot data: "frequency_hz,magnitude" rows at the spectrum's bin
// spacing, 17 significant digits.
std::string spectrum_csv(const Spectrum& spec);

}  // namespace ldme
