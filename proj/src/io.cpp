#include "ldme/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>

namespace ldme {

namespace fs = std::filesystem;

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                    ec.message());
    }
}

namespace {

std::string cycle_file_name(long cycle) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cycle_%04ld.csv", cycle);
    return buf;
}

std::string render_cycle_csv(const SignalSegment& seg) {
    std::string out;
    out.reserve(seg.samples.size() * 26 + 64);
    out += "# fs_hz=" + fmt_g17(seg.sample_rate_hz) + "\n";
    out += "# cycle=" + std::to_string(seg.cycle_index) + "\n";
    for (double v : seg.samples) {
        out += fmt_g17(v);
        out += '\n';
    }
    return out;
}

// Parses a cycle CSV: '# key=value' headers then one sample per line.
SignalSegment parse_cycle_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    SignalSegment seg;
    bool have_fs = false;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
            const std::string value = line.substr(eq + 1);
            if (key == "fs_hz") {
                seg.sample_rate_hz = std::strtod(value.c_str(), nullptr);
                have_fs = true;
            } else if (key == "cycle") {
                seg.cycle_index = std::strtol(value.c_str(), nullptr, 10);
            }
            continue;
        }
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || (end != nullptr && *end != '\0' && *end != ',')) {
            throw Error(file.string() + ": row " + std::to_string(row) +
                        ": unparseable sample '" + line + "'");
        }
        if (!std::isfinite(v)) {
            throw Error(file.string() + ": row " + std::to_string(row) +
                        ": non-finite sample");
        }
        seg.samples.push_back(v);
    }
    if (!have_fs) {
        throw Error(file.string() + ": missing '# fs_hz=' header line");
    }
    return seg;
}

CycleSeries ingest_csv_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error("ingest: " + dir.string() + " is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("cycle_", 0) == 0 && name.size() > 4 &&
            name.compare(name.size() - 4, 4, ".csv") == 0) {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw Error("ingest: no cycle files in " + dir.string() +
                    "; expected layout: cycle_0001.csv, cycle_0002.csv, ... "
                    "(one sample per line, '# fs_hz=' header) plus optional manifest.json");
    }
    std::sort(files.begin(), files.end());

    CycleSeries series;
    series.cycles.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        SignalSegment seg = parse_cycle_csv(files[i]);
        if (seg.cycle_index == 0) seg.cycle_index = static_cast<long>(i) + 1;
        if (!series.cycles.empty()) {
            if (seg.samples.size() != series.cycles.front().samples.size()) {
                throw Error("ingest: " + files[i].string() + " has " +
                            std::to_string(seg.samples.size()) + " samples but " +
                            files.front().string() + " has " +
                            std::to_string(series.cycles.front().samples.size()));
            }
            if (seg.sample_rate_hz != series.cycles.front().sample_rate_hz) {
                throw Error("ingest: " + files[i].string() + " sample rate differs from " +
                            files.front().string());
            }
        }
        try {
            validate(seg);
        } catch (const Error& e) {
            throw Error("ingest: " + files[i].string() + ": " + e.what());
        }
        series.cycles.push_back(std::move(seg));
    }

    const fs::path manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        if (!in) throw Error("cannot open " + manifest_path.string());
        try {
            in >> series.manifest;
        } catch (const std::exception& e) {
            throw Error(manifest_path.string() + ": " + e.what());
        }
        if (series.manifest.contains("labels")) {
            const auto& labels = series.manifest.at("labels");
            if (labels.size() != series.cycles.size()) {
                throw Error(manifest_path.string() + ": manifest lists " +
                            std::to_string(labels.size()) + " labels for " +
                            std::to_string(series.cycles.size()) + " cycles");
            }
            series.labels.reserve(labels.size());
            for (const auto& l : labels) series.labels.push_back(l.get<int>());
        }
    }
    return series;
}

std::map<std::string, std::string> read_meta_file(const fs::path& meta) {
    std::ifstream in(meta);
    if (!in) {
        throw Error("ingest: missing metadata sidecar " + meta.string() +
                    " (expected key=value lines: sample_rate_hz, samples_per_cycle, n_cycles)");
    }
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(meta.string() + ": malformed line '" + line + "'");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto strip = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
        };
        strip(key);
        strip(value);
        kv[key] = value;
    }
    return kv;
}

template <typename Float>
CycleSeries ingest_raw(const fs::path& path) {
    const auto kv = read_meta_file(fs::path(path.string() + ".meta"));
    const auto need = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw Error("ingest: " + path.string() + ".meta is missing key '" + key + "'");
        }
        return it->second;
    };
    const double fs_hz = std::strtod(need("sample_rate_hz").c_str(), nullptr);
    const long spc = std::strtol(need("samples_per_cycle").c_str(), nullptr, 10);
    const long n_cycles = std::strtol(need("n_cycles").c_str(), nullptr, 10);
    if (fs_hz <= 0.0 || spc < 8 || n_cycles < 1) {
        throw Error("ingest: invalid metadata in " + path.string() + ".meta");
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("ingest: cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);
    const std::uint64_t expected =
        static_cast<std::uint64_t>(spc) * static_cast<std::uint64_t>(n_cycles) * sizeof(Float);
    if (size != expected) {
        throw Error("ingest: " + path.string() + " holds " + std::to_string(size) +
                    " bytes; metadata implies " + std::to_string(expected));
    }

    CycleSeries series;
    series.cycles.resize(static_cast<std::size_t>(n_cycles));
    std::vector<Float> buf(static_cast<std::size_t>(spc));
    for (long c = 0; c < n_cycles; ++c) {
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(Float)));
        if (!in) throw Error("ingest: short read from " + path.string());
        SignalSegment& seg = series.cycles[static_cast<std::size_t>(c)];
        seg.sample_rate_hz = fs_hz;
        seg.cycle_index = c + 1;
        seg.samples.resize(buf.size());
        for (std::size_t j = 0; j < buf.size(); ++j) {
            const double v = static_cast<double>(buf[j]);
            if (!std::isfinite(v)) {
                throw Error("ingest: " + path.string() + ": cycle " + std::to_string(c + 1) +
                            " sample " + std::to_string(j) + " is non-finite");
            }
            seg.samples[j] = v;
        }
        validate(seg);
    }
    return series;
}

}  // namespace

void write_dataset(const Dataset& ds, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    for (std::size_t i = 0; i < ds.cycles.size(); ++i) {
        const long cycle = static_cast<long>(i) + 1;
        write_text_atomic(dir / cycle_file_name(cycle), render_cycle_csv(ds.cycles[i]));
    }

    nlohmann::json manifest;
    manifest["seed"] = ds.config.seed;
    manifest["c_0"] = ds.config.crack_onset_cycle;
    manifest["labels"] = ds.labels;
    manifest["amplitude_schedule"] = ds.amplitude_schedule;
    manifest["config"] = simulator_to_json(ds.config);
    write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

CycleSeries ingest(const fs::path& path, const std::string& format) {
    if (!fs::exists(path)) throw Error("ingest: " + path.string() + " does not exist");
    if (format == "csv_dir") return ingest_csv_dir(path);
    if (format == "raw_f32") return ingest_raw<float>(path);
    if (format == "raw_f64") return ingest_raw<double>(path);
    throw Error("ingest: unknown format '" + format + "' (expected csv_dir, raw_f32, raw_f64)");
}

SingleColumn read_single_column(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    SingleColumn col;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
                if (key == "fs_hz") col.fs_hz = std::strtod(line.c_str() + eq + 1, nullptr);
            }
            continue;
        }
        // take the first comma-separated field; skip a textual header row
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) {
            if (row == 1) continue;
            throw Error(path.string() + ": row " + std::to_string(row) +
                        ": unparseable value '" + line + "'");
        }
        if (!std::isfinite(v)) {
            throw Error(path.string() + ": row " + std::to_string(row) + ": non-finite value");
        }
        col.samples.push_back(v);
    }
    if (col.samples.empty()) throw Error(path.string() + ": no samples found");
    return col;
}

nlohmann::json simulator_to_json(const SimulatorConfig& cfg) {
    nlohmann::json j;
    j["n_cycles"] = cfg.n_cycles;
    j["samples_per_cycle"] = cfg.samples_per_cycle;
    j["sample_rate_hz"] = cfg.sample_rate_hz;
    j["mesh_fund_hz"] = cfg.mesh_fund_hz;
    nlohmann::json harmonics = nlohmann::json::array();
    for (const MeshHarmonic& h : cfg.mesh_harmonics) {
        harmonics.push_back({{"order", h.order},
                             {"amplitude", h.amplitude},
                             {"phase", h.phase}});
    }
    j["mesh_harmonics"] = std::move(harmonics);
    j["crack_onset_cycle"] = cfg.crack_onset_cycle;
    j["crack_growth"] = cfg.crack_growth;
    j["impulse_resonance_hz"] = cfg.impulse_resonance_hz;
    j["impulse_damping"] = cfg.impulse_damping;
    j["impulse_repetition_hz"] = cfg.impulse_repetition_hz;
    j["snr_db"] = cfg.snr_db;
    j["ar1_coefficient"] = cfg.ar1_coefficient;
    j["seed"] = cfg.seed;
    return j;
}

SimulatorConfig simulator_from_json(const nlohmann::json& j) {
    SimulatorConfig cfg;
    cfg.n_cycles = j.at("n_cycles").get<long>();
    cfg.samples_per_cycle = j.at("samples_per_cycle").get<std::size_t>();
    cfg.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    cfg.mesh_fund_hz = j.at("mesh_fund_hz").get<double>();
    cfg.mesh_harmonics.clear();
    for (const auto& h : j.at("mesh_harmonics")) {
        cfg.mesh_harmonics.push_back({h.at("order").get<int>(),
                                      h.at("amplitude").get<double>(),
                                      h.at("phase").get<double>()});
    }
    cfg.crack_onset_cycle = j.at("crack_onset_cycle").get<long>();
    cfg.crack_growth = j.at("crack_growth").get<double>();
    cfg.impulse_resonance_hz = j.at("impulse_resonance_hz").get<double>();
    cfg.impulse_damping = j.at("impulse_damping").get<double>();
    cfg.impulse_repetition_hz = j.at("impulse_repetition_hz").get<double>();
    cfg.snr_db = j.at("snr_db").get<double>();
    cfg.ar1_coefficient = j.at("ar1_coefficient").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

std::string spectrum_csv(const Spectrum& spec) {
    std::string out = "frequency_hz,magnitude\n";
    for (std::size_t i = 0; i < spec.magnitudes.size(); ++i) {
        out += fmt_g17(static_cast<double>(i) * spec.bin_hz);
        out += ',';
        out += fmt_g17(spec.magnitudes[i]);
        out += '\n';
    }
    return out;
}

}  // namespace ldme
