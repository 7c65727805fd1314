#include "ldme/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "ldme/io.hpp"

namespace ldme {

void PipelineConfig::validate() const {
    denoise.validate();
    enhance.validate();
    kinematics.validate();
    detector.validate();
    simulator.validate();
    if (averages < 1) throw Error("PipelineConfig: averages must be >= 1");
    if (!(modulation_gamma >= 0.0)) throw Error("PipelineConfig: modulation_gamma must be >= 0");
    if (threads < 0) throw Error("PipelineConfig: threads must be >= 0");
    if (bench.ht_averages < 1) throw Error("PipelineConfig: bench.ht_averages must be >= 1");
    if (bench.planet_averages < 1) {
        throw Error("PipelineConfig: bench.planet_averages must be >= 1");
    }
}

namespace {

struct TomlValue {
    enum class Kind { boolean, number, string, array };
    Kind kind = Kind::number;
    bool b = false;
    double num = 0.0;
    std::string str;
    std::vector<TomlValue> items;
    int line = 0;
};

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

// Removes a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw Error(origin + ":" + std::to_string(line) + ": " + msg);
}

TomlValue parse_scalar(const std::string& raw, const std::string& origin, int line) {
    TomlValue v;
    v.line = line;
    const std::string s = trim(raw);
    if (s.empty()) fail(origin, line, "empty value");
    if (s == "true" || s == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.b = (s == "true");
        return v;
    }
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') fail(origin, line, "unterminated string");
        v.kind = TomlValue::Kind::string;
        std::string out;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\' && i + 2 < s.size() && (s[i + 1] == '"' || s[i + 1] == '\\')) {
                out += s[++i];
            } else {
                out += s[i];
            }
        }
        v.str = out;
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') fail(origin, line, "cannot parse value '" + s + "'");
    v.kind = TomlValue::Kind::number;
    return v;
}

TomlValue parse_value(const std::string& raw, const std::string& origin, int line) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(origin, line, "arrays must close on the same line");
        TomlValue v;
        v.kind = TomlValue::Kind::array;
        v.line = line;
        const std::string body = s.substr(1, s.size() - 2);
        std::string item;
        bool quoted = false;
        for (char ch : body) {
            if (ch == '"') quoted = !quoted;
            if (ch == ',' && !quoted) {
                if (!trim(item).empty()) v.items.push_back(parse_scalar(item, origin, line));
                item.clear();
            } else {
                item += ch;
            }
        }
        if (!trim(item).empty()) v.items.push_back(parse_scalar(item, origin, line));
        return v;
    }
    return parse_scalar(raw, origin, line);
}

bool valid_key_chars(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        if (!ok) return false;
    }
    return true;
}

std::map<std::string, TomlValue> parse_toml_subset(const std::string& text,
                                                   const std::string& origin) {
    std::map<std::string, TomlValue> out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(origin, lineno, "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_key_chars(section)) fail(origin, lineno, "malformed section name");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (!valid_key_chars(key)) fail(origin, lineno, "malformed key '" + key + "'");
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full) != 0) fail(origin, lineno, "duplicate key '" + full + "'");
        out[full] = parse_value(s.substr(eq + 1), origin, lineno);
    }
    return out;
}

long as_int(const TomlValue& v, const std::string& key, const std::string& origin) {
    if (v.kind != TomlValue::Kind::number || std::abs(v.num - std::round(v.num)) > 1e-9) {
        fail(origin, v.line, "key '" + key + "' expects an integer");
    }
    return static_cast<long>(std::llround(v.num));
}

double as_double(const TomlValue& v, const std::string& key, const std::string& origin) {
    if (v.kind != TomlValue::Kind::number) {
        fail(origin, v.line, "key '" + key + "' expects a number");
    }
    return v.num;
}

bool as_bool(const TomlValue& v, const std::string& key, const std::string& origin) {
    if (v.kind != TomlValue::Kind::boolean) {
        fail(origin, v.line, "key '" + key + "' expects true or false");
    }
    return v.b;
}

std::string as_string(const TomlValue& v, const std::string& key, const std::string& origin) {
    if (v.kind != TomlValue::Kind::string) {
        fail(origin, v.line, "key '" + key + "' expects a quoted string");
    }
    return v.str;
}

std::vector<double> as_double_array(const TomlValue& v, const std::string& key,
                                    const std::string& origin) {
    if (v.kind != TomlValue::Kind::array) {
        fail(origin, v.line, "key '" + key + "' expects an array");
    }
    std::vector<double> out;
    for (const TomlValue& item : v.items) out.push_back(as_double(item, key, origin));
    return out;
}

std::vector<long> as_int_array(const TomlValue& v, const std::string& key,
                               const std::string& origin) {
    if (v.kind != TomlValue::Kind::array) {
        fail(origin, v.line, "key '" + key + "' expects an array");
    }
    std::vector<long> out;
    for (const TomlValue& item : v.items) out.push_back(as_int(item, key, origin));
    return out;
}

std::vector<std::string> as_string_array(const TomlValue& v, const std::string& key,
                                         const std::string& origin) {
    if (v.kind != TomlValue::Kind::array) {
        fail(origin, v.line, "key '" + key + "' expects an array");
    }
    std::vector<std::string> out;
    for (const TomlValue& item : v.items) out.push_back(as_string(item, key, origin));
    return out;
}

ThresholdMode threshold_mode_from(const std::string& s, const TomlValue& v,
                                  const std::string& origin) {
    if (s == "soft") return ThresholdMode::soft;
    if (s == "hard") return ThresholdMode::hard;
    fail(origin, v.line, "threshold_mode must be \"soft\" or \"hard\"");
}

FusionMode fusion_mode_from(const std::string& s, const TomlValue& v,
                            const std::string& origin) {
    if (s == "fixed") return FusionMode::fixed;
    if (s == "adaptive") return FusionMode::adaptive;
    fail(origin, v.line, "fusion_mode must be \"fixed\" or \"adaptive\"");
}

FractionalNorm fractional_norm_from(const std::string& s, const TomlValue& v,
                                    const std::string& origin) {
    if (s == "unit_dc_gain") return FractionalNorm::unit_dc_gain;
    if (s == "none") return FractionalNorm::none;
    fail(origin, v.line, "fractional_normalization must be \"unit_dc_gain\" or \"none\"");
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
    const auto kv = parse_toml_subset(text, origin);
    PipelineConfig cfg;

    // Composite keys collected first, assembled after the dispatch loop.
    std::vector<long> mesh_orders;
    std::vector<double> mesh_amplitudes;
    std::vector<double> mesh_phases;
    std::vector<std::string> fault_types;
    std::vector<double> fault_coeffs;
    bool have_mesh = false;
    bool have_faults = false;

    for (const auto& [key, v] : kv) {
        if (key == "denoise.wavelet_family") {
            cfg.denoise.wavelet_family = wavelet_family_from_string(as_string(v, key, origin));
        } else if (key == "denoise.decomposition_levels") {
            cfg.denoise.decomposition_levels = static_cast<int>(as_int(v, key, origin));
        } else if (key == "denoise.threshold_mode") {
            cfg.denoise.threshold_mode = threshold_mode_from(as_string(v, key, origin), v, origin);
        } else if (key == "denoise.sg_half_window") {
            cfg.denoise.sg_half_window = static_cast<int>(as_int(v, key, origin));
        } else if (key == "denoise.sg_poly_order") {
            cfg.denoise.sg_poly_order = static_cast<int>(as_int(v, key, origin));
        } else if (key == "denoise.fusion_mode") {
            cfg.denoise.fusion_mode = fusion_mode_from(as_string(v, key, origin), v, origin);
        } else if (key == "denoise.fixed_weights") {
            const auto w = as_double_array(v, key, origin);
            if (w.size() != 2) fail(origin, v.line, "fixed_weights expects exactly 2 entries");
            cfg.denoise.fixed_weights = {w[0], w[1]};
        } else if (key == "denoise.adaptive_a") {
            cfg.denoise.adaptive_a = as_double(v, key, origin);
        } else if (key == "denoise.adaptive_b") {
            cfg.denoise.adaptive_b = as_double(v, key, origin);
        } else if (key == "enhance.beta") {
            cfg.enhance.beta = as_double(v, key, origin);
        } else if (key == "enhance.tkeo_enabled") {
            cfg.enhance.tkeo_enabled = as_bool(v, key, origin);
        } else if (key == "enhance.band_selection") {
            cfg.enhance.band_selection.clear();
            for (long b : as_int_array(v, key, origin)) {
                cfg.enhance.band_selection.insert(static_cast<int>(b));
            }
        } else if (key == "enhance.fractional_normalization") {
            cfg.enhance.fractional_normalization =
                fractional_norm_from(as_string(v, key, origin), v, origin);
        } else if (key == "enhance.memory_window") {
            cfg.enhance.memory_window = static_cast<std::size_t>(as_int(v, key, origin));
        } else if (key == "kinematics.n_tooth") {
            cfg.kinematics.n_tooth = static_cast<int>(as_int(v, key, origin));
        } else if (key == "kinematics.fund_hz") {
            cfg.kinematics.fund_hz = as_double(v, key, origin);
        } else if (key == "kinematics.shaft_hz") {
            cfg.kinematics.shaft_hz = as_double(v, key, origin);
        } else if (key == "kinematics.planet_count") {
            cfg.kinematics.planet_count = static_cast<int>(as_int(v, key, origin));
        } else if (key == "kinematics.char_fault_types") {
            fault_types = as_string_array(v, key, origin);
            have_faults = true;
        } else if (key == "kinematics.char_coefficients") {
            fault_coeffs = as_double_array(v, key, origin);
            have_faults = true;
        } else if (key == "detector.calibration_cycles") {
            cfg.detector.calibration_cycles = static_cast<int>(as_int(v, key, origin));
        } else if (key == "detector.mad_k") {
            cfg.detector.mad_k = as_double(v, key, origin);
        } else if (key == "detector.sustain_m") {
            cfg.detector.sustain_m = static_cast<int>(as_int(v, key, origin));
        } else if (key == "detector.maintain_m") {
            cfg.detector.maintain_m = static_cast<int>(as_int(v, key, origin));
        } else if (key == "detector.cov_ridge") {
            cfg.detector.cov_ridge = as_double(v, key, origin);
        } else if (key == "simulator.n_cycles") {
            cfg.simulator.n_cycles = as_int(v, key, origin);
        } else if (key == "simulator.samples_per_cycle") {
            cfg.simulator.samples_per_cycle = static_cast<std::size_t>(as_int(v, key, origin));
        } else if (key == "simulator.sample_rate_hz") {
            cfg.simulator.sample_rate_hz = as_double(v, key, origin);
        } else if (key == "simulator.mesh_fund_hz") {
            cfg.simulator.mesh_fund_hz = as_double(v, key, origin);
        } else if (key == "simulator.mesh_orders") {
            mesh_orders = as_int_array(v, key, origin);
            have_mesh = true;
        } else if (key == "simulator.mesh_amplitudes") {
            mesh_amplitudes = as_double_array(v, key, origin);
            have_mesh = true;
        } else if (key == "simulator.mesh_phases") {
            mesh_phases = as_double_array(v, key, origin);
            have_mesh = true;
        } else if (key == "simulator.crack_onset_cycle") {
            cfg.simulator.crack_onset_cycle = as_int(v, key, origin);
        } else if (key == "simulator.crack_growth") {
            cfg.simulator.crack_growth = as_double(v, key, origin);
        } else if (key == "simulator.impulse_resonance_hz") {
            cfg.simulator.impulse_resonance_hz = as_double(v, key, origin);
        } else if (key == "simulator.impulse_damping") {
            cfg.simulator.impulse_damping = as_double(v, key, origin);
        } else if (key == "simulator.impulse_repetition_hz") {
            cfg.simulator.impulse_repetition_hz = as_double(v, key, origin);
        } else if (key == "simulator.snr_db") {
            cfg.simulator.snr_db = as_double(v, key, origin);
        } else if (key == "simulator.ar1_coefficient") {
            cfg.simulator.ar1_coefficient = as_double(v, key, origin);
        } else if (key == "simulator.seed") {
            cfg.simulator.seed = static_cast<std::uint64_t>(as_int(v, key, origin));
        } else if (key == "pipeline.averages") {
            cfg.averages = static_cast<int>(as_int(v, key, origin));
        } else if (key == "pipeline.modulation_gamma") {
            cfg.modulation_gamma = as_double(v, key, origin);
        } else if (key == "pipeline.emit_reconstruction") {
            cfg.emit_reconstruction = as_bool(v, key, origin);
        } else if (key == "pipeline.threads") {
            cfg.threads = static_cast<int>(as_int(v, key, origin));
        } else if (key == "bench.ht_averages") {
            cfg.bench.ht_averages = static_cast<int>(as_int(v, key, origin));
        } else if (key == "bench.planet_averages") {
            cfg.bench.planet_averages = static_cast<int>(as_int(v, key, origin));
        } else {
            fail(origin, v.line, "unknown config key '" + key + "'");
        }
    }

    if (have_mesh) {
        if (mesh_orders.size() != mesh_amplitudes.size()) {
            throw Error(origin + ": simulator.mesh_orders and simulator.mesh_amplitudes "
                        "must have the same length");
        }
        if (mesh_phases.empty()) mesh_phases.assign(mesh_orders.size(), 0.0);
        if (mesh_phases.size() != mesh_orders.size()) {
            throw Error(origin + ": simulator.mesh_phases length mismatch");
        }
        cfg.simulator.mesh_harmonics.clear();
        for (std::size_t i = 0; i < mesh_orders.size(); ++i) {
            cfg.simulator.mesh_harmonics.push_back(
                {static_cast<int>(mesh_orders[i]), mesh_amplitudes[i], mesh_phases[i]});
        }
    }
    if (have_faults) {
        if (fault_types.size() != fault_coeffs.size()) {
            throw Error(origin + ": kinematics.char_fault_types and "
                        "kinematics.char_coefficients must have the same length");
        }
        cfg.kinematics.char_coeffs.clear();
        for (std::size_t i = 0; i < fault_types.size(); ++i) {
            cfg.kinematics.char_coeffs[fault_types[i]] = fault_coeffs[i];
        }
    }

    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    if (path.empty()) {
        PipelineConfig cfg;
        cfg.validate();
        return cfg;
    }
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

nlohmann::json config_echo(const PipelineConfig& cfg) {
    nlohmann::json j;
    j["denoise"] = {
        {"wavelet_family", to_string(cfg.denoise.wavelet_family)},
        {"decomposition_levels", cfg.denoise.decomposition_levels},
        {"threshold_mode", cfg.denoise.threshold_mode == ThresholdMode::soft ? "soft" : "hard"},
        {"sg_half_window", cfg.denoise.sg_half_window},
        {"sg_poly_order", cfg.denoise.sg_poly_order},
        {"fusion_mode", cfg.denoise.fusion_mode == FusionMode::fixed ? "fixed" : "adaptive"},
        {"fixed_weights", cfg.denoise.fixed_weights},
        {"adaptive_a", cfg.denoise.adaptive_a},
        {"adaptive_b", cfg.denoise.adaptive_b},
    };
    j["enhance"] = {
        {"beta", cfg.enhance.beta},
        {"tkeo_enabled", cfg.enhance.tkeo_enabled},
        {"band_selection", cfg.enhance.band_selection},
        {"fractional_normalization",
         cfg.enhance.fractional_normalization == FractionalNorm::unit_dc_gain ? "unit_dc_gain"
                                                                              : "none"},
        {"memory_window", cfg.enhance.memory_window},
    };
    j["kinematics"] = {
        {"n_tooth", cfg.kinematics.n_tooth},
        {"fund_hz", cfg.kinematics.fund_hz},
        {"shaft_hz", cfg.kinematics.shaft_hz},
        {"planet_count", cfg.kinematics.planet_count},
        {"char_coeffs", cfg.kinematics.char_coeffs},
    };
    j["detector"] = {
        {"calibration_cycles", cfg.detector.calibration_cycles},
        {"mad_k", cfg.detector.mad_k},
        {"sustain_m", cfg.detector.sustain_m},
        {"maintain_m", cfg.detector.maintain_m},
        {"cov_ridge", cfg.detector.cov_ridge},
    };
    j["simulator"] = simulator_to_json(cfg.simulator);
    j["pipeline"] = {
        {"averages", cfg.averages},
        {"modulation_gamma", cfg.modulation_gamma},
        {"emit_reconstruction", cfg.emit_reconstruction},
        {"threads", cfg.threads},
    };
    j["bench"] = {
        {"ht_averages", cfg.bench.ht_averages},
        {"planet_averages", cfg.bench.planet_averages},
    };
    return j;
}

}  // namespace ldme
