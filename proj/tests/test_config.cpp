#include <string>

#include "doctest.h"
#include "ldme/config.hpp"

using ldme::PipelineConfig;

namespace {

PipelineConfig parse(const std::string& text) { return ldme::parse_config(text, "test.toml"); }

}  // namespace

#ifdef LDME_REPO_CONFIG
TEST_CASE("the shipped default config mirrors the built-in defaults") {
    // configs/default.toml exists so every built-in default is visible and
    // editable; it must stay in sync with the struct initializers.
    const PipelineConfig file = ldme::load_config(LDME_REPO_CONFIG);
    const PipelineConfig code;

    CHECK(file.denoise.wavelet_family == code.denoise.wavelet_family);
    CHECK(file.denoise.decomposition_levels == code.denoise.decomposition_levels);
    CHECK(file.denoise.threshold_mode == code.denoise.threshold_mode);
    CHECK(file.denoise.sg_half_window == code.denoise.sg_half_window);
    CHECK(file.denoise.sg_poly_order == code.denoise.sg_poly_order);
    CHECK(file.denoise.fusion_mode == code.denoise.fusion_mode);
    CHECK(file.denoise.fixed_weights == code.denoise.fixed_weights);
    CHECK(file.denoise.adaptive_a == code.denoise.adaptive_a);
    CHECK(file.denoise.adaptive_b == code.denoise.adaptive_b);

    CHECK(file.enhance.beta == code.enhance.beta);
    CHECK(file.enhance.tkeo_enabled == code.enhance.tkeo_enabled);
    CHECK(file.enhance.band_selection == code.enhance.band_selection);
    CHECK(file.enhance.fractional_normalization == code.enhance.fractional_normalization);
    CHECK(file.enhance.memory_window == code.enhance.memory_window);

    CHECK(file.kinematics.n_tooth == code.kinematics.n_tooth);
    CHECK(file.kinematics.fund_hz == code.kinematics.fund_hz);
    CHECK(file.kinematics.shaft_hz == code.kinematics.shaft_hz);
    CHECK(file.kinematics.planet_count == code.kinematics.planet_count);
    CHECK(file.kinematics.char_coeffs == code.kinematics.char_coeffs);

    CHECK(file.detector.calibration_cycles == code.detector.calibration_cycles);
    CHECK(file.detector.mad_k == code.detector.mad_k);
    CHECK(file.detector.sustain_m == code.detector.sustain_m);
    CHECK(file.detector.maintain_m == code.detector.maintain_m);
    CHECK(file.detector.cov_ridge == code.detector.cov_ridge);

    CHECK(file.simulator.n_cycles == code.simulator.n_cycles);
    CHECK(file.simulator.samples_per_cycle == code.simulator.samples_per_cycle);
    CHECK(file.simulator.sample_rate_hz == code.simulator.sample_rate_hz);
    CHECK(file.simulator.mesh_fund_hz == code.simulator.mesh_fund_hz);
    REQUIRE(file.simulator.mesh_harmonics.size() == code.simulator.mesh_harmonics.size());
    for (std::size_t i = 0; i < code.simulator.mesh_harmonics.size(); ++i) {
        CHECK(file.simulator.mesh_harmonics[i].order ==
              code.simulator.mesh_harmonics[i].order);
        CHECK(file.simulator.mesh_harmonics[i].amplitude ==
              code.simulator.mesh_harmonics[i].amplitude);
        CHECK(file.simulator.mesh_harmonics[i].phase ==
              code.simulator.mesh_harmonics[i].phase);
    }
    CHECK(file.simulator.crack_onset_cycle == code.simulator.crack_onset_cycle);
    CHECK(file.simulator.crack_growth == code.simulator.crack_growth);
    CHECK(file.simulator.impulse_resonance_hz == code.simulator.impulse_resonance_hz);
    CHECK(file.simulator.impulse_damping == code.simulator.impulse_damping);
    CHECK(file.simulator.impulse_repetition_hz == code.simulator.impulse_repetition_hz);
    CHECK(file.simulator.snr_db == code.simulator.snr_db);
    CHECK(file.simulator.ar1_coefficient == code.simulator.ar1_coefficient);
    CHECK(file.simulator.seed == code.simulator.seed);

    CHECK(file.averages == code.averages);
    CHECK(file.modulation_gamma == code.modulation_gamma);
    CHECK(file.emit_reconstruction == code.emit_reconstruction);
    CHECK(file.threads == code.threads);
    CHECK(file.bench.ht_averages == code.bench.ht_averages);
    CHECK(file.bench.planet_averages == code.bench.planet_averages);
}
#endif

TEST_CASE("an empty path or empty text yields the built-in defaults") {
    const PipelineConfig from_path = ldme::load_config({});
    const PipelineConfig from_text = parse("");
    const PipelineConfig code;
    CHECK(from_path.detector.mad_k == code.detector.mad_k);
    CHECK(from_text.enhance.beta == code.enhance.beta);
    CHECK(from_text.simulator.n_cycles == code.simulator.n_cycles);
}

TEST_CASE("partial files override only the named keys") {
    const PipelineConfig cfg = parse(
        "[detector]\n"
        "mad_k = 4.5\n"
        "\n"
        "[enhance]\n"
        "band_selection = [2, 3]\n");
    CHECK(cfg.detector.mad_k == 4.5);
    CHECK(cfg.detector.sustain_m == PipelineConfig{}.detector.sustain_m);
    CHECK(cfg.enhance.band_selection == std::set<int>{2, 3});
    CHECK(cfg.enhance.beta == PipelineConfig{}.enhance.beta);
}

TEST_CASE("comments and quoted strings parse") {
    const PipelineConfig cfg = parse(
        "# top comment\n"
        "[denoise]\n"
        "threshold_mode = \"hard\"  # trailing comment\n"
        "sg_half_window = 5        # another\n");
    CHECK(cfg.denoise.threshold_mode == ldme::ThresholdMode::hard);
    CHECK(cfg.denoise.sg_half_window == 5);
}

TEST_CASE("unknown keys are reported with their origin and line") {
    CHECK_THROWS_WITH_AS(parse("[denoise]\nwavelet = \"sym8\"\n"),
                         "test.toml:2: unknown config key 'denoise.wavelet'", ldme::Error);
    CHECK_THROWS_WITH_AS(parse("typo = 1\n"), "test.toml:1: unknown config key 'typo'",
                         ldme::Error);
}

TEST_CASE("syntax errors carry line numbers") {
    CHECK_THROWS_AS(parse("[detector\nmad_k = 3.0\n"), ldme::Error);        // open section
    CHECK_THROWS_AS(parse("[detector]\nmad_k\n"), ldme::Error);             // missing '='
    CHECK_THROWS_AS(parse("[detector]\nmad_k = \n"), ldme::Error);          // empty value
    CHECK_THROWS_AS(parse("[detector]\nmad_k = abc\n"), ldme::Error);       // bad number
    CHECK_THROWS_AS(parse("[denoise]\nthreshold_mode = \"soft\nsg_half_window = 3\n"),
                    ldme::Error);                                           // open string
    CHECK_THROWS_AS(parse("[enhance]\nband_selection = [1, 2\n"), ldme::Error);  // open array
    CHECK_THROWS_AS(parse("[detector]\nmad_k = 3.0\nmad_k = 4.0\n"), ldme::Error);  // dup
}

TEST_CASE("values are type-checked against their keys") {
    CHECK_THROWS_AS(parse("[enhance]\nbeta = \"half\"\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[enhance]\ntkeo_enabled = 1\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[detector]\nsustain_m = 2.5\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[denoise]\nfixed_weights = 0.4\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[denoise]\nfixed_weights = [0.4, 1.2, 0.4]\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[denoise]\nthreshold_mode = \"medium\"\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[denoise]\nfusion_mode = \"mean\"\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[enhance]\nfractional_normalization = \"unit\"\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[denoise]\nwavelet_family = \"haar\"\n"), ldme::Error);
}

TEST_CASE("mesh harmonic lists must stay consistent") {
    SUBCASE("orders without amplitudes") {
        CHECK_THROWS_AS(parse("[simulator]\nmesh_orders = [1, 2]\n"), ldme::Error);
    }
    SUBCASE("phases default to zero") {
        const PipelineConfig cfg = parse(
            "[simulator]\n"
            "mesh_orders = [1, 2]\n"
            "mesh_amplitudes = [1.0, 0.25]\n");
        REQUIRE(cfg.simulator.mesh_harmonics.size() == 2);
        CHECK(cfg.simulator.mesh_harmonics[1].order == 2);
        CHECK(cfg.simulator.mesh_harmonics[1].amplitude == 0.25);
        CHECK(cfg.simulator.mesh_harmonics[1].phase == 0.0);
    }
    SUBCASE("phase length mismatch") {
        CHECK_THROWS_AS(parse("[simulator]\n"
                              "mesh_orders = [1, 2]\n"
                              "mesh_amplitudes = [1.0, 0.25]\n"
                              "mesh_phases = [0.0]\n"),
                        ldme::Error);
    }
}

TEST_CASE("characteristic-frequency lists must pair up") {
    CHECK_THROWS_AS(parse("[kinematics]\nchar_fault_types = [\"BPFI\"]\n"), ldme::Error);
    const PipelineConfig cfg = parse(
        "[kinematics]\n"
        "char_fault_types = [\"BPFI\", \"BSF\"]\n"
        "char_coefficients = [5.4, 4.7]\n");
    CHECK(cfg.kinematics.char_coeffs.size() == 2);
    CHECK(cfg.kinematics.char_coeffs.at("BSF") == 4.7);
}

TEST_CASE("semantic validation runs after parsing") {
    CHECK_THROWS_AS(parse("[enhance]\nbeta = 1.5\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[detector]\ncalibration_cycles = 5\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[simulator]\nar1_coefficient = -0.2\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[pipeline]\naverages = 0\n"), ldme::Error);
    CHECK_THROWS_AS(parse("[bench]\nht_averages = 0\n"), ldme::Error);
}

TEST_CASE("missing config files are reported by path") {
    CHECK_THROWS_AS(ldme::load_config("/nonexistent/ldme.toml"), ldme::Error);
}

TEST_CASE("config_echo reflects the effective configuration") {
    PipelineConfig cfg;
    cfg.detector.mad_k = 4.25;
    cfg.enhance.band_selection = {3};
    const nlohmann::json j = ldme::config_echo(cfg);
    CHECK(j["detector"]["mad_k"] == 4.25);
    CHECK(j["enhance"]["band_selection"] == std::set<int>{3});
    CHECK(j["bench"]["ht_averages"] == 1);
    CHECK(j["pipeline"]["averages"] == 1);
    CHECK(j["simulator"]["snr_db"] == 0.0);
    CHECK(j["denoise"]["wavelet_family"] == "sym8");
}
