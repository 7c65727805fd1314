#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "ldme/bench.hpp"
#include "ldme/core_dsp.hpp"
#include "ldme/fft.hpp"
#include "ldme/pipeline.hpp"

namespace {

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

// LDME_SEED overrides the configured simulator seed (quick sweeps without
// editing the config file).
void apply_seed_env(ldme::PipelineConfig& cfg) {
    const char* env = std::getenv("LDME_SEED");
    if (env == nullptr || *env == '\0') return;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0') {
        throw ldme::Error("LDME_SEED must be an unsigned integer, got '" +
                          std::string(env) + "'");
    }
    cfg.simulator.seed = v;
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string describe(const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("none");
}

std::string describe(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return buf;
}

void print_report_line(const std::string& name, const ldme::DetectionReport& r) {
    std::cout << name << ": detection_cycle=" << describe(r.detection_cycle)
              << " maintenance_cycle=" << describe(r.maintenance_cycle)
              << " far=" << describe(r.far) << " roc_auc=" << describe(r.roc_auc)
              << " pr_auc=" << describe(r.pr_auc) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LDME early gear-fault detection: simulation, analysis, baselines"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_dir;
    std::string out_path;
    std::string data_format = "csv_dir";
    int threads = 0;

    const auto add_common = [&](CLI::App* sub, bool with_data) {
        sub->add_option("--config", config_path,
                        "pipeline config file (TOML); omit for built-in defaults");
        if (with_data) {
            sub->add_option("--data", data_dir, "dataset directory (or raw file)")
                ->required();
            sub->add_option("--format", data_format, "dataset format")
                ->check(CLI::IsMember({"csv_dir", "raw_f32", "raw_f64"}));
        }
        sub->add_option("--out", out_path, "output path")->required();
        sub->add_option("--threads", threads, "OpenMP thread count (0 = default)");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
    add_common(simulate, false);

    CLI::App* analyze = app.add_subcommand("analyze", "run the detection pipeline");
    add_common(analyze, true);

    CLI::App* bench = app.add_subcommand("bench", "compare LDME against TSA baselines");
    add_common(bench, true);
    std::string methods_arg = "ldme,ht_tsa,planet_tsa";
    bench->add_option("--methods", methods_arg, "comma-separated: ldme,ht_tsa,planet_tsa");

    CLI::App* ablate = app.add_subcommand("ablate", "rerun with pipeline stages disabled");
    add_common(ablate, true);
    std::vector<std::string> disable_args;
    ablate
        ->add_option("--disable", disable_args,
                     "stages to disable together (comma-separated); repeat the "
                     "flag for separate ablation runs")
        ->required();

    CLI::App* envspec = app.add_subcommand("envspec", "envelope spectrum of one record");
    std::string input_path;
    double fs_arg = 0.0;
    envspec->add_option("--input", input_path, "single-column CSV")->required();
    envspec->add_option("--fs", fs_arg, "sample rate in Hz (falls back to file header)");
    envspec->add_option("--out", out_path, "output CSV file")->required();

    try {
        app.parse(argc, argv);

        apply_threads(threads);

        if (simulate->parsed()) {
            ldme::PipelineConfig cfg = ldme::load_config(config_path);
            apply_seed_env(cfg);
            const ldme::Dataset ds = ldme::generate_dataset(cfg.simulator);
            ldme::write_dataset(ds, out_path);
            std::cout << "wrote " << ds.cycles.size() << " cycles (seed "
                      << ds.config.seed << ") to " << out_path << '\n';
        } else if (analyze->parsed()) {
            ldme::PipelineConfig cfg = ldme::load_config(config_path);
            if (threads > 0) cfg.threads = threads;
            apply_threads(cfg.threads);
            const ldme::DetectionReport report =
                ldme::run_pipeline_to_dir(cfg, data_dir, data_format, out_path);
            print_report_line("analyze", report);
            std::cout << "report written to " << out_path << '\n';
        } else if (bench->parsed()) {
            const ldme::PipelineConfig cfg = ldme::load_config(config_path);
            const ldme::CycleSeries series = ldme::ingest(data_dir, data_format);
            const std::vector<std::string> methods = split_csv_list(methods_arg);
            const std::vector<ldme::BenchmarkRun> runs =
                ldme::run_methods(series, cfg, methods, data_dir);
            ldme::write_comparison(runs, out_path);
            for (const ldme::BenchmarkRun& r : runs) {
                print_report_line(r.method, r.report);
                std::printf("%s: snr_enh_db=%s wall_time_s=%.3f\n", r.method.c_str(),
                            describe(r.snr_enh_db).c_str(), r.wall_time_s);
            }
            std::cout << "comparison written to " << out_path << '\n';
        } else if (ablate->parsed()) {
            const ldme::PipelineConfig cfg = ldme::load_config(config_path);
            const ldme::CycleSeries series = ldme::ingest(data_dir, data_format);
            // Leading empty set = the unablated reference row.
            std::vector<std::set<std::string>> disable_sets = {{}};
            for (const std::string& arg : disable_args) {
                const std::vector<std::string> stages = split_csv_list(arg);
                disable_sets.emplace_back(stages.begin(), stages.end());
            }
            const std::vector<ldme::BenchmarkRun> runs =
                ldme::ablation(series, cfg, disable_sets, data_dir);
            ldme::write_comparison(runs, out_path);
            for (const ldme::BenchmarkRun& r : runs) {
                print_report_line(r.method, r.report);
            }
            std::cout << "comparison written to " << out_path << '\n';
        } else if (envspec->parsed()) {
            const ldme::SingleColumn col = ldme::read_single_column(input_path);
            const double fs = fs_arg > 0.0 ? fs_arg : col.fs_hz.value_or(0.0);
            if (fs <= 0.0) {
                throw ldme::Error(
                    "envspec: sample rate unknown (pass --fs or add a '# fs_hz=' "
                    "header to the input)");
            }
            const ldme::SignalSegment seg{col.samples, fs, 0};
            const ldme::Spectrum spec =
                ldme::envelope_spectrum(seg, ldme::fft::next_pow2(col.samples.size()));
            ldme::write_text_atomic(out_path, ldme::spectrum_csv(spec));
            std::cout << "envelope spectrum (" << spec.magnitudes.size()
                      << " bins, " << spec.bin_hz << " Hz/bin) written to " << out_path
                      << '\n';
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
