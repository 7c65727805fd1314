#include "ldme/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

#include "ldme/indicators.hpp"
#include "ldme/simulator.hpp"

namespace ldme {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Synchronous average over the planet-phase subset of cycle i: the most
// recent `averages` cycles j <= i with j = i (mod phase_count), oldest first.
// phase_count = 1 degenerates to the plain TSA prefix.
std::vector<SignalSegment> phase_history(const CycleSeries& series, std::size_t i,
                                         int averages, std::size_t phase_count) {
    const std::size_t members = i / phase_count + 1;
    const std::size_t take = std::min(static_cast<std::size_t>(averages), members);
    std::vector<SignalSegment> history;
    history.reserve(take);
    for (std::size_t s = take; s-- > 0;) history.push_back(series.cycles[i - s * phase_count]);
    return history;
}

SignalSegment average_waveform(const CycleSeries& series, std::size_t i, int averages,
                               std::size_t phase_count) {
    const std::vector<SignalSegment> history = phase_history(series, i, averages, phase_count);
    const std::size_t n = series.cycles[i].samples.size();
    std::vector<double> acc(n, 0.0);
    for (const SignalSegment& seg : history) {
        for (std::size_t k = 0; k < n; ++k) acc[k] += seg.samples[k];
    }
    const double inv = 1.0 / static_cast<double>(history.size());
    for (double& v : acc) v *= inv;
    return SignalSegment{std::move(acc), series.cycles[i].sample_rate_hz,
                         series.cycles[i].cycle_index};
}

std::vector<CiRecord> tsa_ci_records(const CycleSeries& series, const KinematicsSpec& kin,
                                     int averages, std::size_t phase_count) {
    kin.validate();
    if (averages < 1) throw Error("baseline: averages must be >= 1");
    if (series.cycles.empty()) throw Error("baseline: empty cycle series");
    const std::size_t n = series.cycles.front().samples.size();
    for (const SignalSegment& seg : series.cycles) {
        if (seg.samples.size() != n) {
            throw Error("baseline: cycle " + std::to_string(seg.cycle_index) +
                        " has " + std::to_string(seg.samples.size()) +
                        " samples, expected " + std::to_string(n));
        }
    }

    std::vector<CiRecord> records(series.cycles.size());
    std::exception_ptr failure = nullptr;
    std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(series.cycles.size()); ++ii) {
        if (failed.load(std::memory_order_relaxed)) continue;
        const std::size_t i = static_cast<std::size_t>(ii);
        try {
            const std::vector<SignalSegment> history =
                phase_history(series, i, averages, phase_count);
            const SignalSegment tsa = ht_tsa(history, averages);
            const Spectrum spec = cycle_spectrum(tsa);
            records[i] = compute_ci(spec, kin, series.cycles[i].cycle_index);
        } catch (const std::exception& e) {
            const std::string msg = "cycle " + std::to_string(series.cycles[i].cycle_index) +
                                    ": " + e.what();
#pragma omp critical(ldme_bench_failure)
            {
                if (!failure) failure = std::make_exception_ptr(Error(msg));
            }
            failed.store(true, std::memory_order_relaxed);
        }
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

struct GroundTruth {
    bool available = false;
    SignalSegment fault_template;    // unit impulse train p(n)
    std::vector<double> schedule;    // A(c) per series index
};

// Rebuilds the noiseless fault component from the dataset manifest. Missing
// or malformed manifests just disable the SNR column; the comparison itself
// does not need ground truth.
GroundTruth extract_ground_truth(const CycleSeries& series) {
    GroundTruth gt;
    const nlohmann::json& m = series.manifest;
    if (!m.is_object() || !m.contains("config") || !m.contains("amplitude_schedule")) return gt;
    try {
        const SimulatorConfig scfg = simulator_from_json(m.at("config"));
        std::vector<double> schedule = m.at("amplitude_schedule").get<std::vector<double>>();
        if (schedule.size() != series.cycles.size()) return gt;
        if (series.cycles.empty() ||
            scfg.samples_per_cycle != series.cycles.front().samples.size()) {
            return gt;
        }
        std::vector<double> impulse = impulse_train(scfg);
        const bool live = std::any_of(impulse.begin(), impulse.end(),
                                      [](double v) { return v != 0.0; });
        if (!live) return gt;
        gt.fault_template = SignalSegment{std::move(impulse), scfg.sample_rate_hz, 0};
        gt.schedule = std::move(schedule);
        gt.available = true;
    } catch (const std::exception&) {
        return {};
    }
    return gt;
}

// Median SNR enhancement over the cycles whose fault amplitude is nonzero.
template <typename ReconForCycle>
std::optional<double> median_snr(const CycleSeries& series, const GroundTruth& gt,
                                 ReconForCycle&& recon_for_cycle) {
    if (!gt.available) return std::nullopt;
    std::vector<double> enh;
    for (std::size_t i = 0; i < series.cycles.size(); ++i) {
        if (gt.schedule[i] <= 0.0) continue;
        enh.push_back(snr_enhancement(series.cycles[i], recon_for_cycle(i), gt.fault_template));
    }
    if (enh.empty()) return std::nullopt;
    return median_of(std::move(enh));
}

std::string ablation_method_name(const std::set<std::string>& disable) {
    if (disable.empty()) return "ldme";
    std::string name = "ldme_minus_";
    bool first = true;
    for (const std::string& s : disable) {
        if (!first) name += '+';
        name += s;
        first = false;
    }
    return name;
}

}  // namespace

DetectionReport baseline_ht_tsa(const CycleSeries& series, const KinematicsSpec& kin,
                                const DetectorConfig& detector, int averages) {
    const std::vector<CiRecord> records = tsa_ci_records(series, kin, averages, 1);
    return detect_from_records(records, detector, series.labels);
}

DetectionReport baseline_planet_tsa(const CycleSeries& series, const KinematicsSpec& kin,
                                    const DetectorConfig& detector, int averages) {
    kin.validate();
    const std::vector<CiRecord> records =
        tsa_ci_records(series, kin, averages, static_cast<std::size_t>(kin.planet_count));
    return detect_from_records(records, detector, series.labels);
}

double snr_enhancement(const SignalSegment& raw, const SignalSegment& reconstructed,
                       const SignalSegment& fault_template) {
    const std::size_t n = fault_template.samples.size();
    if (n == 0) throw Error("snr_enhancement: empty fault template");
    if (raw.samples.size() != n || reconstructed.samples.size() != n) {
        throw Error("snr_enhancement: length mismatch (raw " +
                    std::to_string(raw.samples.size()) + ", reconstructed " +
                    std::to_string(reconstructed.samples.size()) + ", template " +
                    std::to_string(n) + ")");
    }
    require_finite(raw.samples, "snr_enhancement raw");
    require_finite(reconstructed.samples, "snr_enhancement reconstructed");
    require_finite(fault_template.samples, "snr_enhancement template");

    const double t_mean = mean(fault_template.samples);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = fault_template.samples[i] - t_mean;
    double tt = 0.0;
    for (double v : t) tt += v * v;
    if (tt == 0.0) throw Error("snr_enhancement: fault template has zero variance");

    const auto template_snr_db = [&](const std::vector<double>& x) {
        const double xm = mean(x);
        double xt = 0.0;
        for (std::size_t i = 0; i < n; ++i) xt += (x[i] - xm) * t[i];
        const double beta = xt / tt;
        double proj_ss = 0.0;
        double resid_ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = beta * t[i];
            const double r = (x[i] - xm) - p;
            proj_ss += p * p;
            resid_ss += r * r;
        }
        if (resid_ss == 0.0) return std::numeric_limits<double>::infinity();
        if (proj_ss == 0.0) return -std::numeric_limits<double>::infinity();
        return 10.0 * std::log10(proj_ss / resid_ss);
    };

    const double snr_rec = template_snr_db(reconstructed.samples);
    const double snr_raw = template_snr_db(raw.samples);
    if (std::isinf(snr_rec) && std::isinf(snr_raw) && snr_rec == snr_raw) return 0.0;
    double enh = snr_rec - snr_raw;
    if (!(enh <= 60.0)) enh = 60.0;
    if (enh < -60.0) enh = -60.0;
    return enh;
}

StageMask mask_from_stage_names(const std::set<std::string>& disable) {
    StageMask mask;
    for (const std::string& s : disable) {
        if (s == "wavelet_path") {
            mask.wavelet_path = false;
        } else if (s == "sg_path") {
            mask.sg_path = false;
        } else if (s == "band_select") {
            mask.band_select = false;
        } else if (s == "tkeo") {
            mask.tkeo = false;
        } else if (s == "fractional") {
            mask.fractional = false;
        } else if (s == "cci_modulation") {
            mask.cci_modulation = false;
        } else {
            throw Error("unknown ablation stage '" + s +
                        "' (expected wavelet_path, sg_path, band_select, tkeo, "
                        "fractional, cci_modulation)");
        }
    }
    return mask;
}

std::vector<BenchmarkRun> ablation(const CycleSeries& series, const PipelineConfig& cfg,
                                   const std::vector<std::set<std::string>>& disable_sets,
                                   const std::string& dataset_id) {
    std::vector<BenchmarkRun> runs;
    runs.reserve(disable_sets.size());
    for (const std::set<std::string>& disable : disable_sets) {
        const StageMask mask = mask_from_stage_names(disable);
        BenchmarkRun run;
        run.method = ablation_method_name(disable);
        run.dataset_id = dataset_id;
        const auto t0 = std::chrono::steady_clock::now();
        run.report = run_pipeline(series, cfg, mask, false).report;
        run.wall_time_s = seconds_since(t0);
        if (!mask.wavelet_path && !mask.sg_path) {
            run.flags.push_back("both_denoise_paths_disabled");
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

std::vector<BenchmarkRun> run_methods(const CycleSeries& series, const PipelineConfig& cfg,
                                      const std::vector<std::string>& methods,
                                      const std::string& dataset_id) {
    cfg.validate();
    if (methods.empty()) throw Error("bench: no methods requested");
    const GroundTruth gt = extract_ground_truth(series);

    std::vector<BenchmarkRun> runs;
    runs.reserve(methods.size());
    for (const std::string& method : methods) {
        BenchmarkRun run;
        run.method = method;
        run.dataset_id = dataset_id;
        const auto t0 = std::chrono::steady_clock::now();
        if (method == "ldme") {
            const PipelineResult res = run_pipeline(series, cfg, StageMask{}, gt.available);
            run.report = res.report;
            run.snr_enh_db = median_snr(
                series, gt, [&](std::size_t i) { return res.reconstructions[i]; });
        } else if (method == "ht_tsa") {
            run.report =
                baseline_ht_tsa(series, cfg.kinematics, cfg.detector, cfg.bench.ht_averages);
            run.snr_enh_db = median_snr(series, gt, [&](std::size_t i) {
                return average_waveform(series, i, cfg.bench.ht_averages, 1);
            });
        } else if (method == "planet_tsa") {
            run.report = baseline_planet_tsa(series, cfg.kinematics, cfg.detector,
                                             cfg.bench.planet_averages);
            run.snr_enh_db = median_snr(series, gt, [&](std::size_t i) {
                return average_waveform(series, i, cfg.bench.planet_averages,
                                        static_cast<std::size_t>(cfg.kinematics.planet_count));
            });
            run.flags.push_back("planet_tsa_interleaved_subset_approximation");
        } else {
            throw Error("bench: unknown method '" + method +
                        "' (expected ldme, ht_tsa, planet_tsa)");
        }
        run.wall_time_s = seconds_since(t0);
        runs.push_back(std::move(run));
    }
    return runs;
}

namespace {

std::string fmt_short(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string csv_i64(const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string();
}

std::string csv_real(const std::optional<double>& v) {
    return v ? fmt_g17(*v) : std::string();
}

std::string md_i64(const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("n/a");
}

std::string md_real(const std::optional<double>& v) {
    return v ? fmt_short(*v) : std::string("n/a");
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

}  // namespace

void write_comparison(const std::vector<BenchmarkRun>& runs,
                      const std::filesystem::path& out_dir) {
    if (runs.empty()) throw Error("write_comparison: no runs");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error("cannot create output directory '" + out_dir.string() +
                    "': " + ec.message());
    }

    // "Improvement" is the relative reduction of the detection cycle against
    // the worst (latest) detecting run in this table.
    std::optional<std::int64_t> worst;
    for (const BenchmarkRun& r : runs) {
        if (r.report.detection_cycle) {
            worst = worst ? std::max(*worst, *r.report.detection_cycle)
                          : *r.report.detection_cycle;
        }
    }
    const auto improvement_pct = [&](const BenchmarkRun& r) -> std::optional<double> {
        if (!r.report.detection_cycle || !worst || *worst <= 0) return std::nullopt;
        return 100.0 * static_cast<double>(*worst - *r.report.detection_cycle) /
               static_cast<double>(*worst);
    };

    std::string csv =
        "method,detection_cycle,maintenance_cycle,improvement_vs_worst_pct,"
        "false_alarm_rate,roc_auc,pr_auc,snr_enh_db,flags\n";
    for (const BenchmarkRun& r : runs) {
        csv += r.method;
        csv += ',' + csv_i64(r.report.detection_cycle);
        csv += ',' + csv_i64(r.report.maintenance_cycle);
        csv += ',' + csv_real(improvement_pct(r));
        csv += ',' + csv_real(r.report.far);
        csv += ',' + csv_real(r.report.roc_auc);
        csv += ',' + csv_real(r.report.pr_auc);
        csv += ',' + csv_real(r.snr_enh_db);
        csv += ',' + join(r.flags, ';');
        csv += '\n';
    }
    write_text_atomic(out_dir / "comparison.csv", csv);

    std::string md =
        "| Method | Detection c_d | Maintenance c_m | Improvement vs worst (%) "
        "| FAR | ROC AUC | PR AUC | SNR enh. (dB) |\n"
        "|---|---|---|---|---|---|---|---|\n";
    for (const BenchmarkRun& r : runs) {
        md += "| " + r.method;
        md += " | " + md_i64(r.report.detection_cycle);
        md += " | " + md_i64(r.report.maintenance_cycle);
        md += " | " + md_real(improvement_pct(r));
        md += " | " + md_real(r.report.far);
        md += " | " + md_real(r.report.roc_auc);
        md += " | " + md_real(r.report.pr_auc);
        md += " | " + md_real(r.snr_enh_db);
        md += " |\n";
    }
    bool noted = false;
    for (const BenchmarkRun& r : runs) {
        if (r.flags.empty()) continue;
        if (!noted) {
            md += '\n';
            noted = true;
        }
        md += "- " + r.method + ": " + join(r.flags, ',') + "\n";
    }
    write_text_atomic(out_dir / "comparison.md", md);
}

}  // namespace ldme
