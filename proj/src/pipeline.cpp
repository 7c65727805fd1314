#include "ldme/pipeline.hpp"

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "ldme/denoise.hpp"
#include "ldme/indicators.hpp"

namespace ldme {

namespace {

// Wraps the per-cycle phases so a failure anywhere in the chain reports which
// cycle it came from. The stage operators already prefix their own names.
[[noreturn]] void rethrow_for_cycle(std::int64_t cycle, const std::exception& e) {
    throw Error("cycle " + std::to_string(cycle) + ": " + e.what());
}

// Runs `body(i)` for i in [0, n), optionally across OpenMP threads. The first
// exception wins; remaining iterations become no-ops.
template <typename Body>
void for_each_cycle(std::size_t n, bool parallel, Body&& body) {
    std::exception_ptr failure = nullptr;
    std::atomic<bool> failed{false};
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(ldme_pipeline_failure)
                {
                    if (!failure) failure = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
    if (failure) std::rethrow_exception(failure);
}

PipelineResult run_impl(const CycleSeries& series, const PipelineConfig& cfg,
                        const StageMask& mask, bool keep_reconstructions,
                        bool parallel) {
    cfg.validate();
    const std::size_t n_cycles = series.cycles.size();
    if (n_cycles == 0) throw Error("pipeline: empty cycle series");
    const std::size_t h = static_cast<std::size_t>(cfg.detector.calibration_cycles);
    if (n_cycles < h) {
        throw Error("pipeline: series has " + std::to_string(n_cycles) +
                    " cycles but calibration needs " + std::to_string(h));
    }
    const std::size_t n = series.cycles.front().samples.size();
    for (std::size_t i = 0; i < n_cycles; ++i) {
        if (series.cycles[i].samples.size() != n) {
            throw Error("pipeline: cycle " + std::to_string(series.cycles[i].cycle_index) +
                        " has " + std::to_string(series.cycles[i].samples.size()) +
                        " samples, expected " + std::to_string(n));
        }
    }
    if (!series.labels.empty() && series.labels.size() != n_cycles) {
        throw Error("pipeline: label count does not match cycle count");
    }

    PipelineResult result;
    result.ci_records.resize(n_cycles);
    std::vector<SignalSegment> enhanced(n_cycles);
    if (keep_reconstructions) result.reconstructions.resize(n_cycles);

    // The fractional operator's weight triangle depends only on the segment
    // length, so one plan serves every cycle (and every thread: apply() is
    // read-only on the plan).
    std::optional<HadamardCaputoPlan> plan;
    if (mask.fractional) {
        plan.emplace(n, cfg.enhance.beta, cfg.enhance.fractional_normalization,
                     cfg.enhance.memory_window);
    }

    // Phase 1: denoise + enhance each cycle independently.
    for_each_cycle(n_cycles, parallel, [&](std::size_t i) {
        try {
            SignalSegment recon;
            enhanced[i] = ldme_operator(series.cycles[i], cfg.denoise, cfg.enhance, mask,
                                        plan ? &*plan : nullptr,
                                        keep_reconstructions ? &recon : nullptr);
            if (keep_reconstructions) result.reconstructions[i] = std::move(recon);
        } catch (const std::exception& e) {
            rethrow_for_cycle(series.cycles[i].cycle_index, e);
        }
    });

    // Phase 2: synchronous averaging over each cycle's history prefix, then
    // the condition indicators. Cycles are independent given the enhanced
    // segments, so this parallelizes too.
    for_each_cycle(n_cycles, parallel, [&](std::size_t i) {
        try {
            SignalSegment tsa = ht_tsa(std::span(enhanced.data(), i + 1), cfg.averages);
            Spectrum spec = cycle_spectrum(tsa);
            result.ci_records[i] =
                compute_ci(spec, cfg.kinematics, series.cycles[i].cycle_index);
            if (i == h - 1) result.calibration_spectrum = spec;
            if (i == n_cycles - 1) result.final_spectrum = std::move(spec);
        } catch (const std::exception& e) {
            rethrow_for_cycle(series.cycles[i].cycle_index, e);
        }
    });

    // Phase 3: sequential detector pass.
    result.report = detect_from_records(result.ci_records, cfg.detector, series.labels);

    DetectorState state = calibrate(std::span(result.ci_records.data(), h), cfg.detector);
    result.reference_cci = state.cci_median;

    if (keep_reconstructions && mask.cci_modulation) {
        for (std::size_t i = 0; i < n_cycles; ++i) {
            result.reconstructions[i] =
                adaptive_modulation(result.reconstructions[i], result.ci_records[i].cci,
                                    result.reference_cci, cfg.modulation_gamma);
        }
    }
    return result;
}

}  // namespace

DetectionReport detect_from_records(const std::vector<CiRecord>& records,
                                    const DetectorConfig& cfg,
                                    const std::vector<int>& labels) {
    cfg.validate();
    const std::size_t h = static_cast<std::size_t>(cfg.calibration_cycles);
    if (records.size() < h) {
        throw Error("detect: " + std::to_string(records.size()) +
                    " records but calibration needs " + std::to_string(h));
    }
    if (!labels.empty() && labels.size() != records.size()) {
        throw Error("detect: label count does not match record count");
    }

    DetectorState state = calibrate(std::span(records.data(), h), cfg);

    DetectionReport report;
    report.cycles.reserve(records.size());
    report.scores.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double s = score(state, records[i]);
        report.cycles.push_back(records[i].cycle_index);
        report.scores.push_back(s);
        if (i >= h) update_decision(state, s, records[i].cycle_index, cfg);
    }
    report.detection_cycle = state.detection_cycle;
    report.maintenance_cycle = state.maintenance_cycle;

    if (!labels.empty() && records.size() > h) {
        const std::span<const double> post_scores(report.scores.data() + h,
                                                  report.scores.size() - h);
        const std::span<const int> post_labels(labels.data() + h, labels.size() - h);
        const EvalMetrics metrics = evaluate(post_scores, post_labels, cfg.mad_k);
        report.far = metrics.far;
        report.roc_auc = metrics.roc_auc;
        report.pr_auc = metrics.pr_auc;
    }
    return report;
}

PipelineResult run_pipeline(const CycleSeries& series, const PipelineConfig& cfg,
                            const StageMask& mask, bool keep_reconstructions) {
    return run_impl(series, cfg, mask, keep_reconstructions, true);
}

PipelineResult run_pipeline_serial(const CycleSeries& series, const PipelineConfig& cfg,
                                   const StageMask& mask, bool keep_reconstructions) {
    return run_impl(series, cfg, mask, keep_reconstructions, false);
}

namespace {

std::string render_ci_trace(const std::vector<CiRecord>& records) {
    std::string out = "cycle,ci1,ci2,cci\n";
    for (const CiRecord& r : records) {
        char head[32];
        std::snprintf(head, sizeof(head), "%" PRId64 ",", r.cycle_index);
        out += head;
        out += fmt_g17(r.ci1);
        out += ',';
        out += fmt_g17(r.ci2);
        out += ',';
        out += fmt_g17(r.cci);
        out += '\n';
    }
    return out;
}

std::string render_scores(const DetectionReport& report) {
    std::string out = "cycle,score\n";
    for (std::size_t i = 0; i < report.cycles.size(); ++i) {
        char head[32];
        std::snprintf(head, sizeof(head), "%" PRId64 ",", report.cycles[i]);
        out += head;
        out += fmt_g17(report.scores[i]);
        out += '\n';
    }
    return out;
}

std::string render_reconstruction(const SignalSegment& seg) {
    std::string out;
    out.reserve(seg.samples.size() * 24 + 64);
    char head[64];
    std::snprintf(head, sizeof(head), "# fs_hz=%.17g\n# cycle=%" PRId64 "\n",
                  seg.sample_rate_hz, seg.cycle_index);
    out += head;
    for (double v : seg.samples) {
        out += fmt_g17(v);
        out += '\n';
    }
    return out;
}

nlohmann::json optional_json(const std::optional<std::int64_t>& v) {
    if (v) return *v;
    return nullptr;
}

nlohmann::json optional_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

DetectionReport run_pipeline_to_dir(const PipelineConfig& cfg,
                                    const std::filesystem::path& data_dir,
                                    const std::string& data_format,
                                    const std::filesystem::path& out_dir) {
    const CycleSeries series = ingest(data_dir, data_format);
    const PipelineResult result = run_pipeline(series, cfg, {}, cfg.emit_reconstruction);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error("cannot create output directory '" + out_dir.string() +
                    "': " + ec.message());
    }

    write_text_atomic(out_dir / "ci_trace.csv", render_ci_trace(result.ci_records));
    write_text_atomic(out_dir / "scores.csv", render_scores(result.report));
    write_text_atomic(out_dir / "plot_envelope_calibration.csv",
                      spectrum_csv(result.calibration_spectrum));
    write_text_atomic(out_dir / "plot_envelope_final.csv",
                      spectrum_csv(result.final_spectrum));

    if (cfg.emit_reconstruction) {
        const std::filesystem::path recon_dir = out_dir / "reconstruction";
        std::filesystem::create_directories(recon_dir, ec);
        if (ec) {
            throw Error("cannot create output directory '" + recon_dir.string() +
                        "': " + ec.message());
        }
        for (std::size_t i = 0; i < result.reconstructions.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "recon_%04" PRId64 ".csv",
                          result.reconstructions[i].cycle_index);
            write_text_atomic(recon_dir / name,
                              render_reconstruction(result.reconstructions[i]));
        }
    }

    nlohmann::json report_json = {
        {"detection_cycle", optional_json(result.report.detection_cycle)},
        {"maintenance_cycle", optional_json(result.report.maintenance_cycle)},
        {"false_alarm_rate", optional_json(result.report.far)},
        {"roc_auc", optional_json(result.report.roc_auc)},
        {"pr_auc", optional_json(result.report.pr_auc)},
        {"reference_cci", result.reference_cci},
        {"n_cycles", series.cycles.size()},
        {"data_dir", data_dir.string()},
        {"data_format", data_format},
        {"ci_trace", "ci_trace.csv"},
        {"score_trace", "scores.csv"},
        {"envelope_calibration", "plot_envelope_calibration.csv"},
        {"envelope_final", "plot_envelope_final.csv"},
        {"config", config_echo(cfg)},
    };
    write_text_atomic(out_dir / "report.json", report_json.dump(2) + "\n");

    return result.report;
}

}  // namespace ldme
