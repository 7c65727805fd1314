#include "ldme/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ldme {

void DetectorConfig::validate() const {
    if (calibration_cycles < 10) throw Error("DetectorConfig: calibration_cycles must be >= 10");
    if (!(mad_k > 0.0)) throw Error("DetectorConfig: mad_k must be positive");
    if (sustain_m < 1) throw Error("DetectorConfig: sustain_m must be >= 1");
    if (maintain_m < sustain_m) throw Error("DetectorConfig: maintain_m must be >= sustain_m");
    if (!(cov_ridge > 0.0)) throw Error("DetectorConfig: cov_ridge must be positive");
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw Error("median_of: empty input");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double med = values[mid];
    if (values.size() % 2 == 0) {
        const double lower = *std::max_element(values.begin(), values.begin() + mid);
        med = 0.5 * (med + lower);
    }
    return med;
}

DetectorState calibrate(std::span<const CiRecord> records, const DetectorConfig& cfg) {
    cfg.validate();
    const auto h = static_cast<std::size_t>(cfg.calibration_cycles);
    if (records.size() < h) {
        throw Error("calibrate: need " + std::to_string(h) + " calibration records, got " +
                    std::to_string(records.size()));
    }

    DetectorState state;
    double s1 = 0.0;
    double s2 = 0.0;
    std::vector<double> ccis(h);
    for (std::size_t i = 0; i < h; ++i) {
        const CiRecord& r = records[i];
        require_finite(std::array{r.ci1, r.ci2, r.cci}, "calibrate: CI record");
        s1 += r.ci1;
        s2 += r.ci2;
        ccis[i] = r.cci;
    }
    state.mu = {s1 / static_cast<double>(h), s2 / static_cast<double>(h)};

    double c11 = 0.0;
    double c12 = 0.0;
    double c22 = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
        const double d1 = records[i].ci1 - state.mu[0];
        const double d2 = records[i].ci2 - state.mu[1];
        c11 += d1 * d1;
        c12 += d1 * d2;
        c22 += d2 * d2;
    }
    const double denom = static_cast<double>(h - 1);
    state.cov = {c11 / denom, c12 / denom, c22 / denom};

    state.cci_median = median_of(ccis);
    std::vector<double> devs(h);
    for (std::size_t i = 0; i < h; ++i) devs[i] = std::abs(ccis[i] - state.cci_median);
    state.cci_mad = median_of(devs);
    if (state.cci_mad == 0.0) {
        throw Error("calibrate: calibration CCI MAD is zero (degenerate, near-identical "
                    "records); increase calibration_cycles or check the input data");
    }

    // Scale-free ridge keeps the 2x2 covariance invertible even when CI1 and
    // CI2 are almost perfectly correlated.
    const double ridge = cfg.cov_ridge * (state.cov[0] + state.cov[2]) / 2.0;
    const double a = state.cov[0] + ridge;
    const double b = state.cov[1];
    const double c = state.cov[2] + ridge;
    const double det = a * c - b * b;
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw Error("calibrate: CI covariance is singular even after ridge "
                    "regularization; increase calibration_cycles");
    }
    state.cov_inv = {c / det, -b / det, a / det};
    state.frozen = true;
    return state;
}

double score(const DetectorState& state, const CiRecord& rec) {
    if (!state.frozen) throw Error("score: detector state is not calibrated");
    require_finite(std::array{rec.ci1, rec.ci2, rec.cci}, "score: CI record");

    const double mad_dist = std::abs(rec.cci - state.cci_median) / (state.cci_mad * 1.4826);
    const double d1 = rec.ci1 - state.mu[0];
    const double d2 = rec.ci2 - state.mu[1];
    const double q = state.cov_inv[0] * d1 * d1 + 2.0 * state.cov_inv[1] * d1 * d2 +
                     state.cov_inv[2] * d2 * d2;
    const double maha = std::sqrt(std::max(0.0, q));
    return std::max(mad_dist, maha);
}

DecisionEvents update_decision(DetectorState& state, double score_value, long cycle,
                               const DetectorConfig& cfg) {
    if (!state.frozen) throw Error("update_decision: detector state is not calibrated");
    DecisionEvents events;
    if (score_value > cfg.mad_k) {
        if (state.consecutive == 0) {
            state.run_start = cycle;
            events.alarm_started = true;
        }
        ++state.consecutive;
        if (!state.detection_cycle && state.consecutive >= cfg.sustain_m) {
            state.detection_cycle = state.run_start;
            events.detection = state.detection_cycle;
        }
        if (!state.maintenance_cycle && state.consecutive >= cfg.maintain_m) {
            state.maintenance_cycle = cycle;
            events.maintenance = state.maintenance_cycle;
        }
    } else {
        state.consecutive = 0;
    }
    return events;
}

namespace {

struct ThresholdGroup {
    double value;
    std::size_t positives;
    std::size_t negatives;
};

}  // namespace

EvalMetrics evaluate(std::span<const double> scores, std::span<const int> labels,
                     double threshold) {
    if (scores.size() != labels.size()) {
        throw Error("evaluate: scores and labels differ in length");
    }
    if (scores.empty()) throw Error("evaluate: empty input");

    std::size_t healthy = 0;
    std::size_t faulty = 0;
    std::size_t false_alarms = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0) {
            ++faulty;
        } else {
            ++healthy;
            if (scores[i] > threshold) ++false_alarms;
        }
    }

    EvalMetrics metrics;
    if (healthy > 0) {
        metrics.far = static_cast<double>(false_alarms) / static_cast<double>(healthy);
    }
    if (healthy == 0 || faulty == 0) return metrics;  // AUCs undefined for one class

    // Group tied scores so each distinct value is one threshold step.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<ThresholdGroup> groups;
    for (std::size_t i = 0; i < order.size();) {
        ThresholdGroup g{scores[order[i]], 0, 0};
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == g.value) {
            if (labels[order[j]] != 0) ++g.positives;
            else ++g.negatives;
            ++j;
        }
        groups.push_back(g);
        i = j;
    }

    const double p = static_cast<double>(faulty);
    const double n = static_cast<double>(healthy);
    double tp = 0.0;
    double fp = 0.0;
    double roc = 0.0;
    double pr = 0.0;
    double prev_recall = 0.0;
    for (const ThresholdGroup& g : groups) {
        const double dtp = static_cast<double>(g.positives);
        const double dfp = static_cast<double>(g.negatives);
        // ROC: trapezoid between consecutive operating points.
        roc += (dfp / n) * (tp / p + 0.5 * dtp / p);
        tp += dtp;
        fp += dfp;
        const double recall = tp / p;
        if (tp + fp > 0.0 && recall > prev_recall) {
            pr += (recall - prev_recall) * (tp / (tp + fp));
            prev_recall = recall;
        }
    }
    metrics.roc_auc = roc;
    metrics.pr_auc = pr;
    return metrics;
}

}  // namespace ldme
