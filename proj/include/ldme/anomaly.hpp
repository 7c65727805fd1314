#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "ldme/indicators.hpp"
#include "ldme/signal.hpp"

namespace ldme {

struct DetectorConfig {
    int calibration_cycles = 50;  // H
    double mad_k = 3.0;           // alarm threshold in robust sigma units
    int sustain_m = 5;            // consecutive cycles for c_d
    int maintain_m = 15;          // consecutive cycles for c_m
    double cov_ridge = 1e-6;      // relative ridge added to the CI covariance

    void validate() const;
};

struct DetectorState {
    bool frozen = false;
    std::array<double, 2> mu = {0.0, 0.0};        // mean of (CI1, CI2)
    std::array<double, 3> cov = {0.0, 0.0, 0.0};  // c11, c12, c22
    std::array<double, 3> cov_inv = {0.0, 0.0, 0.0};
    double cci_median = 0.0;
    double cci_mad = 0.0;
    int consecutive = 0;
    long run_start = 0;
    std::optional<long> detection_cycle;
    std::optional<long> maintenance_cycle;
};

struct DecisionEvents {
    bool alarm_started = false;
    std::optional<long> detection;
    std::optional<long> maintenance;
};

struct EvalMetrics {
    std::optional<double> far;
    std::optional<double> roc_auc;
    std::optional<double> pr_auc;
};

struct DetectionReport {
    std::optional<long> detection_cycle;
    std::optional<long> maintenance_cycle;
    std::vector<long> cycles;
    std::vector<double> scores;
    std::optional<double> far;
    std::optional<double> roc_auc;
    std::optional<double> pr_auc;
};

// Freezes mean/covariance of (CI1, CI2) and median/MAD of CCI over the first
// H records.
DetectorState calibrate(std::span<const CiRecord> records, const DetectorConfig& cfg);

// max( |CCI - median| / (MAD * 1.4826), Mahalanobis distance of (CI1, CI2) ).
double score(const DetectorState& state, const CiRecord& rec);

// Sustained-alarm hysteresis: scores above mad_k grow a consecutive counter,
// anything else resets it. c_d latches to the start of the first run that
// reaches sustain_m; c_m latches to the cycle where a run reaches maintain_m.
DecisionEvents update_decision(DetectorState& state, double score_value, long cycle,
                               const DetectorConfig& cfg);

// FAR at the given threshold over healthy-labeled entries, plus threshold-free
// ROC / PR AUCs (ties grouped). AUCs are absent when labels are single-class.
EvalMetrics evaluate(std::span<const double> scores, std::span<const int> labels,
                     double threshold);

double median_of(std::vector<double> values);

}  // namespace ldme
