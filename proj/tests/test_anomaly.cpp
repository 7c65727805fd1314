#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "ldme/anomaly.hpp"

using ldme::CiRecord;
using ldme::DecisionEvents;
using ldme::DetectorConfig;
using ldme::DetectorState;

namespace {

CiRecord make_record(double ci1, double ci2, long cycle = 0) {
    CiRecord rec;
    rec.cycle_index = cycle;
    rec.ci1 = ci1;
    rec.ci2 = ci2;
    rec.cci = (ci1 + ci2) / 2.0;
    return rec;
}

// Identity-covariance state centered at the origin: Mahalanobis distance of
// (ci1, ci2) is the plain Euclidean norm, and the MAD branch is
// |cci| / 1.4826.
DetectorState unit_state() {
    DetectorState state;
    state.frozen = true;
    state.mu = {0.0, 0.0};
    state.cov = {1.0, 0.0, 1.0};
    state.cov_inv = {1.0, 0.0, 1.0};
    state.cci_median = 0.0;
    state.cci_mad = 1.0;
    return state;
}

DetectorConfig decision_config(double mad_k, int sustain, int maintain) {
    DetectorConfig cfg;
    cfg.mad_k = mad_k;
    cfg.sustain_m = sustain;
    cfg.maintain_m = maintain;
    return cfg;
}

}  // namespace

TEST_CASE("median_of hand cases") {
    CHECK(ldme::median_of({1.0, 2.0, 3.0, 4.0, 5.0}) == 3.0);
    CHECK(ldme::median_of({1.0, 2.0, 3.0, 4.0}) == 2.5);
    CHECK(ldme::median_of({7.0}) == 7.0);
    CHECK_THROWS_AS(ldme::median_of({}), ldme::Error);
}

TEST_CASE("calibrate freezes median and MAD of the CCI trace") {
    // Two copies of {1..5}: median 3, MAD 1, same as the 5-point hand case
    // but long enough for the minimum calibration window.
    DetectorConfig cfg;
    cfg.calibration_cycles = 10;
    std::vector<CiRecord> records;
    for (int rep = 0; rep < 2; ++rep) {
        for (int k = 1; k <= 5; ++k) {
            // cci = k; spread ci2 so the covariance is not singular.
            records.push_back(make_record(2.0 * k - 0.1 * k, 0.1 * k));
        }
    }
    const DetectorState state = ldme::calibrate(records, cfg);
    CHECK(state.frozen);
    CHECK(state.cci_median == 3.0);
    CHECK(state.cci_mad == 1.0);
}

TEST_CASE("calibrate matches sample moments on a bivariate normal") {
    DetectorConfig cfg;
    cfg.calibration_cycles = 10000;
    std::mt19937_64 rng(101);
    std::normal_distribution<double> gauss;
    std::vector<CiRecord> records;
    records.reserve(10000);
    for (int i = 0; i < 10000; ++i) records.push_back(make_record(gauss(rng), gauss(rng)));

    const DetectorState state = ldme::calibrate(records, cfg);
    CHECK(std::abs(state.mu[0]) < 0.05);
    CHECK(std::abs(state.mu[1]) < 0.05);
    CHECK(state.cov[0] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(state.cov[2] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::abs(state.cov[1]) < 0.1);
}

TEST_CASE("calibrate input contracts") {
    DetectorConfig cfg;  // H = 50
    SUBCASE("too few records") {
        const std::vector<CiRecord> records(10, make_record(1.0, 0.5));
        CHECK_THROWS_AS(ldme::calibrate(records, cfg), ldme::Error);
    }
    SUBCASE("identical records have zero MAD") {
        const std::vector<CiRecord> records(50, make_record(1.0, 0.5));
        CHECK_THROWS_WITH_AS(
            ldme::calibrate(records, cfg),
            "calibrate: calibration CCI MAD is zero (degenerate, near-identical "
            "records); increase calibration_cycles or check the input data",
            ldme::Error);
    }
    SUBCASE("config validation") {
        DetectorConfig bad = cfg;
        bad.calibration_cycles = 5;
        CHECK_THROWS_AS(bad.validate(), ldme::Error);
        bad = cfg;
        bad.mad_k = 0.0;
        CHECK_THROWS_AS(bad.validate(), ldme::Error);
        bad = cfg;
        bad.sustain_m = 0;
        CHECK_THROWS_AS(bad.validate(), ldme::Error);
        bad = cfg;
        bad.maintain_m = bad.sustain_m - 1;
        CHECK_THROWS_AS(bad.validate(), ldme::Error);
        bad = cfg;
        bad.cov_ridge = 0.0;
        CHECK_THROWS_AS(bad.validate(), ldme::Error);
    }
}

TEST_CASE("score hand cases on a unit state") {
    const DetectorState state = unit_state();

    SUBCASE("the calibration center scores zero") {
        CiRecord rec;
        rec.ci1 = 0.0;
        rec.ci2 = 0.0;
        rec.cci = 0.0;
        CHECK(ldme::score(state, rec) == 0.0);
    }
    SUBCASE("one Mahalanobis unit along an axis scores one") {
        CiRecord rec;
        rec.ci1 = 1.0;
        rec.ci2 = 0.0;
        rec.cci = 0.0;
        CHECK(ldme::score(state, rec) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("three robust sigmas of CCI scores three") {
        CiRecord rec;
        rec.ci1 = 0.0;
        rec.ci2 = 0.0;
        rec.cci = 3.0 * 1.4826;
        CHECK(ldme::score(state, rec) == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("scores are never negative") {
        std::mt19937_64 rng(107);
        std::normal_distribution<double> gauss(0.0, 5.0);
        for (int i = 0; i < 200; ++i) {
            CiRecord rec;
            rec.ci1 = gauss(rng);
            rec.ci2 = gauss(rng);
            rec.cci = gauss(rng);
            CHECK(ldme::score(state, rec) >= 0.0);
        }
    }
    SUBCASE("an unfrozen state is rejected") {
        const DetectorState cold;
        CHECK_THROWS_AS(ldme::score(cold, make_record(1.0, 1.0)), ldme::Error);
    }
}

TEST_CASE("score is invariant under affine rescaling of the CI plane") {
    // Mahalanobis distance is affine-invariant; the relative ridge breaks the
    // identity only at the 1e-6 level. The MAD branch is checked under a
    // positive scale + shift of CCI.
    DetectorConfig cfg;
    cfg.calibration_cycles = 50;
    std::mt19937_64 rng(109);
    std::normal_distribution<double> gauss;

    std::vector<CiRecord> base;
    std::vector<CiRecord> mapped;
    const auto transform = [](const CiRecord& r) {
        CiRecord t;
        t.cycle_index = r.cycle_index;
        t.ci1 = 2.0 * r.ci1 + 0.3 * r.ci2 + 5.0;
        t.ci2 = -0.5 * r.ci1 + 1.7 * r.ci2 - 1.0;
        t.cci = 4.0 * r.cci + 2.0;
        return t;
    };
    for (int i = 0; i < 50; ++i) {
        CiRecord r;
        r.ci1 = gauss(rng);
        r.ci2 = 0.4 * r.ci1 + gauss(rng);
        r.cci = gauss(rng);
        base.push_back(r);
        mapped.push_back(transform(r));
    }
    const DetectorState s_base = ldme::calibrate(base, cfg);
    const DetectorState s_mapped = ldme::calibrate(mapped, cfg);

    for (int i = 0; i < 50; ++i) {
        CiRecord probe;
        probe.ci1 = gauss(rng);
        probe.ci2 = gauss(rng);
        probe.cci = gauss(rng);
        const double a = ldme::score(s_base, probe);
        const double b = ldme::score(s_mapped, transform(probe));
        CHECK(a == doctest::Approx(b).epsilon(1e-4));
    }
}

TEST_CASE("update_decision hysteresis semantics") {
    SUBCASE("quiet traces never detect") {
        DetectorState state = unit_state();
        const DetectorConfig cfg = decision_config(3.0, 3, 5);
        for (long c = 1; c <= 40; ++c) {
            const DecisionEvents ev = ldme::update_decision(state, 1.5, c, cfg);
            CHECK_FALSE(ev.alarm_started);
        }
        CHECK_FALSE(state.detection_cycle.has_value());
        CHECK_FALSE(state.maintenance_cycle.has_value());
    }
    SUBCASE("detection reports the start of the sustained run") {
        DetectorState state = unit_state();
        const DetectorConfig cfg = decision_config(3.0, 3, 5);
        for (long c = 1; c <= 9; ++c) ldme::update_decision(state, 0.5, c, cfg);
        ldme::update_decision(state, 4.0, 10, cfg);
        ldme::update_decision(state, 4.0, 11, cfg);
        const DecisionEvents ev = ldme::update_decision(state, 4.0, 12, cfg);
        CHECK(ev.detection == 10);
        CHECK(state.detection_cycle == 10);
    }
    SUBCASE("alternating scores keep resetting the counter") {
        DetectorState state = unit_state();
        const DetectorConfig cfg = decision_config(3.0, 3, 5);
        for (long c = 1; c <= 60; ++c) {
            ldme::update_decision(state, (c % 2 == 0) ? 0.0 : 4.0, c, cfg);
        }
        CHECK_FALSE(state.detection_cycle.has_value());
    }
    SUBCASE("detection latches through later quiet spells") {
        DetectorState state = unit_state();
        const DetectorConfig cfg = decision_config(3.0, 2, 4);
        ldme::update_decision(state, 4.0, 5, cfg);
        ldme::update_decision(state, 4.0, 6, cfg);
        REQUIRE(state.detection_cycle == 5);
        ldme::update_decision(state, 0.0, 7, cfg);
        for (long c = 20; c <= 23; ++c) ldme::update_decision(state, 4.0, c, cfg);
        CHECK(state.detection_cycle == 5);   // unchanged by the second run
        CHECK(state.maintenance_cycle == 23);  // counter reaches 4 here
        CHECK(*state.maintenance_cycle >= *state.detection_cycle);
    }
    SUBCASE("a score exactly at the threshold does not alarm") {
        DetectorState state = unit_state();
        const DetectorConfig cfg = decision_config(3.0, 1, 1);
        ldme::update_decision(state, 3.0, 1, cfg);
        CHECK_FALSE(state.detection_cycle.has_value());
        ldme::update_decision(state, std::nextafter(3.0, 4.0), 2, cfg);
        CHECK(state.detection_cycle == 2);
    }
    SUBCASE("raising the threshold never detects earlier") {
        std::mt19937_64 rng(113);
        std::uniform_real_distribution<double> uniform(0.0, 6.0);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> trace(80);
            for (double& v : trace) v = uniform(rng);

            const auto detect_at = [&](double k) {
                DetectorState state = unit_state();
                const DetectorConfig cfg = decision_config(k, 3, 5);
                for (std::size_t c = 0; c < trace.size(); ++c) {
                    ldme::update_decision(state, trace[c], static_cast<long>(c + 1), cfg);
                }
                return state.detection_cycle;
            };
            const std::optional<long> low = detect_at(2.0);
            const std::optional<long> high = detect_at(4.0);
            if (high.has_value()) {
                REQUIRE(low.has_value());
                CHECK(*high >= *low);
            }
        }
    }
}

TEST_CASE("evaluate matches hand-computable metrics") {
    SUBCASE("perfect separation") {
        const std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
        const std::vector<int> labels{0, 0, 1, 1};
        const ldme::EvalMetrics m = ldme::evaluate(scores, labels, 0.5);
        CHECK(m.far == 0.0);
        CHECK(m.roc_auc == 1.0);
        CHECK(m.pr_auc == 1.0);
    }
    SUBCASE("all scores tied") {
        const std::vector<double> scores(10, 0.7);
        const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
        const ldme::EvalMetrics m = ldme::evaluate(scores, labels, 0.5);
        CHECK(m.roc_auc == doctest::Approx(0.5).epsilon(1e-12));
        // One tie group: precision at full recall equals prevalence.
        CHECK(m.pr_auc == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("FAR counts only healthy cycles above the threshold") {
        const std::vector<double> scores{1.0, 2.0, 3.0, 9.0};
        const std::vector<int> labels{0, 0, 0, 1};
        const ldme::EvalMetrics m = ldme::evaluate(scores, labels, 2.0);
        CHECK(m.far == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("single-class labels yield no AUCs") {
        const std::vector<double> scores{1.0, 2.0};
        const ldme::EvalMetrics healthy_only =
            ldme::evaluate(scores, std::vector<int>{0, 0}, 1.5);
        CHECK(healthy_only.far == 0.5);
        CHECK_FALSE(healthy_only.roc_auc.has_value());
        CHECK_FALSE(healthy_only.pr_auc.has_value());

        const ldme::EvalMetrics faulty_only =
            ldme::evaluate(scores, std::vector<int>{1, 1}, 1.5);
        CHECK_FALSE(faulty_only.far.has_value());
        CHECK_FALSE(faulty_only.roc_auc.has_value());
    }
    SUBCASE("input contracts") {
        CHECK_THROWS_AS(
            ldme::evaluate(std::vector<double>{1.0}, std::vector<int>{0, 1}, 0.5),
            ldme::Error);
        CHECK_THROWS_AS(ldme::evaluate(std::vector<double>{}, std::vector<int>{}, 0.5),
                        ldme::Error);
    }
}

TEST_CASE("evaluate ROC AUC equals the all-pairs oracle") {
    // Quantized random scores force plenty of ties; the grouped trapezoid
    // must equal P(faulty > healthy) + 0.5 P(tie) over all pairs.
    std::mt19937_64 rng(127);
    std::uniform_int_distribution<int> level(0, 9);
    std::uniform_int_distribution<int> coin(0, 1);

    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 40 + static_cast<std::size_t>(trial) * 6;  // up to 184
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        int ones = 0;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = 0.1 * level(rng);
            labels[i] = coin(rng);
            ones += labels[i];
        }
        if (ones == 0 || ones == static_cast<int>(n)) continue;

        double wins = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == 0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (labels[j] != 0) continue;
                ++pairs;
                if (scores[i] > scores[j]) wins += 1.0;
                else if (scores[i] == scores[j]) wins += 0.5;
            }
        }
        const double oracle = wins / static_cast<double>(pairs);
        const ldme::EvalMetrics m = ldme::evaluate(scores, labels, 0.5);
        REQUIRE(m.roc_auc.has_value());
        CHECK(*m.roc_auc == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("evaluate on random scores sits near chance") {
    std::mt19937_64 rng(131);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::size_t n = 10000;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = uniform(rng);
        labels[i] = static_cast<int>(i % 2);
    }
    const ldme::EvalMetrics m = ldme::evaluate(scores, labels, 0.5);
    REQUIRE(m.roc_auc.has_value());
    CHECK(*m.roc_auc == doctest::Approx(0.5).epsilon(0.04));
}
