#include <doctest.h>

#include "fdia/detection.hpp"
#include "fdia/errors.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace fdia;

namespace {

// P(attack error > normal error) + 0.5 P(tie), counted pair by pair.
double mann_whitney(const std::vector<double>& normal, const std::vector<double>& attack) {
    double wins = 0.0;
    for (double a : attack)
        for (double n : normal) wins += a > n ? 1.0 : (a == n ? 0.5 : 0.0);
    return wins / (static_cast<double>(normal.size()) * static_cast<double>(attack.size()));
}

}  // namespace

TEST_CASE("nearest-rank threshold") {
    const std::vector<double> v = {5, 1, 4, 2, 3, 6, 8, 7, 10, 9};
    CHECK(compute_threshold(v, 90.0).tau == doctest::Approx(9.0));
    CHECK(compute_threshold(v, 95.0).tau == doctest::Approx(10.0));
    CHECK(compute_threshold(v, 100.0).tau == doctest::Approx(10.0));
    CHECK(compute_threshold(v, 10.0).tau == doctest::Approx(1.0));
    CHECK(compute_threshold(v, 99.0).alpha == 99.0);
    CHECK_THROWS_AS(compute_threshold(v, 0.0), InputError);
    CHECK_THROWS_AS(compute_threshold(v, 101.0), InputError);
    CHECK_THROWS_AS(compute_threshold(std::vector<double>{}, 50.0), InputError);
}

TEST_CASE("classification and counts") {
    const Threshold th{99.0, 1.0};
    CHECK(classify(1.0, th) == Label::Normal);
    CHECK(classify(1.0001, th) == Label::Attack);
    const std::vector<double> normal = {0.1, 0.5, 1.5, 0.2};
    const std::vector<double> attack = {2.0, 0.9, 3.0};
    const auto r = evaluate_errors(normal, attack, th);
    CHECK(r.tp_count == 2);
    CHECK(r.fn_count == 1);
    CHECK(r.fp_count == 1);
    CHECK(r.tn_count == 3);
    CHECK(r.tp == doctest::Approx(2.0 / 3));
    CHECK(r.fp == doctest::Approx(0.25));
    CHECK(r.tp + r.fn == doctest::Approx(1.0));
    CHECK(r.tn + r.fp == doctest::Approx(1.0));
}

TEST_CASE("validation false positives stay within the percentile") {
    std::mt19937_64 rng(6);
    std::exponential_distribution<double> e(1.0);
    for (int n : {7, 100, 1752}) {
        std::vector<double> val(static_cast<std::size_t>(n));
        for (auto& v : val) v = e(rng);
        for (double alpha : kDefaultAlphaSweep) {
            const auto th = compute_threshold(val, alpha);
            const auto self = evaluate_errors(val, std::vector<double>{1.0}, th);
            CHECK(self.fp <= (100.0 - alpha) / 100.0 + 1.0 / n + 1e-12);
        }
    }
}

TEST_CASE("rates are monotone in alpha") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> val(500), normal(500), attack(500);
    for (auto& v : val) v = std::abs(nd(rng));
    for (auto& v : normal) v = std::abs(nd(rng));
    for (auto& v : attack) v = std::abs(nd(rng)) + 0.8;
    const std::vector<double> alphas = {50, 60, 70, 80, 90, 95, 96, 97, 98, 99, 99.5, 100};
    const auto reports = threshold_sweep(val, normal, attack, alphas);
    REQUIRE(reports.size() == alphas.size());
    for (std::size_t k = 1; k < reports.size(); ++k) {
        CHECK(reports[k].tau >= reports[k - 1].tau);
        CHECK(reports[k].tp <= reports[k - 1].tp);
        CHECK(reports[k].fp <= reports[k - 1].fp);
    }
}

TEST_CASE("roc area equals the rank statistic") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> normal(40 + trial), attack(30);
        // coarse rounding creates ties inside and across the classes
        for (auto& v : normal) v = std::round(nd(rng) * 4.0) / 4.0;
        for (auto& v : attack) v = std::round((nd(rng) + 0.5 * trial / 10.0) * 4.0) / 4.0;
        const auto roc = roc_curve(normal, attack);
        CHECK(roc.auc == doctest::Approx(mann_whitney(normal, attack)).epsilon(1e-12));
        CHECK(roc.points.front().fp_rate == 0.0);
        CHECK(roc.points.front().tp_rate == 0.0);
        CHECK(roc.points.back().fp_rate == 1.0);
        CHECK(roc.points.back().tp_rate == 1.0);
        for (std::size_t k = 1; k < roc.points.size(); ++k) {
            CHECK(roc.points[k].fp_rate >= roc.points[k - 1].fp_rate);
            CHECK(roc.points[k].tp_rate >= roc.points[k - 1].tp_rate);
        }
    }
}

TEST_CASE("roc extremes") {
    const std::vector<double> lo = {0.1, 0.2}, hi = {0.3, 0.4};
    CHECK(roc_curve(lo, hi).auc == doctest::Approx(1.0));
    CHECK(roc_curve(hi, lo).auc == doctest::Approx(0.0));
    const auto tied = roc_curve(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0});
    CHECK(tied.auc == doctest::Approx(0.5));
    CHECK(tied.points.size() == 2);
    // separable classes give the staircase (0,0) (0,1) (1,1)
    const auto stair = roc_curve(lo, hi);
    REQUIRE(stair.points.size() == 5);
    CHECK(stair.points[2].fp_rate == 0.0);
    CHECK(stair.points[2].tp_rate == 1.0);
}

TEST_CASE("csv output") {
    std::ostringstream os;
    const std::vector<double> val = {1, 2, 3, 4}, normal = {1, 5}, attack = {6, 0};
    write_report_csv(os, threshold_sweep(val, normal, attack, {50.0, 100.0}));
    CHECK(os.str() == "alpha,tau,TP,FN,TN,FP\n50,2,0.5,0.5,0.5,0.5\n100,4,0.5,0.5,0.5,0.5\n");
    std::ostringstream roc;
    write_roc_csv(roc, roc_curve(std::vector<double>{0.0}, std::vector<double>{1.0}));
    CHECK(roc.str() == "fp_rate,tp_rate\n0,0\n0,1\n1,1\n");
}
