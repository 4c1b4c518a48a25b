#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "dyspn/metrics.hpp"

using namespace dyspn;

TEST_CASE("perfect prediction") {
    DepthGrid pred(2, 2), gt(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) pred.at(i, j) = gt.at(i, j) = 1.0 + i + j;
    const auto report = evaluate(pred, gt);
    CHECK(report.rmse_mm == 0.0);
    CHECK(report.mae_mm == 0.0);
    CHECK(report.irmse == 0.0);
    CHECK(report.rel == 0.0);
    CHECK(report.delta[0] == 100.0);
    CHECK(report.delta[1] == 100.0);
    CHECK(report.delta[2] == 100.0);
    CHECK(report.valid_count == 4);
}

TEST_CASE("hand fixture pred=[2,2] gt=[1,3]") {
    DepthGrid pred(1, 2), gt(1, 2);
    pred.at(0, 0) = pred.at(0, 1) = 2.0;
    gt.at(0, 0) = 1.0;
    gt.at(0, 1) = 3.0;
    const auto report = evaluate(pred, gt);
    CHECK(report.rmse_mm == doctest::Approx(1000.0));
    CHECK(report.mae_mm == doctest::Approx(1000.0));
    CHECK(report.rel == doctest::Approx((1.0 + 1.0 / 3.0) / 2.0));
    // Ratios are 2 and 1.5; both >= 1.25 so delta_1.25 = 0.
    CHECK(report.delta[0] == 0.0);
    // 1.5 < 1.5625 but 2 >= 1.5625 -> 50%; 2 >= 1.953125 too, so still 50%.
    CHECK(report.delta[1] == 50.0);
    CHECK(report.delta[2] == 50.0);
    // iRMSE: (1/2 - 1/1)*1000 = -500; (1/2 - 1/3)*1000 = 166.67 (1/km).
    CHECK(report.irmse ==
          doctest::Approx(std::sqrt((500.0 * 500.0 + (1000.0 / 6) * (1000.0 / 6)) / 2.0)));
    CHECK(report.imae == doctest::Approx((500.0 + 1000.0 / 6) / 2.0));
}

TEST_CASE("invalid ground truth excluded, empty set errors") {
    DepthGrid pred(1, 1), gt(1, 1);
    pred.at(0, 0) = 5.0;
    CHECK_THROWS_WITH_AS(evaluate(pred, gt), doctest::Contains("no valid"),
                         std::invalid_argument);
}

TEST_CASE("nonpositive prediction under inverse metrics errors") {
    DepthGrid pred(1, 2), gt(1, 2);
    pred.at(0, 0) = 0.0;
    pred.at(0, 1) = 1.0;
    gt.at(0, 0) = 1.0;
    gt.at(0, 1) = 1.0;
    CHECK_THROWS_WITH_AS(evaluate(pred, gt), doctest::Contains("nonpositive"),
                         std::invalid_argument);
}

TEST_CASE("shape mismatch errors") {
    DepthGrid pred(2, 2), gt(2, 3);
    CHECK_THROWS_AS(evaluate(pred, gt), std::invalid_argument);
}

TEST_CASE("scale equivariance") {
    std::mt19937_64 rng(99);
    DepthGrid pred(4, 4), gt(4, 4);
    for (std::size_t i = 0; i < 16; ++i) {
        pred.values()[i] = 1.0 + (rng() >> 11) * 0x1.0p-53 * 9.0;
        gt.values()[i] = 1.0 + (rng() >> 11) * 0x1.0p-53 * 9.0;
    }
    const auto base = evaluate(pred, gt);
    for (const double c : {0.5, 2.0, 256.0}) {
        DepthGrid sp(4, 4), sg(4, 4);
        for (std::size_t i = 0; i < 16; ++i) {
            sp.values()[i] = c * pred.values()[i];
            sg.values()[i] = c * gt.values()[i];
        }
        const auto scaled = evaluate(sp, sg);
        CHECK(scaled.rel == doctest::Approx(base.rel).epsilon(1e-12));
        for (int k = 0; k < 3; ++k) CHECK(scaled.delta[k] == base.delta[k]);
        CHECK(scaled.rmse_mm == doctest::Approx(c * base.rmse_mm).epsilon(1e-12));
        CHECK(scaled.mae_mm == doctest::Approx(c * base.mae_mm).epsilon(1e-12));
        CHECK(scaled.irmse == doctest::Approx(base.irmse / c).epsilon(1e-12));
        CHECK(scaled.imae == doctest::Approx(base.imae / c).epsilon(1e-12));
    }
}

TEST_CASE("delta monotone in tau") {
    std::mt19937_64 rng(7);
    DepthGrid pred(6, 6), gt(6, 6);
    for (std::size_t i = 0; i < 36; ++i) {
        pred.values()[i] = 0.5 + (rng() >> 11) * 0x1.0p-53 * 9.0;
        gt.values()[i] = 0.5 + (rng() >> 11) * 0x1.0p-53 * 9.0;
    }
    const auto report = evaluate(pred, gt);
    CHECK(report.delta[0] <= report.delta[1]);
    CHECK(report.delta[1] <= report.delta[2]);
}

TEST_CASE("permutation invariance") {
    DepthGrid pred(1, 4), gt(1, 4);
    const double pv[4] = {1.0, 2.0, 3.0, 4.0};
    const double gv[4] = {1.1, 1.9, 3.3, 3.7};
    for (int i = 0; i < 4; ++i) {
        pred.values()[i] = pv[i];
        gt.values()[i] = gv[i];
    }
    DepthGrid pred2(1, 4), gt2(1, 4);
    const int perm[4] = {2, 0, 3, 1};
    for (int i = 0; i < 4; ++i) {
        pred2.values()[i] = pv[perm[i]];
        gt2.values()[i] = gv[perm[i]];
    }
    const auto a = evaluate(pred, gt);
    const auto b = evaluate(pred2, gt2);
    CHECK(a.rmse_mm == doctest::Approx(b.rmse_mm).epsilon(1e-14));
    CHECK(a.rel == doctest::Approx(b.rel).epsilon(1e-14));
}

TEST_CASE("rmse curve over a constant tape") {
    DepthGrid g(2, 2);
    for (std::size_t i = 0; i < 4; ++i) g.values()[i] = 2.0;
    DepthGrid gt(2, 2);
    for (std::size_t i = 0; i < 4; ++i) gt.values()[i] = 1.0;
    PropagationTape tape;
    tape.grids = {g, g, g};
    const auto curve = rmse_curve(tape, gt);
    REQUIRE(curve.size() == 3);
    for (double v : curve) CHECK(v == doctest::Approx(1000.0));
}
