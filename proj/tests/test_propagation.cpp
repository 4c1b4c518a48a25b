#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dyspn/fixtures.hpp"
#include "dyspn/propagation.hpp"

using namespace dyspn;

namespace {

PropagationConfig reference_config(int steps) {
    PropagationConfig config;
    config.steps = steps;
    config.epsilon = 0.0;
    return config;
}

// Single-pixel, single-neighbor harness on a 1x2 grid with a one-ring spec.
struct TinyCase {
    DepthGrid h_t{1, 2};
    DepthGrid h_0{1, 2};
    AffinityVolume affinity{48, 1, 2};
    AttentionStack attention{1, 4, 1, 2};
    NeighborhoodSpec spec = build_neighborhood(Variant::Ring7x7, 1, 2);
};

}  // namespace

TEST_CASE("gather center pixel of 3x3") {
    DepthGrid h(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) h.at(i, j) = 1 + i * 3 + j;
    const auto spec = build_neighborhood(Variant::Ring7x7, 3, 3);
    const auto gathered = gather_neighbors(h, spec);
    // Ring 1 at the center pixel: all 8 surrounding values in bounds.
    int in = 0;
    double sum = 0.0;
    for (int s = 0; s < 8; ++s) {
        CHECK(gathered.in_bounds(s, 1, 1));
        sum += gathered.value(s, 1, 1);
        ++in;
    }
    CHECK(in == 8);
    CHECK(sum == doctest::Approx(45.0 - 5.0));  // all but the center

    // Corner pixel: only 3 of ring 1 in bounds.
    int corner_in = 0;
    for (int s = 0; s < 8; ++s)
        if (gathered.in_bounds(s, 0, 0)) ++corner_in;
    CHECK(corner_in == 3);
}

TEST_CASE("bilinear deformable sample") {
    // Offset (0.5, 0) from row 0 onto column values 1 and 3 -> 2.0.
    OffsetField field(2, 8, 2, 1);
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 8; ++s)
            for (int i = 0; i < 2; ++i) {
                field.dy(r, s, i, 0) = 0.5 - i;  // both rows sample midway
                field.dx(r, s, i, 0) = 0.0;
            }
    const auto spec = build_neighborhood(Variant::Deformable, 2, 1, std::move(field));
    DepthGrid h(2, 1);
    h.at(0, 0) = 1.0;
    h.at(1, 0) = 3.0;
    const auto gathered = gather_neighbors(h, spec);
    // Fractional slots start after ring 1's 8 integer slots.
    CHECK(gathered.in_bounds(8, 0, 0));
    CHECK(gathered.value(8, 0, 0) == doctest::Approx(2.0));
}

TEST_CASE("bilinear support partially out of bounds is masked") {
    OffsetField field(2, 8, 1, 2);
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 8; ++s)
            for (int j = 0; j < 2; ++j) {
                field.dy(r, s, 0, j) = 0.5;  // needs row 1 of a 1-row grid
                field.dx(r, s, 0, j) = 0.0;
            }
    const auto spec = build_neighborhood(Variant::Deformable, 1, 2, std::move(field));
    DepthGrid h(1, 2);
    h.at(0, 0) = 1.0;
    h.at(0, 1) = 2.0;
    const auto gathered = gather_neighbors(h, spec);
    CHECK_FALSE(gathered.in_bounds(8, 0, 0));
    CHECK(gathered.value(8, 0, 0) == 0.0);
}

TEST_CASE("step hand examples") {
    TinyCase tc;
    // Pixel (0,0); its only in-bounds ring-1 neighbor is (0,1): offset (0,1),
    // which is slot index 4 in row-major ring order.
    const int slot = 4;
    tc.h_t.at(0, 0) = 1.0;
    tc.h_t.at(0, 1) = 2.0;

    SUBCASE("positive weight") {
        tc.h_0.at(0, 0) = 1.0;
        tc.affinity.at(slot, 0, 0) = 0.5;
        tc.attention.at(0, 0, 0, 0) = 1.0;  // pi_0
        tc.attention.at(0, 1, 0, 0) = 1.0;  // ring 1
        const auto out = step(tc.h_t, tc.h_0, tc.affinity, tc.attention, 0, tc.spec,
                              reference_config(1));
        // S = S' = 1.5, out = (0.5*2 + 1)/1.5
        CHECK(out.at(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("negative weight") {
        tc.h_0.at(0, 0) = 3.0;
        tc.affinity.at(slot, 0, 0) = -0.5;
        tc.attention.at(0, 0, 0, 0) = 1.0;
        tc.attention.at(0, 1, 0, 0) = 1.0;
        const auto out = step(tc.h_t, tc.h_0, tc.affinity, tc.attention, 0, tc.spec,
                              reference_config(1));
        // S = 0.5, S' = 1.5, out = (-1 + 1)/1.5 + (1 - 1/3)*3 = 2
        CHECK(out.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("suppressed neighbors give a fixed point") {
        tc.h_0.at(0, 0) = 5.0;
        tc.affinity.at(slot, 0, 0) = 0.7;
        tc.attention.at(0, 0, 0, 0) = 1.0;  // pi_0 = 1, all ring attention 0
        const auto out = step(tc.h_t, tc.h_0, tc.affinity, tc.attention, 0, tc.spec,
                              reference_config(1));
        CHECK(out.at(0, 0) == 1.0);  // exactly h_t
    }
    SUBCASE("all attention zero replaces with h_0") {
        tc.h_0.at(0, 0) = 5.0;
        tc.affinity.at(slot, 0, 0) = 0.7;
        const auto out = step(tc.h_t, tc.h_0, tc.affinity, tc.attention, 0, tc.spec,
                              reference_config(1));
        CHECK(out.at(0, 0) == 5.0);  // exactly h_0
    }
}

TEST_CASE("propagate N=1 equals step") {
    const auto bundle = fixtures::make_random_bundle({.variant = Variant::Ring7x7,
                                                      .height = 5,
                                                      .width = 5,
                                                      .steps = 1,
                                                      .seed = 3});
    PropagationConfig config;
    config.steps = 1;
    const auto [out, tape] =
        propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, config);
    const auto single = step(bundle.h0, bundle.h0, bundle.affinity, bundle.attention, 0,
                             bundle.spec, config);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(out.at(i, j) == single.at(i, j));
    CHECK(tape.steps() == 1);
}

TEST_CASE("global fixed point with zero neighbor attention") {
    // pi_0 = 1, rings 0: every step leaves the grid unchanged.
    const auto spec = build_neighborhood(Variant::Ring7x7, 4, 4);
    const auto bundle = fixtures::make_random_bundle({.variant = Variant::Ring7x7,
                                                      .height = 4,
                                                      .width = 4,
                                                      .steps = 6,
                                                      .seed = 11});
    AttentionStack attention(6, 4, 4, 4);
    for (int t = 0; t < 6; ++t)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) attention.at(t, 0, i, j) = 1.0;
    const auto [out, tape] =
        propagate(bundle.h0, bundle.affinity, attention, spec, reference_config(6));
    (void)tape;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(out.at(i, j) == bundle.h0.at(i, j));
}

TEST_CASE("affine combination identity") {
    // With eps = 0 the coefficients of neighbors, h_t and h_0 sum to 1:
    // check via two evaluations, shifting all value inputs by a constant.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto bundle = fixtures::make_random_bundle({.variant = Variant::Ring7x7,
                                                          .height = 6,
                                                          .width = 6,
                                                          .steps = 1,
                                                          .seed = seed});
        const double shift = 2.5;
        DepthGrid shifted(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) shifted.at(i, j) = bundle.h0.at(i, j) + shift;
        const auto cfg = reference_config(1);
        const auto base = step(bundle.h0, bundle.h0, bundle.affinity, bundle.attention, 0,
                               bundle.spec, cfg);
        const auto moved = step(shifted, shifted, bundle.affinity, bundle.attention, 0,
                                bundle.spec, cfg);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                CHECK(moved.at(i, j) - base.at(i, j) == doctest::Approx(shift).epsilon(1e-12));
    }
}

TEST_CASE("convex combination bound with nonnegative weights") {
    const auto bundle = fixtures::make_random_bundle({.variant = Variant::Dilated,
                                                      .height = 6,
                                                      .width = 6,
                                                      .steps = 1,
                                                      .nonnegative_weights = true,
                                                      .seed = 21});
    const auto cfg = reference_config(1);
    const auto out = step(bundle.h0, bundle.h0, bundle.affinity, bundle.attention, 0,
                          bundle.spec, cfg);
    double lo = 1e300, hi = -1e300;
    for (double v : bundle.h0.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : out.values()) {
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("emulate_cspn equals propagate with all-ones attention") {
    const auto bundle = fixtures::make_random_bundle({.variant = Variant::Dilated,
                                                      .height = 5,
                                                      .width = 5,
                                                      .steps = 4,
                                                      .seed = 9});
    PropagationConfig config;
    config.steps = 4;
    const auto baseline = emulate_cspn(bundle.h0, bundle.affinity, bundle.spec, config);
    const auto ones = AttentionStack::constant(4, bundle.spec.ring_count() + 1, 5, 5, 1.0);
    const auto [expect, tape] =
        propagate(bundle.h0, bundle.affinity, ones, bundle.spec, config);
    (void)tape;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(baseline.at(i, j) == expect.at(i, j));
}

TEST_CASE("emulate_cspn with zero weights returns h_0") {
    const auto spec = build_neighborhood(Variant::Ring7x7, 4, 4);
    DepthGrid h0(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) h0.at(i, j) = 1.0 + i + j;
    const AffinityVolume zeros(48, 4, 4);
    PropagationConfig config;
    config.steps = 5;
    config.epsilon = 0.0;
    const auto out = emulate_cspn(h0, zeros, spec, config);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(out.at(i, j) == h0.at(i, j));
}

TEST_CASE("thread count does not change results") {
    const auto bundle = fixtures::make_random_bundle({.variant = Variant::Ring7x7,
                                                      .height = 16,
                                                      .width = 13,
                                                      .steps = 4,
                                                      .seed = 5});
    PropagationConfig one;
    one.steps = 4;
    PropagationConfig eight = one;
    eight.threads = 8;
    const auto [a, ta] =
        propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, one);
    const auto [b, tb] =
        propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, eight);
    (void)ta;
    (void)tb;
    for (std::size_t idx = 0; idx < a.size(); ++idx)
        CHECK(a.values()[idx] == b.values()[idx]);  // bit identical
}

TEST_CASE("f32 precision runs and stays close to f64") {
    const auto bundle = fixtures::make_random_bundle({.variant = Variant::Deformable,
                                                      .height = 6,
                                                      .width = 6,
                                                      .steps = 3,
                                                      .integral_offsets = false,
                                                      .seed = 17});
    PropagationConfig f64;
    f64.steps = 3;
    PropagationConfig f32 = f64;
    f32.precision = Precision::F32;
    const auto [a, ta] =
        propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, f64);
    const auto [b, tb] =
        propagate(bundle.h0, bundle.affinity, bundle.attention, bundle.spec, f32);
    (void)ta;
    (void)tb;
    for (std::size_t idx = 0; idx < a.size(); ++idx) {
        const double denom = std::max(1.0, std::abs(a.values()[idx]));
        CHECK(std::abs(a.values()[idx] - b.values()[idx]) / denom < 1e-4);
    }
}
