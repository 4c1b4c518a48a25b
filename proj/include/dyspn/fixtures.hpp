#pragma once

#include <cstdint>

#include "dyspn/core.hpp"
#include "dyspn/neighborhood.hpp"

namespace dyspn::fixtures {

// Seeded random propagation problems for equivalence and gradient checks.
struct BundleOptions {
    Variant variant = Variant::Ring7x7;
    int height = 8;
    int width = 8;
    int steps = 6;
    bool nonnegative_weights = false;
    // Deformable only: integral offsets make the bundle oracle-compatible;
    // fractional offsets keep their fractional part in [0.25, 0.75] so
    // bilinear sampling stays away from its kinks.
    bool integral_offsets = true;
    // Keep attention in [margin, 1 - margin] and |w| >= weight_min_abs so
    // finite differences stay clear of clamps and the |w| kink.
    double attention_margin = 0.0;
    double weight_min_abs = 0.0;
    std::uint64_t seed = 0;
};

struct RandomBundle {
    DepthGrid h0;
    AffinityVolume affinity;
    AttentionStack attention;
    NeighborhoodSpec spec;
};

RandomBundle make_random_bundle(const BundleOptions& options);

}  // namespace dyspn::fixtures
