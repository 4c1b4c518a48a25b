#include "dyspn/fixtures.hpp"

#include <cmath>
#include <random>

namespace dyspn::fixtures {

namespace {

double uniform01(std::mt19937_64& rng) {
    return (rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace

RandomBundle make_random_bundle(const BundleOptions& options) {
    std::mt19937_64 rng(options.seed);
    const int h = options.height;
    const int w = options.width;

    std::optional<OffsetField> field;
    if (options.variant == Variant::Deformable) {
        field.emplace(2, 8, h, w);
        for (int r = 0; r < 2; ++r) {
            const int reach = r + 2;  // rings 2 and 3
            for (int s = 0; s < 8; ++s) {
                for (int i = 0; i < h; ++i) {
                    for (int j = 0; j < w; ++j) {
                        if (options.integral_offsets) {
                            field->dy(r, s, i, j) =
                                double(int(rng() % (2 * reach + 1)) - reach);
                            field->dx(r, s, i, j) =
                                double(int(rng() % (2 * reach + 1)) - reach);
                        } else {
                            const int base_y = int(rng() % (2 * reach)) - reach;
                            const int base_x = int(rng() % (2 * reach)) - reach;
                            field->dy(r, s, i, j) = base_y + uniform(rng, 0.25, 0.75);
                            field->dx(r, s, i, j) = base_x + uniform(rng, 0.25, 0.75);
                        }
                    }
                }
            }
        }
    }
    NeighborhoodSpec spec = build_neighborhood(options.variant, h, w, std::move(field));

    std::vector<double> depth(static_cast<std::size_t>(h) * w);
    for (double& v : depth) v = uniform(rng, 0.5, 10.0);
    DepthGrid h0(h, w, std::move(depth));

    const int K = spec.neighbor_count();
    AffinityVolume affinity(K, h, w);
    for (double& v : affinity.weights()) {
        double mag = uniform(rng, options.weight_min_abs, 1.0);
        if (!options.nonnegative_weights && uniform01(rng) < 0.5) mag = -mag;
        v = mag;
    }

    AttentionStack attention(options.steps, spec.ring_count() + 1, h, w);
    const double lo = options.attention_margin;
    const double hi = 1.0 - options.attention_margin;
    for (double& v : attention.values()) v = uniform(rng, lo, hi);
    attention.validate_range();

    return RandomBundle{std::move(h0), std::move(affinity), std::move(attention),
                        std::move(spec)};
}

}  // namespace dyspn::fixtures
