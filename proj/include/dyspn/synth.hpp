#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dyspn/core.hpp"
#include "dyspn/neighborhood.hpp"

namespace dyspn::synth {

enum class SceneKind : std::uint8_t { StepEdge, SlantedPlanes, SphereOnPlane };

SceneKind scene_from_name(const std::string& name);
const char* scene_name(SceneKind kind);

struct SceneSpec {
    SceneKind kind = SceneKind::StepEdge;
    int height = 64;
    int width = 64;
    double near_m = 2.0;
    double far_m = 5.0;
    std::uint64_t seed = 0;
};

// Dense positive ground truth plus a guidance intensity image in [0,1]
// whose discontinuities coincide with the depth discontinuities.
struct Scene {
    DepthGrid ground_truth;
    std::vector<double> guidance;  // [H,W] intensities in [0,1]
};

Scene generate_scene(const SceneSpec& spec);

// Keeps floor(rate * H * W) uniformly sampled pixels, zeroes the rest.
DepthGrid sparsify(const DepthGrid& ground_truth, double rate, std::uint64_t seed);

// Guidance-driven affinity: w = exp(-|dI| / sigma) per neighbor slot from
// intensity differences; out-of-bounds slots are filled with 0.
AffinityVolume edge_affinity(const std::vector<double>& guidance,
                             const NeighborhoodSpec& spec, double sigma);

// Scalar attention trajectory for one ring plane, evaluated at the absolute
// step index so longer runs extend shorter ones:
//   value(t) = limit + (start - limit) * exp(-rate * max(0, t - delay)),
// clamped to [0,1]. The delay holds the curve at its start value for a
// warmup phase before the decay kicks in.
struct RingCurve {
    double start = 1.0;
    double limit = 1.0;
    double rate = 0.0;
    double delay = 0.0;

    double value(int t) const;
};

struct AttentionSchedule {
    std::vector<RingCurve> curves;  // one per attention plane (index 0 = self)
    // Optional per-pixel factor in [0,1] applied to the neighbor-ring planes
    // (ring 0 is left untouched); lets edges damp diffusion locally.
    std::optional<std::vector<double>> edge_modulation;

    static AttentionSchedule constant(int plane_count, double v);
    // Warmup-then-suppress dynamics: all rings diffuse at nearly full
    // strength for a few steps, then shut down sharply (farther rings to
    // lower floors) while the self attention stays dominant, so the result
    // is converged once the warmup ends.
    static AttentionSchedule far_decay(int plane_count);
};

AttentionStack schedule_attention(const AttentionSchedule& schedule, int steps,
                                  const NeighborhoodSpec& spec);

// Per-pixel edge strength of a guidance image (max absolute 4-neighbor
// intensity difference), mapped through exp(-|dI|/sigma) so edges damp.
std::vector<double> edge_damping(const std::vector<double>& guidance, int height, int width,
                                 double sigma);

// Modulation factor that zeroes the neighbor rings at measured pixels, so
// sparse samples hold their exact value and act as diffusion anchors.
std::vector<double> sample_anchors(const DepthGrid& sparse);

// Dense initial map from a sparse one: nearest-valid-neighbor fill by
// multi-source BFS over the 4-neighborhood, deterministic tie-breaking.
DepthGrid nearest_fill(const DepthGrid& sparse);

}  // namespace dyspn::synth
