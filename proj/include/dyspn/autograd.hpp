#pragma once

#include <utility>
#include <vector>

#include "dyspn/core.hpp"
#include "dyspn/neighborhood.hpp"
#include "dyspn/propagation.hpp"

namespace dyspn {

// Cotangents of one propagation step with respect to its inputs.
// Grid-shaped buffers are row-major H*W; d_aff is [K,H,W]; d_attn is [R+1,H,W].
struct StepGradients {
    std::vector<double> d_prev;     // w.r.t. h_t
    std::vector<double> d_initial;  // w.r.t. h_0 (replacement route only)
    std::vector<double> d_aff;
    std::vector<double> d_attn;
};

// Cotangents of the full N-step propagation.
struct GradientBundle {
    int height = 0;
    int width = 0;
    int neighbor_count = 0;
    int steps = 0;
    int ring_count = 0;  // R+1 planes
    std::vector<double> d_h0;    // [H,W]
    std::vector<double> d_aff;   // [K,H,W]
    std::vector<double> d_attn;  // [T,R+1,H,W]

    double d_h0_at(int i, int j) const { return d_h0[static_cast<std::size_t>(i) * width + j]; }
    double d_aff_at(int slot, int i, int j) const {
        return d_aff[(static_cast<std::size_t>(slot) * height + i) * width + j];
    }
    double d_attn_at(int t, int ring, int i, int j) const {
        return d_attn[((static_cast<std::size_t>(t) * ring_count + ring) * height + i) * width + j];
    }
};

// Analytic reverse-mode derivatives of one step, read back from the tape.
// Requires epsilon > 0: the epsilon-free reference mode is non-differentiable
// at S' = 0 and is rejected.
StepGradients backward_step(const PropagationTape& tape, int t,
                            std::span<const double> upstream, const AffinityVolume& affinity,
                            const AttentionStack& attention, const NeighborhoodSpec& spec,
                            const PropagationConfig& config);

// Reverse accumulation from t = N-1 down to 0. h_0 collects every step's
// replacement contribution plus the chained t = 0 input cotangent.
GradientBundle backward(const PropagationTape& tape, std::span<const double> upstream,
                        const AffinityVolume& affinity, const AttentionStack& attention,
                        const NeighborhoodSpec& spec, const PropagationConfig& config);

// Combined L1 + L2 loss over valid ground-truth pixels (gt > 0), each term
// averaged by the valid-pixel count. Returns the loss and its gradient in
// the prediction; the gradient is zero at invalid pixels.
std::pair<double, std::vector<double>> loss_and_grad(const DepthGrid& prediction,
                                                     const DepthGrid& ground_truth,
                                                     double alpha = 1.0, double beta = 1.0);

}  // namespace dyspn
