#pragma once

#include <Eigen/Dense>

#include "dyspn/core.hpp"
#include "dyspn/neighborhood.hpp"

namespace dyspn::oracle {

// Hard cap on the vectorized grid size; the dense oracle is a test fixture,
// not a production path.
inline constexpr int kMaxVectorSize = 4096;

// Dense one-step propagation operator on the column-first vectorized grid:
//   V^{t+1} = transform * V^t + replacement .* V^0
// The diagonal carries the self mass (the suppression structure); off-diagonal
// entries are the normalized attention-modulated affinities.
struct TransformSystem {
    Eigen::MatrixXd transform;       // mn x mn
    Eigen::VectorXd replacement;     // per-pixel coefficient 1 - S/S'
    Eigen::VectorXd self_mass;       // diagonal of the suppression part, pi_0/S'
};

// Assembles the dense operator for attention slice attn_step. Requires integer
// offsets (a deformable spec is accepted only when every per-pixel offset is
// integral and its sample lands in bounds or out entirely). When
// include_suppression is false the self attention pi_0 is treated as zero,
// matching a step run with the ring-0 plane zeroed.
TransformSystem build_transform(const DepthGrid& shape, const AffinityVolume& affinity,
                                const AttentionStack& attention, int attn_step,
                                const NeighborhoodSpec& spec, const PropagationConfig& config,
                                bool include_suppression = true);

// Runs the dense recursion for config.steps iterations and reshapes back.
DepthGrid propagate(const DepthGrid& h_0, const AffinityVolume& affinity,
                    const AttentionStack& attention, const NeighborhoodSpec& spec,
                    const PropagationConfig& config);

// Laplace matrix of the diffusion view: L^t = I - G^t, so that
// V^{t+1} - V^t = -L^t V^t + r^t .* V^0.
Eigen::MatrixXd laplacian_of(const TransformSystem& system);

// Column-first vectorization helpers (index = row + col * height).
Eigen::VectorXd vectorize(const DepthGrid& grid);
DepthGrid devectorize(const Eigen::VectorXd& v, int height, int width);

}  // namespace dyspn::oracle
