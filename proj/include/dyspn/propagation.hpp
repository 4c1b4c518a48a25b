#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dyspn/core.hpp"
#include "dyspn/neighborhood.hpp"

namespace dyspn {

// Recorded intermediate grids h^0..h^N for the backward pass.
struct PropagationTape {
    std::vector<DepthGrid> grids;

    int steps() const { return static_cast<int>(grids.size()) - 1; }
    const DepthGrid& at(int t) const { return grids[t]; }
    const DepthGrid& initial() const { return grids.front(); }
    const DepthGrid& final() const { return grids.back(); }
};

// Gathered neighbor values for one grid, layout [K, H, W], plus the
// in-bounds mask. Masked samples hold value 0 and take no part in S or S'.
struct GatherResult {
    int neighbor_count = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    double value(int slot, int i, int j) const {
        return values[(static_cast<std::size_t>(slot) * height + i) * width + j];
    }
    bool in_bounds(int slot, int i, int j) const {
        return mask[(static_cast<std::size_t>(slot) * height + i) * width + j] != 0;
    }
};

GatherResult gather_neighbors(const DepthGrid& h, const NeighborhoodSpec& spec);

// One propagation step: attention-modulated affine combination of gathered
// neighbors, the previous value, and the initial map, normalized by the
// signed and absolute sums S and S'. attn_step selects the attention slice.
DepthGrid step(const DepthGrid& h_t, const DepthGrid& h_0, const AffinityVolume& affinity,
               const AttentionStack& attention, int attn_step, const NeighborhoodSpec& spec,
               const PropagationConfig& config);

// N-step driver. h_0 stays fixed as the replacement source; the tape records
// every intermediate grid.
std::pair<DepthGrid, PropagationTape> propagate(const DepthGrid& h_0,
                                                const AffinityVolume& affinity,
                                                const AttentionStack& attention,
                                                const NeighborhoodSpec& spec,
                                                const PropagationConfig& config);

// Fixed linear propagation baseline: propagate with every attention value
// pinned to 1 at every step and ring.
DepthGrid emulate_cspn(const DepthGrid& h_0, const AffinityVolume& affinity,
                       const NeighborhoodSpec& spec, const PropagationConfig& config);

}  // namespace dyspn
