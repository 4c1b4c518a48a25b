#pragma once

#include <cmath>

#include "dyspn/core.hpp"
#include "dyspn/neighborhood.hpp"

namespace dyspn::detail {

// Bilinear taps for one fractional sample. Corners with zero weight are not
// part of the support; any nonzero-weight corner out of bounds invalidates
// the whole sample (no extrapolation at image borders).
template <typename Real>
struct BilinearTaps {
    bool valid = false;
    int corner_i[4] = {0, 0, 0, 0};
    int corner_j[4] = {0, 0, 0, 0};
    Real weight[4] = {0, 0, 0, 0};
};

template <typename Real>
BilinearTaps<Real> bilinear_taps(Real y, Real x, int height, int width) {
    BilinearTaps<Real> taps;
    const Real fy0 = std::floor(y);
    const Real fx0 = std::floor(x);
    const int i0 = static_cast<int>(fy0);
    const int j0 = static_cast<int>(fx0);
    const Real fy = y - fy0;
    const Real fx = x - fx0;
    const Real w[4] = {(Real(1) - fy) * (Real(1) - fx), (Real(1) - fy) * fx,
                       fy * (Real(1) - fx), fy * fx};
    const int ci[4] = {i0, i0, i0 + 1, i0 + 1};
    const int cj[4] = {j0, j0 + 1, j0, j0 + 1};
    for (int c = 0; c < 4; ++c) {
        if (w[c] == Real(0)) continue;
        if (ci[c] < 0 || ci[c] >= height || cj[c] < 0 || cj[c] >= width) return taps;
    }
    taps.valid = true;
    for (int c = 0; c < 4; ++c) {
        // Zero-weight corners may sit out of bounds; pin them to a safe index.
        taps.corner_i[c] = w[c] == Real(0) ? 0 : ci[c];
        taps.corner_j[c] = w[c] == Real(0) ? 0 : cj[c];
        taps.weight[c] = w[c];
    }
    return taps;
}

// Visits every neighbor slot of pixel (i, j) in slot order. The callback
// receives (slot, ring_position, value, valid); ring_position indexes
// spec.rings, so the matching attention plane is ring_position + 1.
template <typename Real, typename Fn>
void for_each_neighbor(const DepthGrid& grid, const NeighborhoodSpec& spec, int i, int j,
                       Fn&& fn) {
    const int height = grid.height();
    const int width = grid.width();
    int slot = 0;
    int field_ring = 0;
    for (int r = 0; r < spec.ring_count(); ++r) {
        const Ring& ring = spec.rings[r];
        if (!ring.fractional) {
            for (const Offset& off : ring.offsets) {
                const int ni = i + off.dy;
                const int nj = j + off.dx;
                const bool valid = ni >= 0 && ni < height && nj >= 0 && nj < width;
                fn(slot, r, valid ? Real(grid.at(ni, nj)) : Real(0), valid);
                ++slot;
            }
        } else {
            const OffsetField& field = *spec.offset_field;
            for (int s = 0; s < ring.slot_count; ++s) {
                const Real y = Real(i) + Real(field.dy(field_ring, s, i, j));
                const Real x = Real(j) + Real(field.dx(field_ring, s, i, j));
                const auto taps = bilinear_taps<Real>(y, x, height, width);
                Real value = 0;
                if (taps.valid)
                    for (int c = 0; c < 4; ++c)
                        value += taps.weight[c] * Real(grid.at(taps.corner_i[c], taps.corner_j[c]));
                fn(slot, r, value, taps.valid);
                ++slot;
            }
            ++field_ring;
        }
    }
}

}  // namespace dyspn::detail
