#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dyspn/core.hpp"

namespace dyspn {

enum class Variant : std::uint8_t { Ring7x7, Dilated, Deformable };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Integer neighbor offset (dy, dx) relative to the center pixel.
struct Offset {
    int dy = 0;
    int dx = 0;
    friend bool operator==(const Offset&, const Offset&) = default;
};

// Per-pixel fractional offsets for deformable rings, layout [ring, slot, 2, H, W].
// Component 0 is dy, component 1 is dx, units pixels.
class OffsetField {
public:
    OffsetField(int ring_count, int slots_per_ring, int height, int width)
        : rings_(ring_count), slots_(slots_per_ring), height_(height), width_(width),
          data_(static_cast<std::size_t>(ring_count) * slots_per_ring * 2 * height * width, 0.0) {}

    OffsetField(int ring_count, int slots_per_ring, int height, int width,
                std::vector<double> data);

    int ring_count() const { return rings_; }
    int slots_per_ring() const { return slots_; }
    int height() const { return height_; }
    int width() const { return width_; }

    double dy(int ring, int slot, int i, int j) const { return comp(ring, slot, 0, i, j); }
    double dx(int ring, int slot, int i, int j) const { return comp(ring, slot, 1, i, j); }
    double& dy(int ring, int slot, int i, int j) { return comp(ring, slot, 0, i, j); }
    double& dx(int ring, int slot, int i, int j) { return comp(ring, slot, 1, i, j); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

private:
    double comp(int ring, int slot, int c, int i, int j) const {
        return data_[(((static_cast<std::size_t>(ring) * slots_ + slot) * 2 + c) * height_ + i) *
                         width_ + j];
    }
    double& comp(int ring, int slot, int c, int i, int j) {
        return data_[(((static_cast<std::size_t>(ring) * slots_ + slot) * 2 + c) * height_ + i) *
                         width_ + j];
    }

    int rings_;
    int slots_;
    int height_;
    int width_;
    std::vector<double> data_;
};

// One distance class of neighbors. Integer rings carry explicit offsets;
// fractional rings carry only a slot count and read the OffsetField per pixel.
struct Ring {
    int index = 0;  // distance class k, 1-based
    bool fractional = false;
    std::vector<Offset> offsets;  // empty when fractional
    int slot_count = 0;
};

// Neighborhood geometry for one propagation variant. Geometry is fixed
// across iterations; only attention varies with t.
struct NeighborhoodSpec {
    Variant variant = Variant::Ring7x7;
    int height = 0;
    int width = 0;
    std::vector<Ring> rings;
    std::optional<OffsetField> offset_field;

    int ring_count() const { return static_cast<int>(rings.size()); }
    int neighbor_count() const {
        int k = 0;
        for (const auto& r : rings) k += r.slot_count;
        return k;
    }
    bool has_fractional_rings() const {
        for (const auto& r : rings)
            if (r.fractional) return true;
        return false;
    }
};

// Builds the per-variant ring layout:
//   Ring7x7    -> Chebyshev rings k=1,2,3 with 8/16/24 offsets (48 total)
//   Dilated    -> rings k=1,2 with dilation 2k-1, 8 offsets each (16 total)
//   Deformable -> fixed 3x3 ring 1 plus two fractional rings of 8 slots (24 total)
NeighborhoodSpec build_neighborhood(Variant variant, int height, int width,
                                    std::optional<OffsetField> offset_field = std::nullopt);

// Immutable validated view over one propagation problem. Holds references;
// the referenced objects must outlive the bundle.
struct Bundle {
    const DepthGrid& depth;
    const AffinityVolume& affinity;
    const AttentionStack& attention;
    const NeighborhoodSpec& spec;
    const PropagationConfig& config;
};

// Cross-checks every shape constraint between the five inputs and returns
// the validated view. Each mismatch names the offending dimensions.
Bundle validate_bundle(const DepthGrid& depth, const AffinityVolume& affinity,
                       const AttentionStack& attention, const NeighborhoodSpec& spec,
                       const PropagationConfig& config);

}  // namespace dyspn
