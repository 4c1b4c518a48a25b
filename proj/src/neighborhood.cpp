#include "dyspn/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dyspn {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Ring7x7: return "ring7x7";
        case Variant::Dilated: return "dilated";
        case Variant::Deformable: return "deformable";
    }
    throw std::invalid_argument("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
    if (name == "ring7x7") return Variant::Ring7x7;
    if (name == "dilated") return Variant::Dilated;
    if (name == "deformable") return Variant::Deformable;
    throw std::invalid_argument("unknown variant '" + name +
                                "' (expected ring7x7, dilated, or deformable)");
}

OffsetField::OffsetField(int ring_count, int slots_per_ring, int height, int width,
                         std::vector<double> data)
    : rings_(ring_count), slots_(slots_per_ring), height_(height), width_(width),
      data_(std::move(data)) {
    const std::size_t expect =
        static_cast<std::size_t>(rings_) * slots_ * 2 * height_ * width_;
    if (data_.size() != expect)
        throw std::invalid_argument("OffsetField: buffer length " + std::to_string(data_.size()) +
                                    " != rings*slots*2*H*W = " + std::to_string(expect));
    for (double v : data_)
        if (!std::isfinite(v))
            throw std::invalid_argument("OffsetField: non-finite offset");
}

namespace {

// Chebyshev-distance-k square ring, row-major order.
std::vector<Offset> chebyshev_ring(int k) {
    std::vector<Offset> offsets;
    for (int dy = -k; dy <= k; ++dy)
        for (int dx = -k; dx <= k; ++dx)
            if (std::max(std::abs(dy), std::abs(dx)) == k) offsets.push_back({dy, dx});
    return offsets;
}

std::vector<Offset> dilated_ring(int k) {
    const int d = 2 * k - 1;
    std::vector<Offset> offsets;
    for (int dy : {-d, 0, d})
        for (int dx : {-d, 0, d})
            if (dy != 0 || dx != 0) offsets.push_back({dy, dx});
    return offsets;
}

}  // namespace

NeighborhoodSpec build_neighborhood(Variant variant, int height, int width,
                                    std::optional<OffsetField> offset_field) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("build_neighborhood: degenerate dims " +
                                    std::to_string(height) + "x" + std::to_string(width));
    NeighborhoodSpec spec;
    spec.variant = variant;
    spec.height = height;
    spec.width = width;

    switch (variant) {
        case Variant::Ring7x7:
            if (offset_field)
                throw std::invalid_argument("build_neighborhood: ring7x7 takes no offset field");
            for (int k = 1; k <= 3; ++k) {
                Ring ring;
                ring.index = k;
                ring.offsets = chebyshev_ring(k);
                ring.slot_count = static_cast<int>(ring.offsets.size());
                spec.rings.push_back(std::move(ring));
            }
            break;
        case Variant::Dilated:
            if (offset_field)
                throw std::invalid_argument("build_neighborhood: dilated takes no offset field");
            for (int k = 1; k <= 2; ++k) {
                Ring ring;
                ring.index = k;
                ring.offsets = dilated_ring(k);
                ring.slot_count = static_cast<int>(ring.offsets.size());
                spec.rings.push_back(std::move(ring));
            }
            break;
        case Variant::Deformable: {
            if (!offset_field)
                throw std::invalid_argument(
                    "build_neighborhood: deformable requires an offset field");
            if (offset_field->ring_count() != 2 || offset_field->slots_per_ring() != 8 ||
                offset_field->height() != height || offset_field->width() != width)
                throw std::invalid_argument(
                    "build_neighborhood: offset field shape [" +
                    std::to_string(offset_field->ring_count()) + "," +
                    std::to_string(offset_field->slots_per_ring()) + ",2," +
                    std::to_string(offset_field->height()) + "," +
                    std::to_string(offset_field->width()) + "] != [2,8,2," +
                    std::to_string(height) + "," + std::to_string(width) + "]");
            Ring ring1;
            ring1.index = 1;
            ring1.offsets = chebyshev_ring(1);
            ring1.slot_count = 8;
            spec.rings.push_back(std::move(ring1));
            for (int k = 2; k <= 3; ++k) {
                Ring ring;
                ring.index = k;
                ring.fractional = true;
                ring.slot_count = 8;
                spec.rings.push_back(std::move(ring));
            }
            spec.offset_field = std::move(offset_field);
            break;
        }
        default:
            throw std::invalid_argument("build_neighborhood: unknown variant");
    }

    for (const auto& ring : spec.rings) {
        if (ring.fractional) continue;
        std::set<std::pair<int, int>> seen;
        for (const auto& off : ring.offsets) {
            if (off.dy == 0 && off.dx == 0)
                throw std::invalid_argument("build_neighborhood: (0,0) offset in integer ring");
            if (!seen.insert({off.dy, off.dx}).second)
                throw std::invalid_argument("build_neighborhood: duplicate offset in ring " +
                                            std::to_string(ring.index));
        }
    }
    return spec;
}

Bundle validate_bundle(const DepthGrid& depth, const AffinityVolume& affinity,
                       const AttentionStack& attention, const NeighborhoodSpec& spec,
                       const PropagationConfig& config) {
    config.validate();
    const int h = depth.height();
    const int w = depth.width();
    auto shape_err = [&](const std::string& what) {
        throw std::invalid_argument("validate_bundle: " + what);
    };
    if (spec.height != h || spec.width != w)
        shape_err("spec dims " + std::to_string(spec.height) + "x" + std::to_string(spec.width) +
                  " != depth dims " + std::to_string(h) + "x" + std::to_string(w));
    if (affinity.height() != h || affinity.width() != w)
        shape_err("affinity dims " + std::to_string(affinity.height()) + "x" +
                  std::to_string(affinity.width()) + " != depth dims " + std::to_string(h) + "x" +
                  std::to_string(w));
    if (attention.height() != h || attention.width() != w)
        shape_err("attention dims " + std::to_string(attention.height()) + "x" +
                  std::to_string(attention.width()) + " != depth dims " + std::to_string(h) + "x" +
                  std::to_string(w));
    if (affinity.neighbor_count() != spec.neighbor_count())
        shape_err("affinity neighbor_count " + std::to_string(affinity.neighbor_count()) +
                  " != spec total ring slots " + std::to_string(spec.neighbor_count()));
    if (attention.ring_count() != spec.ring_count() + 1)
        shape_err("attention ring count " + std::to_string(attention.ring_count()) +
                  " != spec rings + self = " + std::to_string(spec.ring_count() + 1));
    if (attention.steps() < config.steps)
        shape_err("attention steps " + std::to_string(attention.steps()) +
                  " < configured steps " + std::to_string(config.steps));
    attention.validate_range();
    return Bundle{depth, affinity, attention, spec, config};
}

}  // namespace dyspn
