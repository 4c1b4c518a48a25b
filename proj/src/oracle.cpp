#include "dyspn/oracle.hpp"

#include <cmath>

namespace dyspn::oracle {

namespace {

// Resolves every neighbor slot of (i, j) to an integer target pixel, or
// invalid. Fractional rings are accepted only with integral offsets.
template <typename Fn>
void for_each_integer_neighbor(const NeighborhoodSpec& spec, int i, int j, Fn&& fn) {
    int slot = 0;
    int field_ring = 0;
    for (int r = 0; r < spec.ring_count(); ++r) {
        const Ring& ring = spec.rings[r];
        if (!ring.fractional) {
            for (const Offset& off : ring.offsets) {
                const int ni = i + off.dy;
                const int nj = j + off.dx;
                const bool valid =
                    ni >= 0 && ni < spec.height && nj >= 0 && nj < spec.width;
                fn(slot, r, ni, nj, valid);
                ++slot;
            }
        } else {
            const OffsetField& field = *spec.offset_field;
            for (int s = 0; s < ring.slot_count; ++s) {
                const double dy = field.dy(field_ring, s, i, j);
                const double dx = field.dx(field_ring, s, i, j);
                if (dy != std::floor(dy) || dx != std::floor(dx))
                    throw std::invalid_argument(
                        "oracle: fractional offsets rejected (slot " + std::to_string(slot) +
                        " at pixel " + std::to_string(i) + "," + std::to_string(j) + ")");
                const int ni = i + static_cast<int>(dy);
                const int nj = j + static_cast<int>(dx);
                const bool valid =
                    ni >= 0 && ni < spec.height && nj >= 0 && nj < spec.width;
                fn(slot, r, ni, nj, valid);
                ++slot;
            }
            ++field_ring;
        }
    }
}

void check_size(const DepthGrid& grid) {
    const int mn = grid.height() * grid.width();
    if (mn > kMaxVectorSize)
        throw std::invalid_argument("oracle: grid size " + std::to_string(mn) +
                                    " exceeds dense limit " + std::to_string(kMaxVectorSize));
}

}  // namespace

Eigen::VectorXd vectorize(const DepthGrid& grid) {
    const int h = grid.height();
    const int w = grid.width();
    Eigen::VectorXd v(static_cast<Eigen::Index>(h) * w);
    for (int j = 0; j < w; ++j)
        for (int i = 0; i < h; ++i) v[i + static_cast<Eigen::Index>(j) * h] = grid.at(i, j);
    return v;
}

DepthGrid devectorize(const Eigen::VectorXd& v, int height, int width) {
    if (v.size() != static_cast<Eigen::Index>(height) * width)
        throw std::invalid_argument("devectorize: vector length does not match dims");
    DepthGrid grid(height, width);
    for (int j = 0; j < width; ++j)
        for (int i = 0; i < height; ++i) grid.at(i, j) = v[i + static_cast<Eigen::Index>(j) * height];
    return grid;
}

TransformSystem build_transform(const DepthGrid& shape, const AffinityVolume& affinity,
                                const AttentionStack& attention, int attn_step,
                                const NeighborhoodSpec& spec, const PropagationConfig& config,
                                bool include_suppression) {
    check_size(shape);
    const int h = shape.height();
    const int w = shape.width();
    const int mn = h * w;
    TransformSystem system;
    system.transform = Eigen::MatrixXd::Zero(mn, mn);
    system.replacement = Eigen::VectorXd::Zero(mn);
    system.self_mass = Eigen::VectorXd::Zero(mn);

    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const int p = i + j * h;
            const double pi0 =
                include_suppression ? attention.at(attn_step, 0, i, j) : 0.0;
            double signed_sum = pi0;
            double abs_sum = pi0;
            for_each_integer_neighbor(spec, i, j,
                                      [&](int slot, int ring_pos, int, int, bool valid) {
                                          if (!valid) return;
                                          const double pik =
                                              attention.at(attn_step, ring_pos + 1, i, j);
                                          const double wv = affinity.at(slot, i, j);
                                          signed_sum += pik * wv;
                                          abs_sum += pik * std::abs(wv);
                                      });
            if (config.epsilon == 0.0 && abs_sum == 0.0) {
                // Singular row: the step outputs h_0 here.
                system.replacement[p] = 1.0;
                continue;
            }
            const double denom = abs_sum + config.epsilon;
            for_each_integer_neighbor(
                spec, i, j, [&](int slot, int ring_pos, int ni, int nj, bool valid) {
                    if (!valid) return;
                    const double pik = attention.at(attn_step, ring_pos + 1, i, j);
                    const double wv = affinity.at(slot, i, j);
                    system.transform(p, ni + nj * h) += pik * wv / denom;
                });
            system.transform(p, p) += pi0 / denom;
            system.self_mass[p] = pi0 / denom;
            system.replacement[p] = 1.0 - signed_sum / denom;
        }
    }
    return system;
}

DepthGrid propagate(const DepthGrid& h_0, const AffinityVolume& affinity,
                    const AttentionStack& attention, const NeighborhoodSpec& spec,
                    const PropagationConfig& config) {
    if (config.steps == 0) return h_0;
    validate_bundle(h_0, affinity, attention, spec, config);
    check_size(h_0);
    const Eigen::VectorXd v0 = vectorize(h_0);
    Eigen::VectorXd v = v0;
    for (int t = 0; t < config.steps; ++t) {
        const TransformSystem system =
            build_transform(h_0, affinity, attention, t, spec, config);
        v = system.transform * v + system.replacement.cwiseProduct(v0);
    }
    return devectorize(v, h_0.height(), h_0.width());
}

Eigen::MatrixXd laplacian_of(const TransformSystem& system) {
    return Eigen::MatrixXd::Identity(system.transform.rows(), system.transform.cols()) -
           system.transform;
}

}  // namespace dyspn::oracle
