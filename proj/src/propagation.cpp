#include "dyspn/propagation.hpp"

#include <cmath>
#include <thread>

#include "dyspn/sampling.hpp"

namespace dyspn {

namespace {

template <typename Real>
void step_rows(const DepthGrid& h_t, const DepthGrid& h_0, const AffinityVolume& affinity,
               const AttentionStack& attention, int attn_step, const NeighborhoodSpec& spec,
               const PropagationConfig& config, int row_begin, int row_end, DepthGrid& out) {
    const int width = h_t.width();
    const Real eps = Real(config.epsilon);
    for (int i = row_begin; i < row_end; ++i) {
        for (int j = 0; j < width; ++j) {
            const Real pi0 = Real(attention.at(attn_step, 0, i, j));
            const Real center = Real(h_t.at(i, j));
            Real numerator = pi0 * center;
            Real signed_sum = pi0;
            Real abs_sum = pi0;
            bool any_neighbor = false;
            detail::for_each_neighbor<Real>(
                h_t, spec, i, j,
                [&](int slot, int ring_pos, Real value, bool valid) {
                    if (!valid) return;
                    const Real pik = Real(attention.at(attn_step, ring_pos + 1, i, j));
                    const Real w = Real(affinity.at(slot, i, j));
                    if (pik * w == Real(0)) return;
                    any_neighbor = true;
                    numerator += pik * w * value;
                    signed_sum += pik * w;
                    abs_sum += pik * std::abs(w);
                });
            const Real initial = Real(h_0.at(i, j));
            Real result;
            if (eps == Real(0) && abs_sum == Real(0)) {
                // Singular point of the update; the replacement term dominates.
                result = initial;
            } else if (eps == Real(0) && !any_neighbor) {
                // All neighbor mass is zero: (pi0 h)/pi0 must stay a bit-exact
                // fixed point, so skip the rounded multiply-divide.
                result = center;
            } else {
                const Real denom = abs_sum + eps;
                result = numerator / denom + (Real(1) - signed_sum / denom) * initial;
            }
            out.at(i, j) = double(result);
        }
    }
}

template <typename Real>
DepthGrid step_impl(const DepthGrid& h_t, const DepthGrid& h_0, const AffinityVolume& affinity,
                    const AttentionStack& attention, int attn_step, const NeighborhoodSpec& spec,
                    const PropagationConfig& config) {
    const int height = h_t.height();
    DepthGrid out(height, h_t.width());
    const int threads = std::min(config.threads, height);
    if (threads <= 1) {
        step_rows<Real>(h_t, h_0, affinity, attention, attn_step, spec, config, 0, height, out);
    } else {
        // Row-block parallelism; blocks are disjoint so per-pixel reduction
        // order is identical for any thread count.
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const int rows_per = (height + threads - 1) / threads;
        for (int b = 0; b < threads; ++b) {
            const int begin = b * rows_per;
            const int end = std::min(height, begin + rows_per);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                step_rows<Real>(h_t, h_0, affinity, attention, attn_step, spec, config, begin,
                                end, out);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (double v : out.values())
        if (std::isnan(v))
            throw std::runtime_error("step: NaN in output (contract violation)");
    return out;
}

}  // namespace

GatherResult gather_neighbors(const DepthGrid& h, const NeighborhoodSpec& spec) {
    if (spec.height != h.height() || spec.width != h.width())
        throw std::invalid_argument("gather_neighbors: spec dims do not match grid dims");
    GatherResult result;
    result.neighbor_count = spec.neighbor_count();
    result.height = h.height();
    result.width = h.width();
    const std::size_t plane = static_cast<std::size_t>(result.height) * result.width;
    result.values.assign(result.neighbor_count * plane, 0.0);
    result.mask.assign(result.neighbor_count * plane, 0);
    for (int i = 0; i < result.height; ++i) {
        for (int j = 0; j < result.width; ++j) {
            detail::for_each_neighbor<double>(
                h, spec, i, j, [&](int slot, int /*ring*/, double value, bool valid) {
                    const std::size_t idx = slot * plane + static_cast<std::size_t>(i) * result.width + j;
                    result.values[idx] = value;
                    result.mask[idx] = valid ? 1 : 0;
                });
        }
    }
    return result;
}

DepthGrid step(const DepthGrid& h_t, const DepthGrid& h_0, const AffinityVolume& affinity,
               const AttentionStack& attention, int attn_step, const NeighborhoodSpec& spec,
               const PropagationConfig& config) {
    if (attn_step < 0 || attn_step >= attention.steps())
        throw std::invalid_argument("step: attn_step " + std::to_string(attn_step) +
                                    " outside attention stack of " +
                                    std::to_string(attention.steps()) + " steps");
    if (config.precision == Precision::F32)
        return step_impl<float>(h_t, h_0, affinity, attention, attn_step, spec, config);
    return step_impl<double>(h_t, h_0, affinity, attention, attn_step, spec, config);
}

std::pair<DepthGrid, PropagationTape> propagate(const DepthGrid& h_0,
                                                const AffinityVolume& affinity,
                                                const AttentionStack& attention,
                                                const NeighborhoodSpec& spec,
                                                const PropagationConfig& config) {
    validate_bundle(h_0, affinity, attention, spec, config);
    PropagationTape tape;
    tape.grids.reserve(config.steps + 1);
    tape.grids.push_back(h_0);
    for (int t = 0; t < config.steps; ++t)
        tape.grids.push_back(step(tape.grids.back(), h_0, affinity, attention, t, spec, config));
    DepthGrid result = tape.grids.back();
    return {std::move(result), std::move(tape)};
}

DepthGrid emulate_cspn(const DepthGrid& h_0, const AffinityVolume& affinity,
                       const NeighborhoodSpec& spec, const PropagationConfig& config) {
    const AttentionStack ones = AttentionStack::constant(
        config.steps, spec.ring_count() + 1, h_0.height(), h_0.width(), 1.0);
    return propagate(h_0, affinity, ones, spec, config).first;
}

}  // namespace dyspn
