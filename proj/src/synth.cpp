#include "dyspn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "dyspn/sampling.hpp"

namespace dyspn::synth {

SceneKind scene_from_name(const std::string& name) {
    if (name == "step-edge") return SceneKind::StepEdge;
    if (name == "slanted-planes") return SceneKind::SlantedPlanes;
    if (name == "sphere-on-plane") return SceneKind::SphereOnPlane;
    throw std::invalid_argument("unknown scene '" + name +
                                "' (expected step-edge, slanted-planes, or sphere-on-plane)");
}

const char* scene_name(SceneKind kind) {
    switch (kind) {
        case SceneKind::StepEdge: return "step-edge";
        case SceneKind::SlantedPlanes: return "slanted-planes";
        case SceneKind::SphereOnPlane: return "sphere-on-plane";
    }
    throw std::invalid_argument("scene_name: unknown kind");
}

Scene generate_scene(const SceneSpec& spec) {
    if (spec.height < 1 || spec.width < 1)
        throw std::invalid_argument("generate_scene: degenerate dims " +
                                    std::to_string(spec.height) + "x" +
                                    std::to_string(spec.width));
    if (!(spec.near_m > 0.0) || !(spec.far_m > spec.near_m))
        throw std::invalid_argument("generate_scene: need 0 < near < far");
    const int h = spec.height;
    const int w = spec.width;
    DepthGrid gt(h, w);
    std::vector<double> guidance(static_cast<std::size_t>(h) * w, 0.0);

    switch (spec.kind) {
        case SceneKind::StepEdge: {
            const int split = w / 2;
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const bool left = j < split;
                    gt.at(i, j) = left ? spec.near_m : spec.far_m;
                    guidance[static_cast<std::size_t>(i) * w + j] = left ? 0.2 : 0.8;
                }
            }
            break;
        }
        case SceneKind::SlantedPlanes: {
            const int split = w / 2;
            const double span = spec.far_m - spec.near_m;
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    double d;
                    if (j < split) {
                        d = spec.near_m + 0.3 * span * (double(i) / std::max(1, h - 1));
                    } else {
                        d = spec.far_m - 0.3 * span * (double(j) / std::max(1, w - 1));
                    }
                    gt.at(i, j) = d;
                    guidance[static_cast<std::size_t>(i) * w + j] = j < split ? 0.25 : 0.75;
                }
            }
            break;
        }
        case SceneKind::SphereOnPlane: {
            const double ci = 0.5 * (h - 1);
            const double cj = 0.5 * (w - 1);
            const double radius = 0.25 * std::min(h, w);
            const double bulge = 0.5 * (spec.far_m - spec.near_m);
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const double r2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
                    double d = spec.far_m;
                    double g = 0.8;
                    if (r2 < radius * radius) {
                        d = spec.far_m - bulge * std::sqrt(1.0 - r2 / (radius * radius));
                        g = 0.2;
                    }
                    gt.at(i, j) = d;
                    guidance[static_cast<std::size_t>(i) * w + j] = g;
                }
            }
            break;
        }
    }
    return Scene{std::move(gt), std::move(guidance)};
}

DepthGrid sparsify(const DepthGrid& ground_truth, double rate, std::uint64_t seed) {
    if (!(rate > 0.0) || rate > 1.0)
        throw std::invalid_argument("sparsify: rate " + std::to_string(rate) +
                                    " outside (0,1]");
    const std::size_t total = ground_truth.size();
    const std::size_t keep = static_cast<std::size_t>(rate * static_cast<double>(total));
    std::vector<std::size_t> indices(total);
    for (std::size_t idx = 0; idx < total; ++idx) indices[idx] = idx;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates; explicit modulo draw keeps the sequence
    // independent of the standard library's distribution internals.
    for (std::size_t idx = 0; idx < keep && idx + 1 < total; ++idx) {
        const std::size_t pick = idx + rng() % (total - idx);
        std::swap(indices[idx], indices[pick]);
    }
    DepthGrid sparse(ground_truth.height(), ground_truth.width());
    auto gt = ground_truth.values();
    auto out = sparse.values();
    for (std::size_t idx = 0; idx < keep; ++idx) out[indices[idx]] = gt[indices[idx]];
    return sparse;
}

AffinityVolume edge_affinity(const std::vector<double>& guidance,
                             const NeighborhoodSpec& spec, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("edge_affinity: sigma must be > 0");
    const int h = spec.height;
    const int w = spec.width;
    if (guidance.size() != static_cast<std::size_t>(h) * w)
        throw std::invalid_argument("edge_affinity: guidance size does not match spec dims");
    // Wrap the guidance buffer so the sampling helpers apply unchanged.
    DepthGrid intensity(h, w, guidance);
    AffinityVolume volume(spec.neighbor_count(), h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const double center = intensity.at(i, j);
            detail::for_each_neighbor<double>(
                intensity, spec, i, j, [&](int slot, int, double value, bool valid) {
                    volume.at(slot, i, j) =
                        valid ? std::exp(-std::abs(value - center) / sigma) : 0.0;
                });
        }
    }
    return volume;
}

double RingCurve::value(int t) const {
    const double v = limit + (start - limit) * std::exp(-rate * std::max(0.0, t - delay));
    return std::clamp(v, 0.0, 1.0);
}

AttentionSchedule AttentionSchedule::constant(int plane_count, double v) {
    AttentionSchedule schedule;
    schedule.curves.assign(plane_count, RingCurve{v, v, 0.0, 0.0});
    return schedule;
}

AttentionSchedule AttentionSchedule::far_decay(int plane_count) {
    AttentionSchedule schedule;
    schedule.curves.resize(plane_count);
    // Self attention grows toward full suppression strength.
    schedule.curves[0] = RingCurve{0.9, 1.0, 0.5, 0.0};
    for (int r = 1; r < plane_count; ++r) {
        // Farther rings start slightly lower and settle on lower floors, so
        // ring ordering is strict at every step; the shared delay keeps the
        // warmup phase fully diffusive before the sharp cutoff.
        const double start = 1.0 - 0.005 * (r - 1);
        const double floor = 3e-4 / double(1 << (2 * (r - 1)));
        schedule.curves[r] = RingCurve{start, floor, 8.0, 5.0};
    }
    return schedule;
}

AttentionStack schedule_attention(const AttentionSchedule& schedule, int steps,
                                  const NeighborhoodSpec& spec) {
    const int planes = spec.ring_count() + 1;
    if (static_cast<int>(schedule.curves.size()) != planes)
        throw std::invalid_argument("schedule_attention: " +
                                    std::to_string(schedule.curves.size()) +
                                    " curves for " + std::to_string(planes) + " planes");
    const std::size_t plane_px = static_cast<std::size_t>(spec.height) * spec.width;
    if (schedule.edge_modulation && schedule.edge_modulation->size() != plane_px)
        throw std::invalid_argument("schedule_attention: edge modulation size mismatch");
    AttentionStack stack(steps, planes, spec.height, spec.width);
    for (int t = 0; t < steps; ++t) {
        for (int r = 0; r < planes; ++r) {
            const double v = schedule.curves[r].value(t);
            for (int i = 0; i < spec.height; ++i) {
                for (int j = 0; j < spec.width; ++j) {
                    double x = v;
                    if (r >= 1 && schedule.edge_modulation)
                        x *= (*schedule.edge_modulation)[static_cast<std::size_t>(i) *
                                                             spec.width + j];
                    stack.at(t, r, i, j) = std::clamp(x, 0.0, 1.0);
                }
            }
        }
    }
    return stack;
}

std::vector<double> edge_damping(const std::vector<double>& guidance, int height, int width,
                                 double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("edge_damping: sigma must be > 0");
    if (guidance.size() != static_cast<std::size_t>(height) * width)
        throw std::invalid_argument("edge_damping: guidance size does not match dims");
    std::vector<double> out(guidance.size(), 1.0);
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            const double c = guidance[static_cast<std::size_t>(i) * width + j];
            double maxdiff = 0.0;
            const int di[4] = {-1, 1, 0, 0};
            const int dj[4] = {0, 0, -1, 1};
            for (int n = 0; n < 4; ++n) {
                const int ni = i + di[n];
                const int nj = j + dj[n];
                if (ni < 0 || ni >= height || nj < 0 || nj >= width) continue;
                maxdiff = std::max(
                    maxdiff,
                    std::abs(guidance[static_cast<std::size_t>(ni) * width + nj] - c));
            }
            out[static_cast<std::size_t>(i) * width + j] = std::exp(-maxdiff / sigma);
        }
    }
    return out;
}

std::vector<double> sample_anchors(const DepthGrid& sparse) {
    std::vector<double> out(sparse.size(), 1.0);
    for (std::size_t idx = 0; idx < out.size(); ++idx)
        if (sparse.values()[idx] > 0.0) out[idx] = 0.0;
    return out;
}

DepthGrid nearest_fill(const DepthGrid& sparse) {
    const int h = sparse.height();
    const int w = sparse.width();
    DepthGrid dense(h, w);
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(h) * w, 0);
    std::deque<std::pair<int, int>> queue;
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            if (sparse.at(i, j) > 0.0) {
                dense.at(i, j) = sparse.at(i, j);
                visited[static_cast<std::size_t>(i) * w + j] = 1;
                queue.emplace_back(i, j);
            }
        }
    }
    if (queue.empty()) throw std::invalid_argument("nearest_fill: no valid pixels");
    const int di[4] = {-1, 1, 0, 0};
    const int dj[4] = {0, 0, -1, 1};
    while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        for (int n = 0; n < 4; ++n) {
            const int ni = i + di[n];
            const int nj = j + dj[n];
            if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
            std::uint8_t& seen = visited[static_cast<std::size_t>(ni) * w + nj];
            if (seen) continue;
            seen = 1;
            dense.at(ni, nj) = dense.at(i, j);
            queue.emplace_back(ni, nj);
        }
    }
    return dense;
}

}  // namespace dyspn::synth
