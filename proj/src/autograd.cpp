#include "dyspn/autograd.hpp"

#include <cmath>

#include "dyspn/sampling.hpp"

namespace dyspn {

namespace {

double sgn(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;  // subgradient choice at the |w| kink
}

// Per-slot sample record for one output pixel.
struct SlotSample {
    double value = 0.0;
    bool valid = false;
    bool fractional = false;
    detail::BilinearTaps<double> taps;
    int target_i = 0;  // integer-offset target
    int target_j = 0;
};

}  // namespace

StepGradients backward_step(const PropagationTape& tape, int t,
                            std::span<const double> upstream, const AffinityVolume& affinity,
                            const AttentionStack& attention, const NeighborhoodSpec& spec,
                            const PropagationConfig& config) {
    if (config.epsilon <= 0.0)
        throw std::invalid_argument(
            "backward_step: epsilon = 0 reference mode is non-differentiable at S' = 0");
    if (t < 0 || t >= tape.steps())
        throw std::invalid_argument("backward_step: tape has no step " + std::to_string(t));
    const DepthGrid& h_t = tape.at(t);
    const DepthGrid& h_0 = tape.initial();
    const int height = h_t.height();
    const int width = h_t.width();
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    if (upstream.size() != plane)
        throw std::invalid_argument("backward_step: upstream size does not match grid");

    const int K = spec.neighbor_count();
    const int planes = spec.ring_count() + 1;
    StepGradients grads;
    grads.d_prev.assign(plane, 0.0);
    grads.d_initial.assign(plane, 0.0);
    grads.d_aff.assign(static_cast<std::size_t>(K) * plane, 0.0);
    grads.d_attn.assign(static_cast<std::size_t>(planes) * plane, 0.0);

    std::vector<SlotSample> samples(K);
    std::vector<int> slot_ring(K);
    {
        int slot = 0;
        for (int r = 0; r < spec.ring_count(); ++r)
            for (int s = 0; s < spec.rings[r].slot_count; ++s) slot_ring[slot++] = r;
    }

    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            const std::size_t px = static_cast<std::size_t>(i) * width + j;
            const double u = upstream[px];

            // Re-derive the forward locals for this pixel from the tape.
            int slot = 0;
            int field_ring = 0;
            for (int r = 0; r < spec.ring_count(); ++r) {
                const Ring& ring = spec.rings[r];
                if (!ring.fractional) {
                    for (const Offset& off : ring.offsets) {
                        SlotSample& sm = samples[slot];
                        sm.fractional = false;
                        sm.target_i = i + off.dy;
                        sm.target_j = j + off.dx;
                        sm.valid = h_t.in_bounds(sm.target_i, sm.target_j);
                        sm.value = sm.valid ? h_t.at(sm.target_i, sm.target_j) : 0.0;
                        ++slot;
                    }
                } else {
                    const OffsetField& field = *spec.offset_field;
                    for (int s = 0; s < ring.slot_count; ++s) {
                        SlotSample& sm = samples[slot];
                        sm.fractional = true;
                        sm.taps = detail::bilinear_taps<double>(
                            double(i) + field.dy(field_ring, s, i, j),
                            double(j) + field.dx(field_ring, s, i, j), height, width);
                        sm.valid = sm.taps.valid;
                        sm.value = 0.0;
                        if (sm.valid)
                            for (int c = 0; c < 4; ++c)
                                sm.value += sm.taps.weight[c] *
                                            h_t.at(sm.taps.corner_i[c], sm.taps.corner_j[c]);
                        ++slot;
                    }
                    ++field_ring;
                }
            }

            const double pi0 = attention.at(t, 0, i, j);
            const double center = h_t.at(i, j);
            const double initial = h_0.at(i, j);
            double numerator = pi0 * center;
            double signed_sum = pi0;
            double abs_sum = pi0;
            for (int s = 0; s < K; ++s) {
                if (!samples[s].valid) continue;
                const double pik = attention.at(t, slot_ring[s] + 1, i, j);
                const double w = affinity.at(s, i, j);
                numerator += pik * w * samples[s].value;
                signed_sum += pik * w;
                abs_sum += pik * std::abs(w);
            }
            const double denom = abs_sum + config.epsilon;
            const double denom2 = denom * denom;

            // Replacement route.
            grads.d_initial[px] += u * (1.0 - signed_sum / denom);

            // Self route.
            grads.d_prev[px] += u * pi0 / denom;

            // pi_0: enters numerator (via h_t), S, and S'.
            grads.d_attn[px] +=
                u * (center / denom - numerator / denom2 -
                     initial * (denom - signed_sum) / denom2);

            // Ring attention accumulators.
            for (int r = 0; r < spec.ring_count(); ++r) {
                double num_pi = 0.0, s_pi = 0.0, d_pi = 0.0;
                int base = 0;
                for (int rr = 0; rr < r; ++rr) base += spec.rings[rr].slot_count;
                for (int s = base; s < base + spec.rings[r].slot_count; ++s) {
                    if (!samples[s].valid) continue;
                    const double w = affinity.at(s, i, j);
                    num_pi += w * samples[s].value;
                    s_pi += w;
                    d_pi += std::abs(w);
                }
                grads.d_attn[static_cast<std::size_t>(r + 1) * plane + px] +=
                    u * (num_pi / denom - numerator * d_pi / denom2 -
                         initial * (s_pi * denom - signed_sum * d_pi) / denom2);
            }

            // Per-slot weight gradients and neighbor-value scatter.
            for (int s = 0; s < K; ++s) {
                if (!samples[s].valid) continue;
                const double pik = attention.at(t, slot_ring[s] + 1, i, j);
                const double w = affinity.at(s, i, j);
                const double dw_denom = pik * sgn(w);
                grads.d_aff[static_cast<std::size_t>(s) * plane + px] +=
                    u * (pik * samples[s].value / denom - numerator * dw_denom / denom2 -
                         initial * (pik * denom - signed_sum * dw_denom) / denom2);
                const double coeff = u * pik * w / denom;
                if (!samples[s].fractional) {
                    grads.d_prev[static_cast<std::size_t>(samples[s].target_i) * width +
                                 samples[s].target_j] += coeff;
                } else {
                    for (int c = 0; c < 4; ++c)
                        grads.d_prev[static_cast<std::size_t>(samples[s].taps.corner_i[c]) *
                                         width +
                                     samples[s].taps.corner_j[c]] +=
                            coeff * samples[s].taps.weight[c];
                }
            }
        }
    }
    return grads;
}

GradientBundle backward(const PropagationTape& tape, std::span<const double> upstream,
                        const AffinityVolume& affinity, const AttentionStack& attention,
                        const NeighborhoodSpec& spec, const PropagationConfig& config) {
    const DepthGrid& h_0 = tape.initial();
    const int height = h_0.height();
    const int width = h_0.width();
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    const int steps = tape.steps();

    GradientBundle bundle;
    bundle.height = height;
    bundle.width = width;
    bundle.neighbor_count = spec.neighbor_count();
    bundle.steps = attention.steps();
    bundle.ring_count = spec.ring_count() + 1;
    bundle.d_h0.assign(plane, 0.0);
    bundle.d_aff.assign(static_cast<std::size_t>(bundle.neighbor_count) * plane, 0.0);
    bundle.d_attn.assign(
        static_cast<std::size_t>(bundle.steps) * bundle.ring_count * plane, 0.0);

    std::vector<double> cotangent(upstream.begin(), upstream.end());
    for (int t = steps - 1; t >= 0; --t) {
        StepGradients sg =
            backward_step(tape, t, cotangent, affinity, attention, spec, config);
        for (std::size_t idx = 0; idx < bundle.d_aff.size(); ++idx)
            bundle.d_aff[idx] += sg.d_aff[idx];
        for (std::size_t idx = 0; idx < plane; ++idx) bundle.d_h0[idx] += sg.d_initial[idx];
        std::copy(sg.d_attn.begin(), sg.d_attn.end(),
                  bundle.d_attn.begin() +
                      static_cast<std::size_t>(t) * bundle.ring_count * plane);
        cotangent = std::move(sg.d_prev);
    }
    // The t = 0 chain terminates in h_0 itself.
    for (std::size_t idx = 0; idx < plane; ++idx) bundle.d_h0[idx] += cotangent[idx];
    return bundle;
}

std::pair<double, std::vector<double>> loss_and_grad(const DepthGrid& prediction,
                                                     const DepthGrid& ground_truth,
                                                     double alpha, double beta) {
    if (prediction.height() != ground_truth.height() ||
        prediction.width() != ground_truth.width())
        throw std::invalid_argument("loss_and_grad: prediction and ground truth shapes differ");
    const std::size_t n = prediction.size();
    std::vector<double> grad(n, 0.0);
    std::size_t valid = 0;
    double l1 = 0.0, l2 = 0.0;
    auto pred = prediction.values();
    auto gt = ground_truth.values();
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (gt[idx] <= 0.0) continue;
        ++valid;
        const double r = pred[idx] - gt[idx];
        l1 += std::abs(r);
        l2 += r * r;
    }
    if (valid == 0) throw std::invalid_argument("loss_and_grad: no valid pixels");
    const double inv = 1.0 / static_cast<double>(valid);
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (gt[idx] <= 0.0) continue;
        const double r = pred[idx] - gt[idx];
        grad[idx] = alpha * inv * sgn(r) + beta * inv * 2.0 * r;
    }
    return {alpha * l1 * inv + beta * l2 * inv, std::move(grad)};
}

}  // namespace dyspn
