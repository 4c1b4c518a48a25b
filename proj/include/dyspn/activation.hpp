#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dyspn/core.hpp"

namespace dyspn {

// Attention activation helpers. The propagation kernel consumes
// post-activation values; these map raw logits [T,R+1,H,W] into [0,1]
// either elementwise (sigmoid) or across the ring dimension per pixel
// (softmax), and expose the matching vector-Jacobian products so gradients
// can be chained through either convention.

inline std::vector<double> sigmoid(const std::vector<double>& logits) {
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-logits[i]));
    return out;
}

// d(logits) given sigmoid outputs and an upstream cotangent.
inline std::vector<double> sigmoid_vjp(const std::vector<double>& outputs,
                                       const std::vector<double>& upstream) {
    if (outputs.size() != upstream.size())
        throw std::invalid_argument("sigmoid_vjp: size mismatch");
    std::vector<double> out(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i)
        out[i] = upstream[i] * outputs[i] * (1.0 - outputs[i]);
    return out;
}

// Softmax across the R+1 ring planes at each (step, pixel) site.
inline std::vector<double> softmax_over_rings(const std::vector<double>& logits, int steps,
                                              int ring_count, int height, int width) {
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    if (logits.size() != static_cast<std::size_t>(steps) * ring_count * plane)
        throw std::invalid_argument("softmax_over_rings: buffer does not match dims");
    std::vector<double> out(logits.size());
    for (int t = 0; t < steps; ++t) {
        for (std::size_t px = 0; px < plane; ++px) {
            const std::size_t base = static_cast<std::size_t>(t) * ring_count * plane + px;
            double maxv = logits[base];
            for (int r = 1; r < ring_count; ++r)
                maxv = std::max(maxv, logits[base + r * plane]);
            double sum = 0.0;
            for (int r = 0; r < ring_count; ++r) {
                const double e = std::exp(logits[base + r * plane] - maxv);
                out[base + r * plane] = e;
                sum += e;
            }
            for (int r = 0; r < ring_count; ++r) out[base + r * plane] /= sum;
        }
    }
    return out;
}

inline std::vector<double> softmax_over_rings_vjp(const std::vector<double>& outputs,
                                                  const std::vector<double>& upstream,
                                                  int steps, int ring_count, int height,
                                                  int width) {
    if (outputs.size() != upstream.size())
        throw std::invalid_argument("softmax_over_rings_vjp: size mismatch");
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    std::vector<double> out(outputs.size());
    for (int t = 0; t < steps; ++t) {
        for (std::size_t px = 0; px < plane; ++px) {
            const std::size_t base = static_cast<std::size_t>(t) * ring_count * plane + px;
            double dot = 0.0;
            for (int r = 0; r < ring_count; ++r)
                dot += upstream[base + r * plane] * outputs[base + r * plane];
            for (int r = 0; r < ring_count; ++r)
                out[base + r * plane] =
                    outputs[base + r * plane] * (upstream[base + r * plane] - dot);
        }
    }
    return out;
}

}  // namespace dyspn
