#include "dyspn/core.hpp"

#include <cmath>

namespace dyspn {

DepthGrid DepthGrid::from_depth_data(int height, int width, std::vector<double> values) {
    DepthGrid grid(height, width, std::move(values));
    for (std::size_t idx = 0; idx < grid.values_.size(); ++idx) {
        const double v = grid.values_[idx];
        if (!std::isfinite(v))
            throw std::invalid_argument("DepthGrid: non-finite value at index " +
                                        std::to_string(idx));
        if (v < 0.0)
            throw std::invalid_argument("DepthGrid: negative depth " + std::to_string(v) +
                                        " at index " + std::to_string(idx));
    }
    return grid;
}

void AffinityVolume::validate_finite() const {
    for (std::size_t idx = 0; idx < weights_.size(); ++idx) {
        if (!std::isfinite(weights_[idx]))
            throw std::invalid_argument("AffinityVolume: non-finite weight at index " +
                                        std::to_string(idx));
    }
}

void AttentionStack::validate_range() const {
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
        const double v = values_[idx];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::invalid_argument("AttentionStack: value " + std::to_string(v) +
                                        " at index " + std::to_string(idx) +
                                        " outside [0,1]");
    }
}

AttentionStack AttentionStack::constant(int steps, int ring_count, int height, int width,
                                        double v) {
    AttentionStack stack(steps, ring_count, height, width);
    for (double& x : stack.values_) x = v;
    stack.validate_range();
    return stack;
}

}  // namespace dyspn
