#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyspn {

// H x W scalar field of depth values in meters, row-major.
// Convention: value > 0 is a valid depth, value == 0 means missing.
class DepthGrid {
public:
    DepthGrid(int height, int width)
        : height_(height), width_(width), values_(check_dims(height, width)) {}

    DepthGrid(int height, int width, std::vector<double> values)
        : height_(height), width_(width), values_(std::move(values)) {
        check_dims(height, width);
        if (static_cast<std::size_t>(height_) * width_ != values_.size())
            throw std::invalid_argument("DepthGrid: values length " +
                                        std::to_string(values_.size()) +
                                        " != height*width");
    }

    // Validating factory for externally sourced depth data (files, scenes).
    // Propagation intermediates go through the plain constructor instead:
    // signed affinities can legitimately push refined values below zero.
    static DepthGrid from_depth_data(int height, int width, std::vector<double> values);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return values_.size(); }

    double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * width_ + j]; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * width_ + j]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool in_bounds(int i, int j) const {
        return i >= 0 && i < height_ && j >= 0 && j < width_;
    }

private:
    static std::vector<double> check_dims(int height, int width) {
        if (height < 1 || width < 1)
            throw std::invalid_argument("DepthGrid: height and width must be >= 1, got " +
                                        std::to_string(height) + "x" + std::to_string(width));
        return std::vector<double>(static_cast<std::size_t>(height) * width, 0.0);
    }

    int height_;
    int width_;
    std::vector<double> values_;
};

// Per-pixel, per-neighbor raw affinity weights, layout [K, H, W].
// Weights may be negative and are iteration-invariant.
class AffinityVolume {
public:
    AffinityVolume(int neighbor_count, int height, int width)
        : k_(neighbor_count), height_(height), width_(width),
          weights_(check(neighbor_count, height, width)) {}

    AffinityVolume(int neighbor_count, int height, int width, std::vector<double> weights)
        : k_(neighbor_count), height_(height), width_(width), weights_(std::move(weights)) {
        check(neighbor_count, height, width);
        if (weights_.size() != static_cast<std::size_t>(k_) * height_ * width_)
            throw std::invalid_argument("AffinityVolume: weight buffer length mismatch");
        validate_finite();
    }

    int neighbor_count() const { return k_; }
    int height() const { return height_; }
    int width() const { return width_; }

    double at(int slot, int i, int j) const {
        return weights_[(static_cast<std::size_t>(slot) * height_ + i) * width_ + j];
    }
    double& at(int slot, int i, int j) {
        return weights_[(static_cast<std::size_t>(slot) * height_ + i) * width_ + j];
    }

    std::span<const double> weights() const { return weights_; }
    std::span<double> weights() { return weights_; }

private:
    static std::vector<double> check(int k, int height, int width) {
        if (k < 1) throw std::invalid_argument("AffinityVolume: neighbor_count must be >= 1");
        if (height < 1 || width < 1)
            throw std::invalid_argument("AffinityVolume: degenerate dims");
        return std::vector<double>(static_cast<std::size_t>(k) * height * width, 0.0);
    }
    void validate_finite() const;

    int k_;
    int height_;
    int width_;
    std::vector<double> weights_;
};

// Per-iteration, per-ring, per-pixel attention values in [0,1].
// Ring 0 is the self/suppression attention; rings 1..R modulate neighbor rings.
// Layout [T, R+1, H, W].
class AttentionStack {
public:
    AttentionStack(int steps, int ring_count, int height, int width)
        : steps_(steps), rings_(ring_count), height_(height), width_(width),
          values_(check(steps, ring_count, height, width)) {}

    AttentionStack(int steps, int ring_count, int height, int width, std::vector<double> values)
        : steps_(steps), rings_(ring_count), height_(height), width_(width),
          values_(std::move(values)) {
        check(steps, ring_count, height, width);
        if (values_.size() != static_cast<std::size_t>(steps_) * rings_ * height_ * width_)
            throw std::invalid_argument("AttentionStack: value buffer length mismatch");
        validate_range();
    }

    int steps() const { return steps_; }
    // Number of attention planes per step, i.e. R+1 including the self slot.
    int ring_count() const { return rings_; }
    int height() const { return height_; }
    int width() const { return width_; }

    double at(int t, int ring, int i, int j) const {
        return values_[((static_cast<std::size_t>(t) * rings_ + ring) * height_ + i) * width_ + j];
    }
    double& at(int t, int ring, int i, int j) {
        return values_[((static_cast<std::size_t>(t) * rings_ + ring) * height_ + i) * width_ + j];
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    void validate_range() const;

    static AttentionStack constant(int steps, int ring_count, int height, int width, double v);

private:
    static std::vector<double> check(int steps, int rings, int height, int width) {
        if (steps < 1) throw std::invalid_argument("AttentionStack: steps must be >= 1");
        if (rings < 2) throw std::invalid_argument("AttentionStack: need ring 0 plus >= 1 neighbor ring");
        if (height < 1 || width < 1)
            throw std::invalid_argument("AttentionStack: degenerate dims");
        return std::vector<double>(static_cast<std::size_t>(steps) * rings * height * width, 0.0);
    }

    int steps_;
    int rings_;
    int height_;
    int width_;
    std::vector<double> values_;
};

enum class Precision : std::uint8_t { F32, F64 };
enum class BoundaryPolicy : std::uint8_t { ExcludeOutOfBounds };

struct PropagationConfig {
    int steps = 6;
    // Denominator guard on S'. epsilon == 0 selects the exact-arithmetic
    // reference mode where S' == 0 yields h_0 directly.
    double epsilon = 1e-8;
    BoundaryPolicy boundary = BoundaryPolicy::ExcludeOutOfBounds;
    Precision precision = Precision::F64;
    int threads = 1;

    void validate() const {
        if (steps < 1) throw std::invalid_argument("PropagationConfig: steps must be >= 1");
        if (epsilon < 0.0) throw std::invalid_argument("PropagationConfig: epsilon must be >= 0");
        if (threads < 1) throw std::invalid_argument("PropagationConfig: threads must be >= 1");
    }
};

}  // namespace dyspn
