#pragma once

#include <string>
#include <vector>

#include "dyspn/core.hpp"
#include "dyspn/propagation.hpp"

namespace dyspn {

// Depth-completion evaluation over pixels with valid ground truth.
// RMSE/MAE in millimeters, inverse metrics in 1/km, delta thresholds at
// tau = 1.25, 1.25^2, 1.25^3 as percentages of evaluated pixels.
struct MetricsReport {
    double rmse_mm = 0.0;
    double mae_mm = 0.0;
    double irmse = 0.0;
    double imae = 0.0;
    double rel = 0.0;
    double delta[3] = {0.0, 0.0, 0.0};
    std::size_t valid_count = 0;

    std::string to_text() const;
    std::string to_csv() const;
};

MetricsReport evaluate(const DepthGrid& prediction, const DepthGrid& ground_truth);

// RMSE against the ground truth at every tape entry h^0..h^N.
std::vector<double> rmse_curve(const PropagationTape& tape, const DepthGrid& ground_truth);

}  // namespace dyspn
