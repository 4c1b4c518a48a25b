#include "dyspn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dyspn {

std::string MetricsReport::to_text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "RMSE (mm):    " << rmse_mm << "\n"
       << "MAE (mm):     " << mae_mm << "\n"
       << "iRMSE (1/km): " << irmse << "\n"
       << "iMAE (1/km):  " << imae << "\n"
       << "REL:          " << rel << "\n"
       << "delta_1.25:   " << delta[0] << " %\n"
       << "delta_1.25^2: " << delta[1] << " %\n"
       << "delta_1.25^3: " << delta[2] << " %\n"
       << "valid pixels: " << valid_count << "\n";
    return os.str();
}

std::string MetricsReport::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "rmse_mm,mae_mm,irmse,imae,rel,delta1,delta2,delta3,valid_count\n"
       << rmse_mm << "," << mae_mm << "," << irmse << "," << imae << "," << rel << ","
       << delta[0] << "," << delta[1] << "," << delta[2] << "," << valid_count << "\n";
    return os.str();
}

MetricsReport evaluate(const DepthGrid& prediction, const DepthGrid& ground_truth) {
    if (prediction.height() != ground_truth.height() ||
        prediction.width() != ground_truth.width())
        throw std::invalid_argument(
            "evaluate: prediction " + std::to_string(prediction.height()) + "x" +
            std::to_string(prediction.width()) + " != ground truth " +
            std::to_string(ground_truth.height()) + "x" + std::to_string(ground_truth.width()));

    auto pred = prediction.values();
    auto gt = ground_truth.values();
    std::size_t valid = 0;
    std::size_t nonpositive_pred = 0;
    double se_mm = 0.0, ae_mm = 0.0, ise = 0.0, iae = 0.0, rel = 0.0;
    std::size_t hits[3] = {0, 0, 0};
    const double taus[3] = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

    for (std::size_t idx = 0; idx < gt.size(); ++idx) {
        const double g = gt[idx];
        if (g <= 0.0) continue;
        ++valid;
        const double p = pred[idx];
        if (p <= 0.0) {
            ++nonpositive_pred;
            continue;
        }
        const double diff_mm = (p - g) * 1000.0;
        se_mm += diff_mm * diff_mm;
        ae_mm += std::abs(diff_mm);
        // 1/h in 1/km: 1/h_m * 1000.
        const double idiff = (1.0 / p - 1.0 / g) * 1000.0;
        ise += idiff * idiff;
        iae += std::abs(idiff);
        rel += std::abs((p - g) / g);
        const double ratio = std::max(p / g, g / p);
        for (int k = 0; k < 3; ++k)
            if (ratio < taus[k]) ++hits[k];
    }
    if (valid == 0) throw std::invalid_argument("evaluate: no valid ground-truth pixels");
    if (nonpositive_pred > 0)
        throw std::invalid_argument("evaluate: " + std::to_string(nonpositive_pred) +
                                    " nonpositive predictions on the valid set (inverse "
                                    "metrics undefined)");

    MetricsReport report;
    report.valid_count = valid;
    const double inv = 1.0 / static_cast<double>(valid);
    report.rmse_mm = std::sqrt(se_mm * inv);
    report.mae_mm = ae_mm * inv;
    report.irmse = std::sqrt(ise * inv);
    report.imae = iae * inv;
    report.rel = rel * inv;
    for (int k = 0; k < 3; ++k) report.delta[k] = 100.0 * static_cast<double>(hits[k]) * inv;
    return report;
}

std::vector<double> rmse_curve(const PropagationTape& tape, const DepthGrid& ground_truth) {
    std::vector<double> curve;
    curve.reserve(tape.grids.size());
    for (const DepthGrid& g : tape.grids) curve.push_back(evaluate(g, ground_truth).rmse_mm);
    return curve;
}

}  // namespace dyspn
