#include "dyspn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dyspn/autograd.hpp"
#include "dyspn/propagation.hpp"

namespace dyspn::gradcheck {

double Report::max_rel() const {
    return std::max({max_rel_h0, max_rel_aff, max_rel_attn});
}

namespace {

double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({std::abs(analytic), std::abs(numeric), 1.0});
}

}  // namespace

Report check(const fixtures::RandomBundle& bundle, const PropagationConfig& config,
             std::uint64_t projection_seed) {
    const DepthGrid& h0 = bundle.h0;
    const std::size_t plane = h0.size();

    std::mt19937_64 rng(projection_seed);
    std::vector<double> projection(plane);
    for (double& v : projection) v = ((rng() >> 11) * 0x1.0p-53) * 2.0 - 1.0;

    auto forward = [&](const DepthGrid& g, const AffinityVolume& a,
                       const AttentionStack& s) {
        const auto [result, tape] = propagate(g, a, s, bundle.spec, config);
        (void)tape;
        double acc = 0.0;
        auto values = result.values();
        for (std::size_t idx = 0; idx < plane; ++idx) acc += projection[idx] * values[idx];
        return acc;
    };

    const auto [h_n, tape] =
        propagate(h0, bundle.affinity, bundle.attention, bundle.spec, config);
    (void)h_n;
    const GradientBundle grads =
        backward(tape, projection, bundle.affinity, bundle.attention, bundle.spec, config);

    Report report;
    auto central = [&](double& slot, auto&& eval) {
        const double x = slot;
        const double delta = 1e-6 * std::max(1.0, std::abs(x));
        slot = x + delta;
        const double plus = eval();
        slot = x - delta;
        const double minus = eval();
        slot = x;
        return (plus - minus) / (2.0 * delta);
    };

    {
        DepthGrid g = h0;
        auto eval = [&] { return forward(g, bundle.affinity, bundle.attention); };
        auto values = g.values();
        for (std::size_t idx = 0; idx < plane; ++idx) {
            const double fd = central(values[idx], eval);
            report.max_rel_h0 = std::max(report.max_rel_h0, rel_error(grads.d_h0[idx], fd));
        }
    }
    {
        AffinityVolume a = bundle.affinity;
        auto eval = [&] { return forward(h0, a, bundle.attention); };
        auto weights = a.weights();
        for (std::size_t idx = 0; idx < weights.size(); ++idx) {
            const double fd = central(weights[idx], eval);
            report.max_rel_aff = std::max(report.max_rel_aff, rel_error(grads.d_aff[idx], fd));
        }
    }
    {
        AttentionStack s = bundle.attention;
        auto eval = [&] { return forward(h0, bundle.affinity, s); };
        auto values = s.values();
        for (std::size_t idx = 0; idx < values.size(); ++idx) {
            const double fd = central(values[idx], eval);
            report.max_rel_attn =
                std::max(report.max_rel_attn, rel_error(grads.d_attn[idx], fd));
        }
    }
    return report;
}

}  // namespace dyspn::gradcheck
