#pragma once

#include "dyspn/core.hpp"
#include "dyspn/fixtures.hpp"

namespace dyspn::gradcheck {

// Central finite-difference certification of the analytic backward pass.
// A fixed random projection turns propagate into a scalar function; each
// input scalar is bumped by +-1e-6 * max(1, |x|) and the quotient compared
// against the corresponding analytic cotangent. The FD side uses only the
// forward kernel, keeping it independent of the backward implementation.
struct Report {
    double max_rel_h0 = 0.0;
    double max_rel_aff = 0.0;
    double max_rel_attn = 0.0;

    double max_rel() const;
    bool pass(double tolerance) const { return max_rel() <= tolerance; }
};

Report check(const fixtures::RandomBundle& bundle, const PropagationConfig& config,
             std::uint64_t projection_seed = 1234);

}  // namespace dyspn::gradcheck
