#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace atl {

struct CriterionResult {
    std::string id;
    bool passed = false;
    std::string details;
    double seconds = 0.0;
};

/// AC-1: analytic vs central-difference gradients for 20 sparse-AE and 10
/// DBN fine-tune configurations, max relative error < 1e-5 at h = 1e-5.
CriterionResult verify_gradient_correctness(std::uint64_t seed);

/// AC-2: 50 random RBMs with at most 10 units; conditionals match exact
/// enumeration to 1e-12 and the joint distribution sums to 1 +- 1e-12.
CriterionResult verify_rbm_exactness(std::uint64_t seed);

/// AC-3: metrics against the naive reference on 1000 random pairs to 1e-12,
/// plus the rmse^2 = sde^2 + mean-error^2 decomposition.
CriterionResult verify_metric_oracle(std::uint64_t seed);

/// The oracle-backed criteria, runnable without any dataset.
std::vector<CriterionResult> run_fast_verification(std::uint64_t seed);

std::string verification_to_json(const std::vector<CriterionResult>& results);

}  // namespace atl
