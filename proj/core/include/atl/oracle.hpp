#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "atl/dbn.hpp"

namespace atl {
namespace oracle {

/// Brute-force reference implementations used to verify the main modules.
/// Nothing in here shares code with the implementations it checks: metrics
/// are straight loops, conditionals come from full-state enumeration, and
/// gradients come from central differences.

struct NaiveMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    double sde = 0.0;
    std::optional<double> pearson;  // empty when either vector is constant
};

NaiveMetrics naive_metrics(std::span<const double> actual, std::span<const double> predicted);

struct GradientCheckReport {
    double max_rel_error = 0.0;
    std::size_t trials = 0;
    std::size_t components = 0;  // parameters checked across all trials
};

/// Random small sparse-AE layers (published lambda/beta/p values included in
/// the sweep) against the central-difference gradient of the training loss.
GradientCheckReport check_ae_gradients(std::size_t trials, std::uint64_t seed,
                                       double h = 1e-5);

/// Random small DBNs: the fine-tuning MSE gradient recovered from a single
/// unit-rate SGD step against central differences.
GradientCheckReport check_dbn_gradients(std::size_t trials, std::uint64_t seed,
                                        double h = 1e-5);

struct RbmEnumeration {
    std::size_t visible_units = 0;
    std::size_t hidden_units = 0;
    /// hidden_conditionals[v_bits * n + j] = P(h_j = 1 | v)
    std::vector<double> hidden_conditionals;
    /// visible_conditionals[h_bits * m + i] = P(v_i = 1 | h)
    std::vector<double> visible_conditionals;
    double z_joint = 0.0;        // sum over all states of e^-E
    double z_free_energy = 0.0;  // sum over visible states of e^-F(v)
};

/// Exact conditionals and the partition function by full-state enumeration,
/// with its own energy accumulation. Limit: 10 total units.
RbmEnumeration enumerate_rbm(const Rbm& rbm);

}  // namespace oracle
}  // namespace atl
