#pragma once

#include <span>
#include <string>
#include <vector>

namespace atl {

double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

/// Population standard deviation of the error vector; together with rmse it
/// satisfies rmse^2 = sde^2 + mean(error)^2.
double sde(std::span<const double> actual, std::span<const double> predicted);

/// Throws ConstantVector when either input has zero variance.
double pearson(std::span<const double> actual, std::span<const double> predicted);

struct Metrics {
    double rmse = 0.0;
    double mae = 0.0;
    double sde = 0.0;
    double pearson = 0.0;
    std::size_t n_points = 0;
};

Metrics compute_metrics(std::span<const double> actual, std::span<const double> predicted);

/// Paired equal-width histograms over [0, 1], normalized to densities,
/// plus the total-variation distance between the two distributions.
struct PowerHistogram {
    std::vector<double> bin_edges;      // bins + 1 entries
    std::vector<double> train_density;  // density, integrates to 1
    std::vector<double> test_density;
    double total_variation = 0.0;
};

PowerHistogram power_histogram(std::span<const double> train_power,
                               std::span<const double> test_power, std::size_t bins);

struct AggregateStat {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

/// Metrics for one model on one dataset, on both measurement scales.
struct ModelEvaluation {
    std::string model_id;
    Metrics normalized;
    Metrics denormalized;
};

struct MetricsReport {
    std::string farm_id;
    std::vector<ModelEvaluation> models;  // 3 base learners then the meta-learner
    PowerHistogram histogram;
};

struct AggregatedMetric {
    std::string model_id;
    AggregateStat rmse, mae, sde, pearson;  // over independent runs, normalized scale
};

/// Per-model mean and population std over independent runs. All reports must
/// list the same models in the same order.
std::vector<AggregatedMetric> aggregate_runs(std::span<const MetricsReport> runs);

AggregateStat aggregate_values(std::span<const double> values);

}  // namespace atl
