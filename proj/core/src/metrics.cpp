#include "atl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "atl/error.hpp"

namespace atl {

namespace {

void check_pair(std::span<const double> a, std::span<const double> p, const char* context) {
    if (a.size() != p.size()) throw LengthMismatch(a.size(), p.size(), context);
    if (a.empty()) throw EmptyInput(context);
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    // Per-element root mean squared error. A squared-sum variant would break
    // the rmse^2 = sde^2 + mean-error^2 decomposition this module guarantees.
    check_pair(actual, predicted, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(actual[i] - predicted[i]);
    return s / static_cast<double>(actual.size());
}

double sde(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted, "sde");
    const double m = static_cast<double>(actual.size());
    double mean_err = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) mean_err += actual[i] - predicted[i];
    mean_err /= m;
    double var = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = (actual[i] - predicted[i]) - mean_err;
        var += d * d;
    }
    return std::sqrt(var / m);
}

double pearson(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted, "pearson");
    const double m = static_cast<double>(actual.size());
    double mean_a = 0.0, mean_p = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        mean_a += actual[i];
        mean_p += predicted[i];
    }
    mean_a /= m;
    mean_p /= m;
    double cov = 0.0, var_a = 0.0, var_p = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double da = actual[i] - mean_a;
        const double dp = predicted[i] - mean_p;
        cov += da * dp;
        var_a += da * da;
        var_p += dp * dp;
    }
    if (var_a == 0.0) throw ConstantVector("pearson(actual)");
    if (var_p == 0.0) throw ConstantVector("pearson(predicted)");
    return cov / std::sqrt(var_a * var_p);
}

Metrics compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
    Metrics m;
    m.rmse = rmse(actual, predicted);
    m.mae = mae(actual, predicted);
    m.sde = sde(actual, predicted);
    m.pearson = pearson(actual, predicted);
    m.n_points = actual.size();
    return m;
}

PowerHistogram power_histogram(std::span<const double> train_power,
                               std::span<const double> test_power, std::size_t bins) {
    if (bins < 2) throw DataError("power_histogram: bins must be >= 2");
    if (train_power.empty() || test_power.empty()) throw EmptyInput("power_histogram");
    PowerHistogram h;
    h.bin_edges.resize(bins + 1);
    const double width = 1.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.bin_edges[b] = width * static_cast<double>(b);

    auto densify = [&](std::span<const double> values) {
        std::vector<double> counts(bins, 0.0);
        for (double v : values) {
            auto b = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * static_cast<double>(bins));
            if (b == bins) b = bins - 1;
            counts[b] += 1.0;
        }
        const double norm = static_cast<double>(values.size()) * width;
        for (double& c : counts) c /= norm;
        return counts;
    };
    h.train_density = densify(train_power);
    h.test_density = densify(test_power);

    double tv = 0.0;
    for (std::size_t b = 0; b < bins; ++b)
        tv += std::abs(h.train_density[b] - h.test_density[b]) * width;
    h.total_variation = 0.5 * tv;
    return h;
}

AggregateStat aggregate_values(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("aggregate_values");
    AggregateStat s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

std::vector<AggregatedMetric> aggregate_runs(std::span<const MetricsReport> runs) {
    if (runs.empty()) throw EmptyInput("aggregate_runs");
    const std::size_t n_models = runs.front().models.size();
    for (const auto& r : runs)
        if (r.models.size() != n_models)
            throw DataError("aggregate_runs: reports list different model sets");

    std::vector<AggregatedMetric> out(n_models);
    for (std::size_t mi = 0; mi < n_models; ++mi) {
        out[mi].model_id = runs.front().models[mi].model_id;
        std::vector<double> rmse_v, mae_v, sde_v, pearson_v;
        for (const auto& r : runs) {
            if (r.models[mi].model_id != out[mi].model_id)
                throw DataError("aggregate_runs: model order differs between runs");
            rmse_v.push_back(r.models[mi].normalized.rmse);
            mae_v.push_back(r.models[mi].normalized.mae);
            sde_v.push_back(r.models[mi].normalized.sde);
            pearson_v.push_back(r.models[mi].normalized.pearson);
        }
        out[mi].rmse = aggregate_values(rmse_v);
        out[mi].mae = aggregate_values(mae_v);
        out[mi].sde = aggregate_values(sde_v);
        out[mi].pearson = aggregate_values(pearson_v);
    }
    return out;
}

}  // namespace atl
