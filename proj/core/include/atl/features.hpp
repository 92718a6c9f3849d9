#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atl/dataio.hpp"
#include "atl/matrix.hpp"

namespace atl {

inline constexpr std::size_t kTargetLags = 24;
inline constexpr std::size_t kWeatherLags = 25;  // t down to t-24
inline constexpr std::size_t kFeatureColumns =
    kTargetLags + kComponentsPerLead * kWeatherLags;  // 124

/// Histogram mutual information in nats: equal-width 2-D histogram over each
/// variable's own range, Sum p(i,j) ln(p(i,j) / (p(i) p(j))).
double mutual_information(std::span<const double> x, std::span<const double> y,
                          std::size_t bins);

struct MIScore {
    int lead_hours = 0;
    double score = 0.0;  // nats, mean over the lead's four channels
    std::size_t bins = 0;
};

/// Scores each lead time by the mean MI between its four forecast channels
/// and the measurement channel, and returns the argmax. Ties break to the
/// smallest lead.
MIScore select_lead_time(const WindFarmSeries& series, std::size_t bins = 16);

/// Lagged design matrix: for every target hour t >= 24 the row holds the 24
/// previous measurements followed by the chosen lead's direction, zonal,
/// meridional and speed channels at t..t-24 (124 columns total), with
/// y = measurement(t).
struct FeatureMatrix {
    Matrix x;
    std::vector<double> y;
    std::vector<std::string> column_labels;
    int lead_hours = 0;
    Measurand target = Measurand::Power;
    std::size_t first_target_row = kTargetLags;  // series row of x row 0
};

FeatureMatrix build_lagged_features(const WindFarmSeries& series, int lead_hours,
                                    Measurand target = Measurand::Power);

/// Feature rows whose target hour lies in the series window [begin, end).
RowRange feature_rows_for(const FeatureMatrix& features, RowRange series_rows);

void save_features_csv(const FeatureMatrix& features, const std::filesystem::path& path);

}  // namespace atl
