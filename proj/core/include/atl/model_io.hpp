#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "atl/metrics.hpp"
#include "atl/transfer.hpp"

namespace atl {

/// Versioned JSON model documents. Doubles are written in shortest
/// round-trip form, so a save/load cycle reproduces every parameter bit for
/// bit and re-serialization is byte-identical.

std::string to_json_string(const StackedSparseRegressor& model);
StackedSparseRegressor regressor_from_json_string(const std::string& text);

std::string to_json_string(const Dbn& model);
Dbn dbn_from_json_string(const std::string& text);

void save_regressor(const StackedSparseRegressor& model, const std::filesystem::path& path);
StackedSparseRegressor load_regressor(const std::filesystem::path& path);

std::string to_json_string(const EnsembleModel& model);
EnsembleModel ensemble_from_json_string(const std::string& text);

void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_ensemble(const std::filesystem::path& path);

std::string to_json_string(const MetricsReport& report);
std::string to_json_string(std::span<const AggregatedMetric> aggregated);

/// One JSON object per line, one line per training event.
std::string run_log_to_jsonl(const RunLog& log);

/// Norm parameters plus the split row indices for a normalized-series CSV.
std::string sidecar_json(const NormParams& params, std::size_t hours_per_month,
                         std::size_t total_rows);

}  // namespace atl
