#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atl/autoencoder.hpp"
#include "atl/dataio.hpp"
#include "atl/dbn.hpp"
#include "atl/features.hpp"
#include "atl/metrics.hpp"

namespace atl {

enum class MetaInputMode { AllThree, LastOnly };

std::string to_string(MetaInputMode m);
MetaInputMode meta_input_mode_from_string(const std::string& s);

struct TransferPlan {
    std::string source_farm = "farm2";
    std::size_t hours_per_month = 720;
    std::size_t max_base_learners = 3;
    MetaInputMode meta_input_mode = MetaInputMode::AllThree;
    Measurand target_channel = Measurand::Power;
    std::size_t cross_task_window_hours = 1440;  // two months
    std::size_t mi_bins = 16;
    /// Reuse the source farm's selected lead time on every target farm
    /// instead of recomputing MI per farm.
    bool freeze_lead_to_source = false;
    /// Fine-tune learner k from learner k-1 instead of from the pretrained
    /// source each time.
    bool chained_inter_tl = false;
    /// Permit the linear input adapter when a transfer target has a foreign
    /// feature width. Off by default; this is an extension, not part of the
    /// underlying method.
    bool allow_input_adapter = false;
};

struct PipelineConfig {
    AeTrainConfig ae;
    /// When dbn.layer_widths is empty, the first two farms get the small
    /// published architecture and the rest the large one.
    DbnTrainConfig dbn;
    /// Fine-tune epochs for transfer learners; defaults to a quarter of the
    /// from-scratch supervised epochs.
    std::optional<std::size_t> tl_epochs;

    std::size_t effective_tl_epochs() const {
        return tl_epochs ? *tl_epochs : ae.finetune_epochs / 4;
    }
};

/// A farm's series after normalization, splitting and feature construction.
struct FarmData {
    WindFarmSeries normalized;
    NormParams norm;
    DatasetSplit split;
    FeatureMatrix features;
    MIScore lead;
};

FarmData prepare_farm(const WindFarmSeries& raw, const TransferPlan& plan,
                      std::shared_ptr<SplitAccessLog> access_log = nullptr,
                      std::optional<int> forced_lead = std::nullopt);

struct EnsembleModel;

/// Prepares a dataset for evaluating a saved ensemble: applies the bundle's
/// stored normalization and lead time instead of refitting them.
FarmData prepare_farm_with(const WindFarmSeries& raw, const EnsembleModel& model);

/// One training event in the run log. wallclock_ms is the only field that is
/// allowed to differ between identically seeded runs.
struct TrainEvent {
    std::string kind;  // "pretrain_scratch" | "finetune" | "meta_train"
    std::string farm;
    std::string window;
    std::string model_id;
    std::string parent_model_id;
    std::size_t epochs = 0;
    double final_loss = 0.0;
    double wallclock_ms = 0.0;
};

using RunLog = std::vector<TrainEvent>;

/// Full stack pretraining plus supervised fine-tuning on the source farm's
/// DS3 features. The only model in a run that trains from scratch.
StackedSparseRegressor pretrain_source(const FarmData& farm, const TransferPlan& plan,
                                       const PipelineConfig& cfg, const RngStream& rng,
                                       RunLog* log = nullptr);

/// Learner 1 is the source model itself; learners 2 and 3 fine-tune it on
/// DS4 and DS5 of the same farm.
std::vector<StackedSparseRegressor> intra_transfer(const StackedSparseRegressor& source,
                                                   const FarmData& farm,
                                                   const TransferPlan& plan,
                                                   const PipelineConfig& cfg,
                                                   const RngStream& rng,
                                                   RunLog* log = nullptr);

/// Three learners fine-tuned from the source model on the target farm's DS3,
/// DS4 and DS5; never trains from scratch.
std::vector<StackedSparseRegressor> inter_transfer(const StackedSparseRegressor& source,
                                                   const FarmData& target,
                                                   const TransferPlan& plan,
                                                   const PipelineConfig& cfg,
                                                   const RngStream& rng,
                                                   RunLog* log = nullptr);

/// Admits a new learner into the rolling pool, retiring the oldest entries
/// beyond max_learners.
void admit_learner(std::vector<StackedSparseRegressor>& pool, StackedSparseRegressor learner,
                   std::size_t max_learners);

/// Copy of the feature rows [rows.begin, rows.end).
FeatureMatrix slice_features(const FeatureMatrix& features, RowRange rows);

/// Meta-learner design matrix: base predictions (clamped to [0, 1]) followed
/// by the original feature columns. AllThree keeps one column per learner,
/// LastOnly keeps just the newest learner's predictions.
FeatureMatrix build_meta_inputs(std::span<const StackedSparseRegressor> base_learners,
                                const FeatureMatrix& ds6_features, MetaInputMode mode);

struct EnsembleModel {
    std::string farm_id;
    std::vector<StackedSparseRegressor> base_learners;  // oldest to newest
    Dbn meta;
    MetaInputMode meta_mode = MetaInputMode::AllThree;
    int lead_hours = 12;
    std::size_t mi_bins = 16;
    Measurand target = Measurand::Power;
    std::size_t hours_per_month = 720;
    NormParams norm;
};

/// Trains the DBN meta-learner on DS6 meta inputs; base learners are frozen
/// and copied into the ensemble untouched.
EnsembleModel train_ensemble(const std::vector<StackedSparseRegressor>& base_learners,
                             const FarmData& farm, const TransferPlan& plan,
                             const DbnTrainConfig& dbn_cfg, const RngStream& rng,
                             RunLog* log = nullptr);

/// DS7 predictions for each base learner and the meta-learner, on the
/// normalized scale.
struct EnsemblePredictions {
    std::vector<std::int64_t> hours;  // absolute target hours
    std::vector<double> actual;
    std::vector<std::string> model_ids;
    std::vector<std::vector<double>> predictions;  // one vector per model
};

EnsemblePredictions predict_ensemble(const EnsembleModel& model, const FarmData& farm);

/// DS7 metrics for each base learner and the meta-learner, on both the
/// normalized and the measurement scale, plus the train/test power histogram.
MetricsReport evaluate_ensemble(const EnsembleModel& model, const FarmData& farm);

struct ScheduleResult {
    std::vector<EnsembleModel> ensembles;  // in input farm order
    std::vector<MetricsReport> reports;
    RunLog log;
};

/// The full adaptive schedule: source pretraining, intra transfer on the
/// source farm, inter transfer on every other farm, then per-farm meta
/// training and DS7 evaluation. Each farm runs on a seed-derived stream, so
/// results do not depend on scheduling order.
ScheduleResult run_adaptive_schedule(std::span<const WindFarmSeries> farms,
                                     const TransferPlan& plan, const PipelineConfig& cfg,
                                     std::uint64_t seed,
                                     std::shared_ptr<SplitAccessLog> access_log = nullptr);

struct CrossTaskResult {
    StackedSparseRegressor model;      // the last window's learner
    std::vector<RowRange> windows;     // cumulative training windows
    MetricsReport report;              // held-out tail
    EnsemblePredictions predictions;   // tail predictions of the final learner
    RunLog log;
};

/// Transfers the source model onto a wind-speed series: fine-tunes on
/// cumulative two-month windows (keeping the rolling pool) and evaluates the
/// final learner on the held-out tail. A foreign feature width raises
/// WidthMismatch unless the plan allows the input adapter.
CrossTaskResult cross_task_transfer(const StackedSparseRegressor& source,
                                    const WindFarmSeries& speed_series,
                                    const TransferPlan& plan, const PipelineConfig& cfg,
                                    const RngStream& rng);

}  // namespace atl
