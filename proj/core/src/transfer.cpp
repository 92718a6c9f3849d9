#include "atl/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "atl/error.hpp"

namespace atl {

namespace {

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

std::string window_label(Window w) {
    switch (w) {
        case Window::DS3: return "M1-M4";
        case Window::DS4: return "M1-M8";
        case Window::DS5: return "M1-M12";
        case Window::DS6: return "M13-M16";
        case Window::DS7: return "M17-M20";
    }
    return "?";
}

std::string hours_label(std::size_t end_hour, std::size_t hours_per_month) {
    if (hours_per_month > 0 && end_hour % hours_per_month == 0)
        return "M1-M" + std::to_string(end_hour / hours_per_month);
    return "H0-H" + std::to_string(end_hour);
}

// Seed-derivation salts. Every training stage derives its own child stream
// from the farm stream, so learners are independent of each other and of
// scheduling order, and the same (data, window, seed) always draws the same
// randomness regardless of which transfer path requested it.
constexpr std::uint64_t kScratchSalt = 1;
constexpr std::uint64_t kWindowSaltBase = 10;  // + window ordinal (DS3=0, DS4=1, DS5=2)
constexpr std::uint64_t kMetaSalt = 50;

std::uint64_t window_ordinal(Window w) {
    switch (w) {
        case Window::DS3: return 0;
        case Window::DS4: return 1;
        case Window::DS5: return 2;
        default: return 9;
    }
}

struct TrainingSlice {
    Matrix x;
    std::vector<double> y;
};

TrainingSlice training_rows(const FarmData& farm, Window w) {
    const RowRange series_rows = farm.split.range(w, AccessPurpose::Training);
    const RowRange rows = feature_rows_for(farm.features, series_rows);
    TrainingSlice s;
    s.x = slice_rows(farm.features.x, rows.begin, rows.end);
    s.y.assign(farm.features.y.begin() + static_cast<std::ptrdiff_t>(rows.begin),
               farm.features.y.begin() + static_cast<std::ptrdiff_t>(rows.end));
    return s;
}

void push_event(RunLog* log, std::string kind, const std::string& farm,
                const std::string& window, const Provenance& prov, const TrainStats& stats,
                double started_ms) {
    if (!log) return;
    TrainEvent e;
    e.kind = std::move(kind);
    e.farm = farm;
    e.window = window;
    e.model_id = prov.model_id;
    e.parent_model_id = prov.parent_model_id;
    e.epochs = stats.epochs;
    e.final_loss = stats.final_loss;
    e.wallclock_ms = now_ms() - started_ms;
    log->push_back(std::move(e));
}

}  // namespace

std::string to_string(MetaInputMode m) {
    return m == MetaInputMode::AllThree ? "all_three" : "last_only";
}

MetaInputMode meta_input_mode_from_string(const std::string& s) {
    if (s == "all" || s == "all_three") return MetaInputMode::AllThree;
    if (s == "last" || s == "last_only") return MetaInputMode::LastOnly;
    throw DataError("unknown meta input mode '" + s + "', expected 'all' or 'last'");
}

FarmData prepare_farm(const WindFarmSeries& raw, const TransferPlan& plan,
                      std::shared_ptr<SplitAccessLog> access_log,
                      std::optional<int> forced_lead) {
    FarmData data;
    data.split = split_adaptive(raw, plan.hours_per_month);
    if (access_log) data.split.attach_log(std::move(access_log));

    auto [normalized, params] = normalize(raw, 16 * plan.hours_per_month);
    data.normalized = std::move(normalized);
    data.norm = params;

    if (forced_lead) {
        data.lead.lead_hours = *forced_lead;
        data.lead.bins = plan.mi_bins;
        data.lead.score = 0.0;
    } else {
        data.lead = select_lead_time(data.normalized, plan.mi_bins);
    }
    data.features =
        build_lagged_features(data.normalized, data.lead.lead_hours, data.normalized.measurand());
    return data;
}

FarmData prepare_farm_with(const WindFarmSeries& raw, const EnsembleModel& model) {
    FarmData data;
    data.split = split_adaptive(raw, model.hours_per_month);
    data.normalized = apply_normalization(raw, model.norm);
    data.norm = model.norm;
    data.lead.lead_hours = model.lead_hours;
    data.lead.bins = model.mi_bins;
    data.features =
        build_lagged_features(data.normalized, model.lead_hours, data.normalized.measurand());
    return data;
}

StackedSparseRegressor pretrain_source(const FarmData& farm, const TransferPlan& plan,
                                       const PipelineConfig& cfg, const RngStream& rng,
                                       RunLog* log) {
    if (farm.normalized.farm_id() != plan.source_farm)
        throw DataError("pretrain_source: farm '" + farm.normalized.farm_id() +
                        "' is not the plan's source farm '" + plan.source_farm + "'");
    const double started = now_ms();
    const TrainingSlice ds3 = training_rows(farm, Window::DS3);

    Provenance prov;
    prov.farm_id = farm.normalized.farm_id();
    prov.window = window_label(Window::DS3);
    prov.model_id = prov.farm_id + "/" + prov.window;

    RngStream stream = rng.derive(kScratchSalt);
    const std::vector<SparseAeLayer> layers = stack_pretrain(ds3.x, cfg.ae, stream);
    TrainStats stats;
    StackedSparseRegressor model =
        stack_finetune(layers, ds3.x, ds3.y, cfg.ae, stream, prov, &stats);
    push_event(log, "pretrain_scratch", prov.farm_id, prov.window, model.provenance, stats,
               started);
    return model;
}

namespace {

StackedSparseRegressor transfer_learner(const StackedSparseRegressor& base,
                                        const TrainingSlice& slice, const std::string& farm_id,
                                        const std::string& window, const TransferPlan& plan,
                                        const PipelineConfig& cfg, RngStream rng, RunLog* log) {
    const double started = now_ms();
    Provenance prov;
    prov.farm_id = farm_id;
    prov.window = window;
    prov.model_id = farm_id + "/" + window;

    FinetuneOptions opt;
    opt.epochs = cfg.effective_tl_epochs();
    opt.batch_size = cfg.ae.batch_size;
    opt.learning_rate = cfg.ae.finetune_learning_rate;

    const StackedSparseRegressor* parent = &base;
    StackedSparseRegressor adapted;
    if (slice.x.cols() != base.input_width()) {
        if (!plan.allow_input_adapter)
            throw WidthMismatch(base.input_width(), slice.x.cols(), "transfer to " + prov.model_id);
        adapted = with_input_adapter(base, slice.x.cols(), rng);
        parent = &adapted;
    }

    TrainStats stats;
    StackedSparseRegressor child =
        finetune_from(*parent, slice.x, slice.y, opt, rng, prov, &stats);
    push_event(log, "finetune", farm_id, window, child.provenance, stats, started);
    return child;
}

}  // namespace

std::vector<StackedSparseRegressor> intra_transfer(const StackedSparseRegressor& source,
                                                   const FarmData& farm,
                                                   const TransferPlan& plan,
                                                   const PipelineConfig& cfg,
                                                   const RngStream& rng, RunLog* log) {
    if (farm.normalized.farm_id() != plan.source_farm)
        throw DataError("intra_transfer: farm '" + farm.normalized.farm_id() +
                        "' is not the source farm");
    std::vector<StackedSparseRegressor> learners;
    learners.push_back(source);
    const std::string farm_id = farm.normalized.farm_id();
    for (Window w : {Window::DS4, Window::DS5}) {
        const TrainingSlice slice = training_rows(farm, w);
        learners.push_back(transfer_learner(source, slice, farm_id, window_label(w), plan, cfg,
                                            rng.derive(kWindowSaltBase + window_ordinal(w)),
                                            log));
    }
    return learners;
}

std::vector<StackedSparseRegressor> inter_transfer(const StackedSparseRegressor& source,
                                                   const FarmData& target,
                                                   const TransferPlan& plan,
                                                   const PipelineConfig& cfg,
                                                   const RngStream& rng, RunLog* log) {
    const std::string farm_id = target.normalized.farm_id();
    if (farm_id == plan.source_farm)
        throw DataError("inter_transfer: target equals the source farm");
    std::vector<StackedSparseRegressor> learners;
    const StackedSparseRegressor* parent = &source;
    for (Window w : {Window::DS3, Window::DS4, Window::DS5}) {
        const TrainingSlice slice = training_rows(target, w);
        learners.push_back(transfer_learner(*parent, slice, farm_id, window_label(w), plan, cfg,
                                            rng.derive(kWindowSaltBase + window_ordinal(w)),
                                            log));
        if (plan.chained_inter_tl) parent = &learners.back();
    }
    return learners;
}

void admit_learner(std::vector<StackedSparseRegressor>& pool, StackedSparseRegressor learner,
                   std::size_t max_learners) {
    if (max_learners == 0) throw DataError("admit_learner: pool capacity must be positive");
    pool.push_back(std::move(learner));
    while (pool.size() > max_learners) pool.erase(pool.begin());
}

FeatureMatrix slice_features(const FeatureMatrix& features, RowRange rows) {
    FeatureMatrix out;
    out.x = slice_rows(features.x, rows.begin, rows.end);
    out.y.assign(features.y.begin() + static_cast<std::ptrdiff_t>(rows.begin),
                 features.y.begin() + static_cast<std::ptrdiff_t>(rows.end));
    out.column_labels = features.column_labels;
    out.lead_hours = features.lead_hours;
    out.target = features.target;
    out.first_target_row = features.first_target_row + rows.begin;
    return out;
}

FeatureMatrix build_meta_inputs(std::span<const StackedSparseRegressor> base_learners,
                                const FeatureMatrix& ds6_features, MetaInputMode mode) {
    if (base_learners.empty()) throw EmptyInput("build_meta_inputs");
    for (const auto& learner : base_learners)
        if (learner.input_width() != ds6_features.x.cols())
            throw WidthMismatch(learner.input_width(), ds6_features.x.cols(),
                                "build_meta_inputs");

    const std::size_t first =
        mode == MetaInputMode::AllThree ? 0 : base_learners.size() - 1;
    FeatureMatrix out;
    out.lead_hours = ds6_features.lead_hours;
    out.target = ds6_features.target;
    out.first_target_row = ds6_features.first_target_row;
    out.y = ds6_features.y;

    Matrix preds(ds6_features.x.rows(), base_learners.size() - first);
    std::size_t col = 0;
    for (std::size_t k = first; k < base_learners.size(); ++k, ++col) {
        const std::vector<double> p = predict(base_learners[k], ds6_features.x);
        for (std::size_t i = 0; i < p.size(); ++i)
            preds(i, col) = std::clamp(p[i], 0.0, 1.0);
        out.column_labels.push_back("pred_" + base_learners[k].provenance.window);
    }
    out.column_labels.insert(out.column_labels.end(), ds6_features.column_labels.begin(),
                             ds6_features.column_labels.end());
    const Matrix parts[2] = {std::move(preds), ds6_features.x};
    out.x = hcat(parts);
    return out;
}

EnsembleModel train_ensemble(const std::vector<StackedSparseRegressor>& base_learners,
                             const FarmData& farm, const TransferPlan& plan,
                             const DbnTrainConfig& dbn_cfg, const RngStream& rng, RunLog* log) {
    if (base_learners.empty()) throw EmptyInput("train_ensemble");
    const double started = now_ms();

    const RowRange ds6 =
        feature_rows_for(farm.features, farm.split.range(Window::DS6, AccessPurpose::Training));
    const FeatureMatrix ds6_features = slice_features(farm.features, ds6);
    const FeatureMatrix meta_inputs =
        build_meta_inputs(base_learners, ds6_features, plan.meta_input_mode);

    RngStream stream = rng.derive(kMetaSalt);
    Dbn meta = dbn_pretrain(meta_inputs.x, dbn_cfg, stream);
    TrainStats stats;
    dbn_finetune_regression(meta, meta_inputs.x, meta_inputs.y, dbn_cfg, stream, &stats);

    EnsembleModel model;
    model.farm_id = farm.normalized.farm_id();
    model.base_learners = base_learners;
    model.meta = std::move(meta);
    model.meta_mode = plan.meta_input_mode;
    model.lead_hours = farm.lead.lead_hours;
    model.mi_bins = farm.lead.bins;
    model.target = farm.normalized.measurand();
    model.hours_per_month = plan.hours_per_month;
    model.norm = farm.norm;

    if (log) {
        Provenance prov;
        prov.model_id = model.farm_id + "/meta";
        prov.farm_id = model.farm_id;
        prov.window = window_label(Window::DS6);
        push_event(log, "meta_train", model.farm_id, prov.window, prov, stats, started);
    }
    return model;
}

namespace {

ModelEvaluation evaluate_predictions(const std::string& model_id, std::span<const double> actual,
                                     std::span<const double> predicted, const NormParams& norm) {
    ModelEvaluation ev;
    ev.model_id = model_id;
    ev.normalized = compute_metrics(actual, predicted);
    std::vector<double> actual_d(actual.size()), predicted_d(predicted.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
        actual_d[i] = norm.from_unit(measurement_channel(), actual[i]);
        predicted_d[i] = norm.from_unit(measurement_channel(), predicted[i]);
    }
    ev.denormalized = compute_metrics(actual_d, predicted_d);
    return ev;
}

}  // namespace

EnsemblePredictions predict_ensemble(const EnsembleModel& model, const FarmData& farm) {
    const RowRange ds7_series = farm.split.range(Window::DS7, AccessPurpose::Evaluation);
    const RowRange ds7 = feature_rows_for(farm.features, ds7_series);
    const FeatureMatrix test = slice_features(farm.features, ds7);

    EnsemblePredictions out;
    out.hours.reserve(test.y.size());
    const std::int64_t base_hour =
        farm.normalized.start_hour() + static_cast<std::int64_t>(test.first_target_row);
    for (std::size_t i = 0; i < test.y.size(); ++i)
        out.hours.push_back(base_hour + static_cast<std::int64_t>(i));
    out.actual = test.y;
    for (const StackedSparseRegressor& learner : model.base_learners) {
        out.model_ids.push_back(learner.provenance.model_id);
        out.predictions.push_back(predict(learner, test.x));
    }
    const FeatureMatrix meta_inputs =
        build_meta_inputs(model.base_learners, test, model.meta_mode);
    out.model_ids.push_back(model.farm_id + "/meta");
    out.predictions.push_back(dbn_predict(model.meta, meta_inputs.x));
    return out;
}

MetricsReport evaluate_ensemble(const EnsembleModel& model, const FarmData& farm) {
    const EnsemblePredictions preds = predict_ensemble(model, farm);

    MetricsReport report;
    report.farm_id = farm.normalized.farm_id();
    for (std::size_t k = 0; k < preds.model_ids.size(); ++k)
        report.models.push_back(evaluate_predictions(preds.model_ids[k], preds.actual,
                                                     preds.predictions[k], model.norm));

    const RowRange ds7_series = farm.split.range(Window::DS7, AccessPurpose::Evaluation);
    const RowRange train_rows = farm.split.range(Window::DS5, AccessPurpose::Evaluation);
    const RowRange meta_rows = farm.split.range(Window::DS6, AccessPurpose::Evaluation);
    const auto measurement = farm.normalized.measurement();
    const std::vector<double> train_power(measurement.begin() + train_rows.begin,
                                          measurement.begin() + meta_rows.end);
    const std::vector<double> test_power(measurement.begin() + ds7_series.begin,
                                         measurement.begin() + ds7_series.end);
    report.histogram = power_histogram(train_power, test_power, 20);
    return report;
}

ScheduleResult run_adaptive_schedule(std::span<const WindFarmSeries> farms,
                                     const TransferPlan& plan, const PipelineConfig& cfg,
                                     std::uint64_t seed,
                                     std::shared_ptr<SplitAccessLog> access_log) {
    if (farms.empty()) throw EmptyInput("run_adaptive_schedule");
    std::size_t source_index = farms.size();
    for (std::size_t i = 0; i < farms.size(); ++i)
        if (farms[i].farm_id() == plan.source_farm) source_index = i;
    if (source_index == farms.size())
        throw DataError("run_adaptive_schedule: source farm '" + plan.source_farm +
                        "' not in the dataset");

    const RngStream root(seed);

    ScheduleResult result;
    std::vector<FarmData> data;
    data.reserve(farms.size());
    data.push_back(prepare_farm(farms[source_index], plan, access_log));
    const int source_lead = data.front().lead.lead_hours;
    for (std::size_t i = 0; i < farms.size(); ++i) {
        if (i == source_index) continue;
        data.push_back(prepare_farm(
            farms[i], plan, access_log,
            plan.freeze_lead_to_source ? std::optional<int>(source_lead) : std::nullopt));
    }
    // data[0] is the source farm, then the remaining farms in input order.
    std::vector<std::size_t> farm_of_data{source_index};
    for (std::size_t i = 0; i < farms.size(); ++i)
        if (i != source_index) farm_of_data.push_back(i);

    auto farm_stream = [&](std::size_t farm_index) { return root.derive(101 + farm_index); };

    const StackedSparseRegressor source_model =
        pretrain_source(data[0], plan, cfg, farm_stream(source_index), &result.log);

    result.ensembles.resize(farms.size());
    result.reports.resize(farms.size());
    for (std::size_t d = 0; d < data.size(); ++d) {
        const std::size_t farm_index = farm_of_data[d];
        const RngStream stream = farm_stream(farm_index);
        std::vector<StackedSparseRegressor> learners =
            d == 0 ? intra_transfer(source_model, data[d], plan, cfg, stream, &result.log)
                   : inter_transfer(source_model, data[d], plan, cfg, stream, &result.log);

        std::vector<StackedSparseRegressor> pool;
        for (auto& learner : learners)
            admit_learner(pool, std::move(learner), plan.max_base_learners);

        DbnTrainConfig dbn_cfg = cfg.dbn;
        if (dbn_cfg.layer_widths.empty())
            dbn_cfg.layer_widths = farm_index < 2 ? DbnTrainConfig::defaults_small().layer_widths
                                                  : DbnTrainConfig::defaults_large().layer_widths;

        EnsembleModel ensemble =
            train_ensemble(pool, data[d], plan, dbn_cfg, stream, &result.log);
        result.reports[farm_index] = evaluate_ensemble(ensemble, data[d]);
        result.ensembles[farm_index] = std::move(ensemble);
    }
    return result;
}

CrossTaskResult cross_task_transfer(const StackedSparseRegressor& source,
                                    const WindFarmSeries& speed_series,
                                    const TransferPlan& plan, const PipelineConfig& cfg,
                                    const RngStream& rng) {
    const std::size_t window = plan.cross_task_window_hours;
    if (window == 0) throw DataError("cross_task_transfer: window must be positive");
    const std::size_t tail = 4 * plan.hours_per_month;
    if (speed_series.size() <= tail + window)
        throw SeriesTooShort(tail + window + 1, speed_series.size());
    const std::size_t train_hours = speed_series.size() - tail;
    const std::size_t n_windows = train_hours / window;
    if (n_windows == 0) throw SeriesTooShort(window + tail, speed_series.size());

    auto [normalized, norm] = normalize(speed_series, train_hours);
    const MIScore lead = select_lead_time(normalized, plan.mi_bins);
    const FeatureMatrix features =
        build_lagged_features(normalized, lead.lead_hours, normalized.measurand());

    CrossTaskResult result;
    std::vector<StackedSparseRegressor> pool;
    const StackedSparseRegressor* parent = &source;
    for (std::size_t k = 1; k <= n_windows; ++k) {
        const RowRange series_rows{0, k * window};
        result.windows.push_back(series_rows);
        const RowRange rows = feature_rows_for(features, series_rows);
        TrainingSlice slice;
        slice.x = slice_rows(features.x, rows.begin, rows.end);
        slice.y.assign(features.y.begin() + static_cast<std::ptrdiff_t>(rows.begin),
                       features.y.begin() + static_cast<std::ptrdiff_t>(rows.end));
        const std::string label = hours_label(series_rows.end, plan.hours_per_month);
        StackedSparseRegressor learner =
            transfer_learner(*parent, slice, normalized.farm_id() + "/speed", label, plan, cfg,
                             rng.derive(kWindowSaltBase + k), &result.log);
        admit_learner(pool, std::move(learner), plan.max_base_learners);
        if (plan.chained_inter_tl) parent = &pool.back();
    }

    const RowRange tail_rows = feature_rows_for(features, {train_hours, speed_series.size()});
    const FeatureMatrix test = slice_features(features, tail_rows);
    const std::vector<double> pred = predict(pool.back(), test.x);

    result.report.farm_id = normalized.farm_id();
    result.report.models.push_back(
        evaluate_predictions(pool.back().provenance.model_id, test.y, pred, norm));

    result.predictions.actual = test.y;
    result.predictions.model_ids.push_back(pool.back().provenance.model_id);
    result.predictions.predictions.push_back(pred);
    const std::int64_t base_hour =
        normalized.start_hour() + static_cast<std::int64_t>(test.first_target_row);
    for (std::size_t i = 0; i < test.y.size(); ++i)
        result.predictions.hours.push_back(base_hour + static_cast<std::int64_t>(i));
    const auto measurement = normalized.measurement();
    const std::vector<double> train_power(measurement.begin(),
                                          measurement.begin() + train_hours);
    const std::vector<double> tail_power(measurement.begin() + train_hours, measurement.end());
    result.report.histogram = power_histogram(train_power, tail_power, 20);
    result.model = std::move(pool.back());
    return result;
}

}  // namespace atl
