#include "atl/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "atl/error.hpp"

namespace atl {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

Matrix matrix_from_json(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

json regressor_to_json(const StackedSparseRegressor& model) {
    json layers = json::array();
    for (const EncoderLayer& layer : model.layers)
        layers.push_back(json{{"w", matrix_to_json(layer.w)}, {"b", layer.b}});
    json j{
        {"kind", "sparse_ae_regressor"},
        {"version", kFormatVersion},
        {"layers", std::move(layers)},
        {"head", json{{"w", model.head.w}, {"bias", model.head.bias}}},
        {"provenance",
         json{{"model_id", model.provenance.model_id},
              {"farm_id", model.provenance.farm_id},
              {"window", model.provenance.window},
              {"parent_model_id", model.provenance.parent_model_id}}},
    };
    if (model.adapter)
        j["adapter"] = json{{"w", matrix_to_json(model.adapter->w)}, {"b", model.adapter->b}};
    return j;
}

StackedSparseRegressor regressor_from_json(const json& j) {
    if (j.at("kind").get<std::string>() != "sparse_ae_regressor")
        throw DataError("model document kind is not 'sparse_ae_regressor'");
    if (j.at("version").get<int>() != kFormatVersion)
        throw DataError("unsupported model document version");
    StackedSparseRegressor model;
    for (const json& layer : j.at("layers"))
        model.layers.push_back(
            {matrix_from_json(layer.at("w")), layer.at("b").get<std::vector<double>>()});
    model.head.w = j.at("head").at("w").get<std::vector<double>>();
    model.head.bias = j.at("head").at("bias").get<double>();
    const json& prov = j.at("provenance");
    model.provenance.model_id = prov.at("model_id").get<std::string>();
    model.provenance.farm_id = prov.at("farm_id").get<std::string>();
    model.provenance.window = prov.at("window").get<std::string>();
    model.provenance.parent_model_id = prov.at("parent_model_id").get<std::string>();
    if (j.contains("adapter"))
        model.adapter = LinearAdapter{matrix_from_json(j.at("adapter").at("w")),
                                      j.at("adapter").at("b").get<std::vector<double>>()};
    return model;
}

json dbn_to_json(const Dbn& dbn) {
    json rbms = json::array();
    for (const Rbm& rbm : dbn.rbms)
        rbms.push_back(json{{"w", matrix_to_json(rbm.w)},
                            {"visible_bias", rbm.visible_bias},
                            {"hidden_bias", rbm.hidden_bias}});
    return json{{"kind", "dbn_meta_learner"},
                {"version", kFormatVersion},
                {"rbms", std::move(rbms)},
                {"head", json{{"w", dbn.head.w}, {"bias", dbn.head.bias}}}};
}

Dbn dbn_from_json(const json& j) {
    if (j.at("kind").get<std::string>() != "dbn_meta_learner")
        throw DataError("model document kind is not 'dbn_meta_learner'");
    Dbn dbn;
    for (const json& rbm : j.at("rbms"))
        dbn.rbms.push_back({matrix_from_json(rbm.at("w")),
                            rbm.at("visible_bias").get<std::vector<double>>(),
                            rbm.at("hidden_bias").get<std::vector<double>>()});
    dbn.head.w = j.at("head").at("w").get<std::vector<double>>();
    dbn.head.bias = j.at("head").at("bias").get<double>();
    return dbn;
}

json norm_to_json(const NormParams& params) {
    json channels = json::array();
    for (std::size_t c = 0; c < kNumChannels; ++c)
        channels.push_back(json{{"name", channel_names()[c]},
                                {"min", params.channels[c].min},
                                {"max", params.channels[c].max},
                                {"degenerate", params.channels[c].degenerate}});
    return json{{"channels", std::move(channels)}, {"fit_rows", params.fit_rows}};
}

NormParams norm_from_json(const json& j) {
    NormParams params;
    params.fit_rows = j.at("fit_rows").get<std::size_t>();
    const json& channels = j.at("channels");
    if (channels.size() != kNumChannels)
        throw DataError("norm_params lists " + std::to_string(channels.size()) +
                        " channels, expected " + std::to_string(kNumChannels));
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        params.channels[c].min = channels[c].at("min").get<double>();
        params.channels[c].max = channels[c].at("max").get<double>();
        params.channels[c].degenerate = channels[c].at("degenerate").get<bool>();
    }
    return params;
}

json metrics_to_json(const Metrics& m) {
    return json{{"rmse", m.rmse},
                {"mae", m.mae},
                {"sde", m.sde},
                {"pearson", m.pearson},
                {"n_points", m.n_points}};
}

json report_to_json(const MetricsReport& report) {
    json models = json::array();
    for (const ModelEvaluation& ev : report.models)
        models.push_back(json{{"model_id", ev.model_id},
                              {"normalized", metrics_to_json(ev.normalized)},
                              {"denormalized", metrics_to_json(ev.denormalized)}});
    json histogram{{"bin_edges", report.histogram.bin_edges},
                   {"train_density", report.histogram.train_density},
                   {"test_density", report.histogram.test_density},
                   {"total_variation", report.histogram.total_variation}};
    return json{{"farm_id", report.farm_id},
                {"models", std::move(models)},
                {"histogram", std::move(histogram)}};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed JSON document: ") + e.what());
    }
}

template <typename Fn>
auto wrap_field_errors(Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw DataError(std::string("bad model document: ") + e.what());
    }
}

}  // namespace

std::string to_json_string(const StackedSparseRegressor& model) {
    return regressor_to_json(model).dump(2) + "\n";
}

StackedSparseRegressor regressor_from_json_string(const std::string& text) {
    const json j = parse(text);
    return wrap_field_errors([&] { return regressor_from_json(j); });
}

std::string to_json_string(const Dbn& model) { return dbn_to_json(model).dump(2) + "\n"; }

Dbn dbn_from_json_string(const std::string& text) {
    const json j = parse(text);
    return wrap_field_errors([&] { return dbn_from_json(j); });
}

void save_regressor(const StackedSparseRegressor& model, const std::filesystem::path& path) {
    write_file(path, to_json_string(model));
}

StackedSparseRegressor load_regressor(const std::filesystem::path& path) {
    return regressor_from_json_string(read_file(path));
}

std::string to_json_string(const EnsembleModel& model) {
    json bases = json::array();
    for (const StackedSparseRegressor& learner : model.base_learners)
        bases.push_back(regressor_to_json(learner));
    const json j{
        {"kind", "atl_ensemble"},
        {"version", kFormatVersion},
        {"farm_id", model.farm_id},
        {"base_learners", std::move(bases)},
        {"meta", dbn_to_json(model.meta)},
        {"meta_mode", to_string(model.meta_mode)},
        {"lead_hours", model.lead_hours},
        {"mi_bins", model.mi_bins},
        {"target", to_string(model.target)},
        {"hours_per_month", model.hours_per_month},
        {"norm", norm_to_json(model.norm)},
    };
    return j.dump(2) + "\n";
}

EnsembleModel ensemble_from_json_string(const std::string& text) {
    const json j = parse(text);
    return wrap_field_errors([&] {
        if (j.at("kind").get<std::string>() != "atl_ensemble")
            throw DataError("model document kind is not 'atl_ensemble'");
        if (j.at("version").get<int>() != kFormatVersion)
            throw DataError("unsupported bundle version");
        EnsembleModel model;
        model.farm_id = j.at("farm_id").get<std::string>();
        for (const json& b : j.at("base_learners"))
            model.base_learners.push_back(regressor_from_json(b));
        model.meta = dbn_from_json(j.at("meta"));
        model.meta_mode = meta_input_mode_from_string(j.at("meta_mode").get<std::string>());
        model.lead_hours = j.at("lead_hours").get<int>();
        model.mi_bins = j.at("mi_bins").get<std::size_t>();
        model.target = measurand_from_string(j.at("target").get<std::string>());
        model.hours_per_month = j.at("hours_per_month").get<std::size_t>();
        model.norm = norm_from_json(j.at("norm"));
        return model;
    });
}

void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path) {
    write_file(path, to_json_string(model));
}

EnsembleModel load_ensemble(const std::filesystem::path& path) {
    return ensemble_from_json_string(read_file(path));
}

std::string to_json_string(const MetricsReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

std::string to_json_string(std::span<const AggregatedMetric> aggregated) {
    json arr = json::array();
    for (const AggregatedMetric& m : aggregated) {
        auto stat = [](const AggregateStat& s) {
            return json{{"mean", s.mean}, {"std", s.stddev}};
        };
        arr.push_back(json{{"model_id", m.model_id},
                           {"rmse", stat(m.rmse)},
                           {"mae", stat(m.mae)},
                           {"sde", stat(m.sde)},
                           {"pearson", stat(m.pearson)}});
    }
    return arr.dump(2) + "\n";
}

std::string run_log_to_jsonl(const RunLog& log) {
    std::string out;
    for (const TrainEvent& e : log) {
        const json j{
            {"kind", e.kind},
            {"farm", e.farm},
            {"window", e.window},
            {"model_id", e.model_id},
            {"parent_model_id", e.parent_model_id},
            {"epochs", e.epochs},
            {"final_loss", e.final_loss},
            {"wallclock_ms", e.wallclock_ms},  // only nondeterministic field
        };
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string sidecar_json(const NormParams& params, std::size_t hours_per_month,
                         std::size_t total_rows) {
    DatasetSplit split(hours_per_month, total_rows);
    json windows;
    for (Window w : {Window::DS3, Window::DS4, Window::DS5, Window::DS6, Window::DS7}) {
        const RowRange r = split.range(w, AccessPurpose::Evaluation);
        windows[window_name(w)] = json{{"begin", r.begin}, {"end", r.end}};
    }
    const json j{{"norm_params", norm_to_json(params)},
                 {"hours_per_month", hours_per_month},
                 {"splits", std::move(windows)}};
    return j.dump(2) + "\n";
}

}  // namespace atl
