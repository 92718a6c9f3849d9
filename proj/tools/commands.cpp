#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>

#include "atl/error.hpp"
#include "atl/model_io.hpp"
#include "atl/verify.hpp"

namespace atl::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_overwrite(const fs::path& path, bool force) {
    if (!force && fs::exists(path))
        throw DataError("'" + path.string() + "' already exists; pass --force to overwrite");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string sanitize(std::string id) {
    std::replace(id.begin(), id.end(), '/', '_');
    return id;
}

std::string stamp_line(const RunConfig& cfg) {
    return "# config_hash=" + cfg.config_hash() + " seed=" + std::to_string(cfg.seed) + "\n";
}

std::vector<WindFarmSeries> load_farms(const RunConfig& cfg) {
    std::vector<fs::path> files;
    const fs::path manifest_path = cfg.data_dir / "manifest.json";
    Measurand measurand = cfg.plan.target_channel;
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json manifest;
        try {
            in >> manifest;
        } catch (const json::exception& e) {
            throw DataError("malformed manifest '" + manifest_path.string() + "': " + e.what());
        }
        for (const json& f : manifest.at("farms"))
            files.push_back(cfg.data_dir / f.get<std::string>());
        if (manifest.contains("measurand"))
            measurand = measurand_from_string(manifest.at("measurand").get<std::string>());
    } else {
        if (!fs::is_directory(cfg.data_dir))
            throw DataError("data directory '" + cfg.data_dir.string() + "' does not exist");
        for (const auto& entry : fs::directory_iterator(cfg.data_dir))
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw DataError("no .csv datasets found in '" + cfg.data_dir.string() + "'");
    }
    std::vector<WindFarmSeries> farms;
    farms.reserve(files.size());
    for (const fs::path& f : files) {
        WindFarmSeries s = load_series(f);
        s.set_measurand(measurand);
        farms.push_back(std::move(s));
    }
    return farms;
}

std::string predictions_csv(const RunConfig& cfg, const EnsemblePredictions& preds,
                            const NormParams& norm) {
    std::string out = stamp_line(cfg);
    out += "hour,actual,actual_denorm";
    for (const std::string& id : preds.model_ids)
        out += "," + sanitize(id) + "_pred," + sanitize(id) + "_pred_denorm";
    out += "\n";
    for (std::size_t i = 0; i < preds.hours.size(); ++i) {
        out += std::to_string(preds.hours[i]);
        out += ',' + format_double(preds.actual[i]);
        out += ',' + format_double(norm.from_unit(measurement_channel(), preds.actual[i]));
        for (const auto& p : preds.predictions) {
            out += ',' + format_double(p[i]);
            out += ',' + format_double(norm.from_unit(measurement_channel(), p[i]));
        }
        out += '\n';
    }
    return out;
}

std::string histogram_csv(const RunConfig& cfg, const PowerHistogram& h) {
    std::string out = stamp_line(cfg);
    out += "bin_left,bin_right,train_density,test_density\n";
    for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b) {
        out += format_double(h.bin_edges[b]) + ',' + format_double(h.bin_edges[b + 1]) + ',' +
               format_double(h.train_density[b]) + ',' + format_double(h.test_density[b]) + '\n';
    }
    return out;
}

json report_json(const MetricsReport& report) { return json::parse(to_json_string(report)); }

void write_run_log(const fs::path& path, const std::vector<std::pair<std::uint64_t, RunLog>>& logs,
                   const RunConfig& cfg, bool force) {
    check_overwrite(path, force);
    std::string text;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        text += json{{"run", i},
                     {"seed", logs[i].first},
                     {"config_hash", cfg.config_hash()}}
                    .dump() +
                "\n";
        text += run_log_to_jsonl(logs[i].second);
    }
    write_text(path, text);
}

}  // namespace

int cmd_synth(const RunConfig& cfg, bool force) {
    cfg.synth.validate();
    fs::create_directories(cfg.data_dir);

    const std::vector<WindFarmSeries> farms = synth_generate(cfg.synth);
    json files = json::array();
    for (const WindFarmSeries& farm : farms) {
        const fs::path path = cfg.data_dir / (farm.farm_id() + ".csv");
        check_overwrite(path, force);
        save_series_csv(farm, path);
        files.push_back(path.filename().string());
    }
    const fs::path manifest_path = cfg.data_dir / "manifest.json";
    check_overwrite(manifest_path, force);
    const json manifest{
        {"config_hash", cfg.config_hash()},
        {"seed", cfg.seed},
        {"farms", files},
        {"measurand", to_string(cfg.synth.measurand)},
        {"months", cfg.synth.months},
        {"hours_per_month", cfg.synth.hours_per_month},
    };
    write_text(manifest_path, manifest.dump(2) + "\n");
    std::cout << "wrote " << farms.size() << " farm datasets to " << cfg.data_dir << "\n";
    return 0;
}

namespace {

int run_standard(const RunConfig& cfg, const std::vector<WindFarmSeries>& farms, bool force) {
    const fs::path metrics_path = cfg.out_dir / "metrics.json";
    check_overwrite(metrics_path, force);

    std::vector<ScheduleResult> results;
    std::vector<std::pair<std::uint64_t, RunLog>> logs;
    for (std::size_t i = 0; i < cfg.runs; ++i) {
        const std::uint64_t run_seed = cfg.seed + i;
        results.push_back(run_adaptive_schedule(farms, cfg.plan, cfg.pipeline, run_seed));
        logs.emplace_back(run_seed, results.back().log);
    }

    json farms_json = json::array();
    for (std::size_t f = 0; f < farms.size(); ++f) {
        std::vector<MetricsReport> reports;
        for (const ScheduleResult& r : results) reports.push_back(r.reports[f]);
        const auto aggregated = aggregate_runs(reports);

        json per_run = json::array();
        for (const MetricsReport& r : reports) per_run.push_back(report_json(r));
        farms_json.push_back(json{{"farm_id", farms[f].farm_id()},
                                  {"aggregated", json::parse(to_json_string(aggregated))},
                                  {"per_run", std::move(per_run)}});
    }
    const json metrics{{"config_hash", cfg.config_hash()},
                       {"seed", cfg.seed},
                       {"runs", cfg.runs},
                       {"farms", std::move(farms_json)}};

    const fs::path models_dir = cfg.out_dir / "models";
    const fs::path normalized_dir = cfg.out_dir / "normalized";
    fs::create_directories(models_dir);
    fs::create_directories(normalized_dir);

    const ScheduleResult& first = results.front();
    for (std::size_t f = 0; f < farms.size(); ++f) {
        const EnsembleModel& ensemble = first.ensembles[f];
        const std::string farm_id = farms[f].farm_id();

        const fs::path bundle_path = models_dir / (farm_id + "_ensemble.json");
        check_overwrite(bundle_path, force);
        save_ensemble(ensemble, bundle_path);

        const fs::path farm_metrics = cfg.out_dir / ("metrics_" + farm_id + ".json");
        check_overwrite(farm_metrics, force);
        write_text(farm_metrics, to_json_string(first.reports[f]));

        const FarmData data = prepare_farm_with(farms[f], ensemble);
        const EnsemblePredictions preds = predict_ensemble(ensemble, data);
        const fs::path pred_path = cfg.out_dir / ("predictions_" + farm_id + ".csv");
        check_overwrite(pred_path, force);
        write_text(pred_path, predictions_csv(cfg, preds, ensemble.norm));

        const fs::path hist_path = cfg.out_dir / ("histogram_" + farm_id + ".csv");
        check_overwrite(hist_path, force);
        write_text(hist_path, histogram_csv(cfg, first.reports[f].histogram));

        const fs::path norm_csv = normalized_dir / (farm_id + ".csv");
        check_overwrite(norm_csv, force);
        save_series_csv(data.normalized, norm_csv);
        const fs::path sidecar_path = normalized_dir / (farm_id + "_norm.json");
        check_overwrite(sidecar_path, force);
        write_text(sidecar_path,
                   sidecar_json(ensemble.norm, cfg.plan.hours_per_month, farms[f].size()));
    }

    write_run_log(cfg.out_dir / "run_log.jsonl", logs, cfg, force);
    write_text(metrics_path, metrics.dump(2) + "\n");
    std::cout << "run complete: " << farms.size() << " farms x " << cfg.runs
              << " runs; artifacts in " << cfg.out_dir << "\n";
    return 0;
}

int run_cross_task(const RunConfig& cfg, const std::vector<WindFarmSeries>& farms, bool force) {
    if (cfg.speed_data.empty())
        throw DataError("cross-task runs need a speed dataset (config key \"speed_data\")");
    const fs::path metrics_path = cfg.out_dir / "metrics.json";
    check_overwrite(metrics_path, force);

    WindFarmSeries speed_series = load_series(cfg.speed_data);
    speed_series.set_measurand(Measurand::Speed);

    std::size_t source_index = farms.size();
    for (std::size_t i = 0; i < farms.size(); ++i)
        if (farms[i].farm_id() == cfg.plan.source_farm) source_index = i;
    if (source_index == farms.size())
        throw DataError("source farm '" + cfg.plan.source_farm + "' not in the dataset");

    TransferPlan source_plan = cfg.plan;
    source_plan.target_channel = Measurand::Power;

    std::vector<MetricsReport> reports;
    std::vector<std::pair<std::uint64_t, RunLog>> logs;
    std::optional<CrossTaskResult> first;
    for (std::size_t i = 0; i < cfg.runs; ++i) {
        const std::uint64_t run_seed = cfg.seed + i;
        const RngStream root(run_seed);
        RngStream source_rng = root.derive(101 + source_index);
        RunLog log;
        const FarmData source_data = prepare_farm(farms[source_index], source_plan);
        const StackedSparseRegressor source_model =
            pretrain_source(source_data, source_plan, cfg.pipeline, source_rng, &log);

        RngStream task_rng = root.derive(7001);
        CrossTaskResult result =
            cross_task_transfer(source_model, speed_series, cfg.plan, cfg.pipeline, task_rng);
        log.insert(log.end(), result.log.begin(), result.log.end());
        reports.push_back(result.report);
        logs.emplace_back(run_seed, std::move(log));
        if (i == 0) first = std::move(result);
    }

    const auto aggregated = aggregate_runs(reports);
    json per_run = json::array();
    for (const MetricsReport& r : reports) per_run.push_back(report_json(r));
    const json metrics{{"config_hash", cfg.config_hash()},
                       {"seed", cfg.seed},
                       {"runs", cfg.runs},
                       {"cross_task", true},
                       {"speed_data", cfg.speed_data.string()},
                       {"aggregated", json::parse(to_json_string(aggregated))},
                       {"per_run", std::move(per_run)}};

    const fs::path models_dir = cfg.out_dir / "models";
    fs::create_directories(models_dir);
    const fs::path model_path = models_dir / "cross_task_model.json";
    check_overwrite(model_path, force);
    save_regressor(first->model, model_path);

    auto [normalized, norm] = normalize(speed_series, 0);
    const fs::path pred_path = cfg.out_dir / "predictions_speed.csv";
    check_overwrite(pred_path, force);
    write_text(pred_path, predictions_csv(cfg, first->predictions, norm));

    write_run_log(cfg.out_dir / "run_log.jsonl", logs, cfg, force);
    write_text(metrics_path, metrics.dump(2) + "\n");
    std::cout << "cross-task run complete; artifacts in " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

int cmd_run(const RunConfig& cfg, bool force) {
    if (cfg.runs == 0) throw DataError("runs must be >= 1");
    const std::vector<WindFarmSeries> farms = load_farms(cfg);
    fs::create_directories(cfg.out_dir);
    if (cfg.cross_task) return run_cross_task(cfg, farms, force);
    return run_standard(cfg, farms, force);
}

int cmd_evaluate(const fs::path& model_path, const fs::path& data_path, const fs::path& out_dir,
                 bool force) {
    const EnsembleModel model = load_ensemble(model_path);
    WindFarmSeries series = load_series(data_path);
    series.set_measurand(model.target);

    const FarmData data = prepare_farm_with(series, model);
    const MetricsReport report = evaluate_ensemble(model, data);
    const EnsemblePredictions preds = predict_ensemble(model, data);

    fs::create_directories(out_dir);
    const fs::path metrics_path = out_dir / ("metrics_" + series.farm_id() + ".json");
    check_overwrite(metrics_path, force);
    write_text(metrics_path, to_json_string(report));

    const fs::path pred_path = out_dir / ("predictions_" + series.farm_id() + ".csv");
    check_overwrite(pred_path, force);
    std::string csv = "hour,actual,actual_denorm";
    for (const std::string& id : preds.model_ids)
        csv += "," + sanitize(id) + "_pred," + sanitize(id) + "_pred_denorm";
    csv += "\n";
    for (std::size_t i = 0; i < preds.hours.size(); ++i) {
        csv += std::to_string(preds.hours[i]);
        csv += ',' + format_double(preds.actual[i]);
        csv += ',' + format_double(model.norm.from_unit(measurement_channel(), preds.actual[i]));
        for (const auto& p : preds.predictions) {
            csv += ',' + format_double(p[i]);
            csv += ',' + format_double(model.norm.from_unit(measurement_channel(), p[i]));
        }
        csv += '\n';
    }
    write_text(pred_path, csv);
    std::cout << "evaluation written to " << out_dir << "\n";
    return 0;
}

int cmd_report_verify(std::uint64_t seed, const std::optional<fs::path>& out, bool force) {
    const std::vector<CriterionResult> results = run_fast_verification(seed);
    const std::string text = verification_to_json(results);
    std::cout << text;
    if (out) {
        check_overwrite(*out, force);
        write_text(*out, text);
    }
    for (const CriterionResult& r : results)
        if (!r.passed) return 2;
    return 0;
}

int cmd_report_run_dir(const fs::path& run_dir) {
    const fs::path metrics_path = run_dir / "metrics.json";
    std::ifstream in(metrics_path);
    if (!in) throw DataError("cannot open '" + metrics_path.string() + "'");
    json metrics;
    try {
        in >> metrics;
    } catch (const json::exception& e) {
        throw DataError("malformed metrics file: " + std::string(e.what()));
    }
    std::cout << "run " << metrics.value("config_hash", std::string("?")) << " seed "
              << metrics.value("seed", 0ULL) << " (" << metrics.value("runs", 0ULL)
              << " independent runs)\n";
    auto print_aggregated = [](const json& aggregated, const std::string& label) {
        std::cout << label << "\n";
        for (const json& m : aggregated) {
            const auto stat = [&](const char* k) {
                return m.at(k).at("mean").get<double>();
            };
            const auto dev = [&](const char* k) {
                return m.at(k).at("std").get<double>();
            };
            std::printf("  %-24s rmse %.4f+-%.4f  mae %.4f+-%.4f  sde %.4f+-%.4f  r %.4f\n",
                        m.at("model_id").get<std::string>().c_str(), stat("rmse"), dev("rmse"),
                        stat("mae"), dev("mae"), stat("sde"), dev("sde"), stat("pearson"));
        }
    };
    if (metrics.contains("farms")) {
        for (const json& farm : metrics.at("farms"))
            print_aggregated(farm.at("aggregated"),
                             farm.at("farm_id").get<std::string>());
    } else if (metrics.contains("aggregated")) {
        print_aggregated(metrics.at("aggregated"), "cross-task");
    }
    return 0;
}

}  // namespace atl::cli
