#include "run_config.hpp"

#include <fstream>

#include "atl/error.hpp"

namespace atl::cli {

namespace {

using nlohmann::json;

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_ae(const json& j, AeTrainConfig& ae) {
    if (j.contains("layers")) {
        ae.layers.clear();
        for (const json& layer : j.at("layers")) {
            AeLayerConfig lc;
            lc.width = layer.at("width").get<std::size_t>();
            lc.epochs = layer.at("epochs").get<std::size_t>();
            lc.l2_coeff = layer.value("lambda", 1e-5);
            lc.sparsity_coeff = layer.value("beta", 4.0);
            lc.sparsity_target = layer.value("sparsity", 0.1);
            ae.layers.push_back(lc);
        }
    }
    read_into(j, "batch", ae.batch_size);
    read_into(j, "learning_rate", ae.learning_rate);
    read_into(j, "finetune_epochs", ae.finetune_epochs);
    read_into(j, "finetune_learning_rate", ae.finetune_learning_rate);
}

void parse_dbn(const json& j, DbnTrainConfig& dbn) {
    read_into(j, "widths", dbn.layer_widths);
    read_into(j, "epochs", dbn.epochs);
    read_into(j, "batch", dbn.batch_size);
    read_into(j, "momentum", dbn.momentum);
    read_into(j, "learning_rate", dbn.learning_rate);
    read_into(j, "cd_k", dbn.cd_k);
    read_into(j, "finetune_epochs", dbn.finetune_epochs);
    read_into(j, "finetune_learning_rate", dbn.finetune_learning_rate);
}

void parse_synth(const json& j, SynthConfig& synth) {
    read_into(j, "n_farms", synth.n_farms);
    read_into(j, "months", synth.months);
    read_into(j, "hours_per_month", synth.hours_per_month);
    read_into(j, "rho", synth.air_density);
    read_into(j, "rotor_area", synth.rotor_area);
    read_into(j, "cp", synth.power_coefficient);
    read_into(j, "correlation", synth.correlation);
    read_into(j, "noise", synth.noise);
    read_into(j, "mean_speed", synth.mean_speed);
    read_into(j, "diurnal_amplitude", synth.diurnal_amplitude);
    read_into(j, "speed_volatility", synth.speed_volatility);
    read_into(j, "ar_coefficient", synth.ar_coefficient);
}

RunConfig from_json(const json& j, const FlagOverrides& flags) {
    RunConfig cfg;
    cfg.pipeline.ae = AeTrainConfig::defaults();

    if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    bool have_seed = false;
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        have_seed = true;
    }
    read_into(j, "runs", cfg.runs);
    read_into(j, "cross_task", cfg.cross_task);
    if (j.contains("speed_data")) cfg.speed_data = j.at("speed_data").get<std::string>();

    if (j.contains("source_farm")) cfg.plan.source_farm = j.at("source_farm").get<std::string>();
    read_into(j, "hours_per_month", cfg.plan.hours_per_month);
    read_into(j, "mi_bins", cfg.plan.mi_bins);
    read_into(j, "cross_task_window_hours", cfg.plan.cross_task_window_hours);
    read_into(j, "freeze_lead_to_source", cfg.plan.freeze_lead_to_source);
    read_into(j, "chained_inter_tl", cfg.plan.chained_inter_tl);
    read_into(j, "allow_input_adapter", cfg.plan.allow_input_adapter);
    if (j.contains("meta_inputs"))
        cfg.plan.meta_input_mode =
            meta_input_mode_from_string(j.at("meta_inputs").get<std::string>());
    if (j.contains("target"))
        cfg.plan.target_channel = measurand_from_string(j.at("target").get<std::string>());

    if (j.contains("tl_epochs"))
        cfg.pipeline.tl_epochs = j.at("tl_epochs").get<std::size_t>();
    if (j.contains("ae")) parse_ae(j.at("ae"), cfg.pipeline.ae);
    if (j.contains("dbn")) parse_dbn(j.at("dbn"), cfg.pipeline.dbn);
    if (j.contains("synth")) parse_synth(j.at("synth"), cfg.synth);

    // Flags override the file.
    if (flags.seed) {
        cfg.seed = *flags.seed;
        have_seed = true;
    }
    if (flags.runs) cfg.runs = *flags.runs;
    if (flags.meta_inputs) cfg.plan.meta_input_mode = meta_input_mode_from_string(*flags.meta_inputs);
    if (flags.target) cfg.plan.target_channel = measurand_from_string(*flags.target);
    if (flags.cross_task) cfg.cross_task = *flags.cross_task;
    if (flags.source_farm) cfg.plan.source_farm = *flags.source_farm;
    if (flags.data_dir) cfg.data_dir = *flags.data_dir;
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;

    if (!have_seed)
        throw DataError("a seed is required (config key \"seed\" or --seed); runs never fall "
                        "back to the wall clock");

    cfg.synth.hours_per_month = cfg.plan.hours_per_month;
    cfg.synth.seed = cfg.seed;
    cfg.synth.measurand = cfg.plan.target_channel;
    return cfg;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& config_path, const FlagOverrides& flags) {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open config '" + config_path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed config '" + config_path.string() + "': " + e.what());
    }
    return from_json(j, flags);
}

RunConfig default_run_config(const FlagOverrides& flags) {
    return from_json(json::object(), flags);
}

nlohmann::json RunConfig::canonical() const {
    json ae_layers = json::array();
    for (const AeLayerConfig& lc : pipeline.ae.layers)
        ae_layers.push_back({{"width", lc.width},
                             {"epochs", lc.epochs},
                             {"lambda", lc.l2_coeff},
                             {"beta", lc.sparsity_coeff},
                             {"sparsity", lc.sparsity_target}});
    return json{
        {"seed", seed},
        {"runs", runs},
        {"cross_task", cross_task},
        {"speed_data", speed_data.string()},
        {"source_farm", plan.source_farm},
        {"hours_per_month", plan.hours_per_month},
        {"mi_bins", plan.mi_bins},
        {"meta_inputs", to_string(plan.meta_input_mode)},
        {"target", to_string(plan.target_channel)},
        {"cross_task_window_hours", plan.cross_task_window_hours},
        {"freeze_lead_to_source", plan.freeze_lead_to_source},
        {"chained_inter_tl", plan.chained_inter_tl},
        {"allow_input_adapter", plan.allow_input_adapter},
        {"tl_epochs", pipeline.effective_tl_epochs()},
        {"ae",
         {{"layers", ae_layers},
          {"batch", pipeline.ae.batch_size},
          {"learning_rate", pipeline.ae.learning_rate},
          {"finetune_epochs", pipeline.ae.finetune_epochs},
          {"finetune_learning_rate", pipeline.ae.finetune_learning_rate}}},
        {"dbn",
         {{"widths", pipeline.dbn.layer_widths},
          {"epochs", pipeline.dbn.epochs},
          {"batch", pipeline.dbn.batch_size},
          {"momentum", pipeline.dbn.momentum},
          {"learning_rate", pipeline.dbn.learning_rate},
          {"cd_k", pipeline.dbn.cd_k},
          {"finetune_epochs", pipeline.dbn.finetune_epochs},
          {"finetune_learning_rate", pipeline.dbn.finetune_learning_rate}}},
        {"synth",
         {{"n_farms", synth.n_farms},
          {"months", synth.months},
          {"hours_per_month", synth.hours_per_month},
          {"rho", synth.air_density},
          {"rotor_area", synth.rotor_area},
          {"cp", synth.power_coefficient},
          {"correlation", synth.correlation},
          {"noise", synth.noise},
          {"mean_speed", synth.mean_speed},
          {"diurnal_amplitude", synth.diurnal_amplitude},
          {"speed_volatility", synth.speed_volatility},
          {"ar_coefficient", synth.ar_coefficient},
          {"measurand", to_string(synth.measurand)}}},
    };
}

std::string RunConfig::config_hash() const {
    const std::string dump = canonical().dump();
    // FNV-1a, 64-bit
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace atl::cli
