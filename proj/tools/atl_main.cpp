#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "atl/error.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

using atl::cli::FlagOverrides;
using atl::cli::RunConfig;

RunConfig resolve_config(const std::string& config_path, const FlagOverrides& flags) {
    if (!config_path.empty()) return atl::cli::load_run_config(config_path, flags);
    return atl::cli::default_run_config(flags);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive transfer-learning pipeline for short-term wind forecasting"};
    app.require_subcommand(1);

    std::string config_path;
    FlagOverrides flags;
    bool force = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { flags.seed = v; }, "master seed (required)");
        cmd->add_flag("--force", force, "overwrite existing outputs");
        cmd->add_option_function<std::string>(
            "--data", [&](const std::string& v) { flags.data_dir = v; }, "dataset directory");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { flags.out_dir = v; }, "output directory");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic multi-farm dataset");
    add_common(synth);

    CLI::App* run = app.add_subcommand("run", "train and evaluate the full adaptive schedule");
    add_common(run);
    run->add_option_function<std::size_t>(
        "--runs", [&](std::size_t v) { flags.runs = v; }, "independent runs (seed+0..seed+n-1)");
    run->add_option_function<std::string>(
           "--meta-inputs", [&](const std::string& v) { flags.meta_inputs = v; },
           "meta-learner inputs: all | last")
        ->check(CLI::IsMember({"all", "last", "all_three", "last_only"}));
    run->add_option_function<std::string>(
           "--target", [&](const std::string& v) { flags.target = v; },
           "prediction target: power | speed")
        ->check(CLI::IsMember({"power", "speed"}));
    run->add_flag_callback("--cross-task", [&] { flags.cross_task = true; },
                           "transfer the source model onto a wind-speed dataset");
    run->add_option_function<std::string>(
        "--source-farm", [&](const std::string& v) { flags.source_farm = v; },
        "farm id providing the pretrained model");

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a saved ensemble on a dataset");
    std::string model_path, eval_data, eval_out = "eval";
    evaluate->add_option("--model", model_path, "ensemble bundle JSON")->required();
    evaluate->add_option("--data", eval_data, "farm CSV to evaluate on")->required();
    evaluate->add_option("--out", eval_out, "output directory");
    evaluate->add_flag("--force", force, "overwrite existing outputs");

    CLI::App* report = app.add_subcommand("report", "verification and run summaries");
    bool verify = false;
    std::uint64_t verify_seed = 1;
    std::string report_out, report_run_dir;
    report->add_flag("--verify", verify, "run the oracle-backed checks, emit pass/fail JSON");
    report->add_option("--seed", verify_seed, "seed for the verification sweeps");
    report->add_option("--out", report_out, "also write the verification JSON here");
    report->add_option("--run-dir", report_run_dir, "summarize a finished run directory");
    report->add_flag("--force", force, "overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return atl::cli::cmd_synth(resolve_config(config_path, flags), force);
        if (run->parsed()) return atl::cli::cmd_run(resolve_config(config_path, flags), force);
        if (evaluate->parsed()) return atl::cli::cmd_evaluate(model_path, eval_data, eval_out, force);
        if (report->parsed()) {
            if (verify) {
                std::optional<std::filesystem::path> out;
                if (!report_out.empty()) out = report_out;
                return atl::cli::cmd_report_verify(verify_seed, out, force);
            }
            if (!report_run_dir.empty()) return atl::cli::cmd_report_run_dir(report_run_dir);
            std::cerr << "report: pass --verify or --run-dir\n";
            return 1;
        }
    } catch (const atl::TrainError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 3;
    } catch (const atl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
