#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "atl/dataio.hpp"
#include "atl/transfer.hpp"

namespace atl::cli {

/// Everything a run needs, merged from the config file and flag overrides
/// (flags win). The seed is mandatory: there is no wall-clock fallback.
struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t runs = 10;
    bool cross_task = false;
    std::filesystem::path speed_data;  // cross-task dataset, when used

    TransferPlan plan;
    PipelineConfig pipeline;
    SynthConfig synth;

    /// Canonical JSON of the merged configuration; hashing it stamps every
    /// artifact of the run.
    nlohmann::json canonical() const;
    std::string config_hash() const;
};

struct FlagOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::string> meta_inputs;
    std::optional<std::string> target;
    std::optional<bool> cross_task;
    std::optional<std::string> source_farm;
    std::optional<std::string> data_dir;
    std::optional<std::string> out_dir;
};

RunConfig load_run_config(const std::filesystem::path& config_path, const FlagOverrides& flags);

/// Defaults only (no config file), still honoring flag overrides.
RunConfig default_run_config(const FlagOverrides& flags);

}  // namespace atl::cli
