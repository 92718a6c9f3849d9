#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "run_config.hpp"

namespace atl::cli {

int cmd_synth(const RunConfig& cfg, bool force);
int cmd_run(const RunConfig& cfg, bool force);
int cmd_evaluate(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                 const std::filesystem::path& out_dir, bool force);
int cmd_report_verify(std::uint64_t seed, const std::optional<std::filesystem::path>& out,
                      bool force);
int cmd_report_run_dir(const std::filesystem::path& run_dir);

}  // namespace atl::cli
