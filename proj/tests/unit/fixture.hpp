#pragma once

#include "atl/transfer.hpp"

namespace atl::testfix {

/// Desk-scale synthetic dataset: short months so 20 of them stay cheap.
inline SynthConfig tiny_synth(std::size_t n_farms = 3, std::uint64_t seed = 404) {
    SynthConfig cfg;
    cfg.n_farms = n_farms;
    cfg.months = 20;
    cfg.hours_per_month = 48;
    cfg.seed = seed;
    cfg.correlation = 0.8;
    cfg.noise = 0.05;
    return cfg;
}

inline TransferPlan tiny_plan() {
    TransferPlan plan;
    plan.source_farm = "farm2";
    plan.hours_per_month = 48;
    plan.mi_bins = 8;
    plan.cross_task_window_hours = 96;  // two tiny months
    return plan;
}

inline PipelineConfig tiny_pipeline() {
    PipelineConfig cfg;
    cfg.ae.layers = {{16, 4, 3e-5, 4.0, 0.15}, {8, 4, 1e-5, 4.0, 0.10}};
    cfg.ae.batch_size = 32;
    cfg.ae.learning_rate = 0.01;
    cfg.ae.finetune_epochs = 8;
    cfg.dbn.layer_widths = {16, 8};
    cfg.dbn.epochs = 3;
    cfg.dbn.batch_size = 10;
    cfg.dbn.finetune_epochs = 8;
    cfg.dbn.finetune_learning_rate = 0.05;
    cfg.tl_epochs = 3;
    return cfg;
}

}  // namespace atl::testfix
