#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asp/config.hpp"
#include "asp/data.hpp"
#include "asp/model.hpp"
#include "asp/proxy_memory.hpp"
#include "asp/selector.hpp"
#include "asp/types.hpp"

namespace asp {

// Additive feature-noise augmentation, applied per sample with probability
// hyperparams.augment_prob on standardized features.
inline constexpr double kAugmentNoiseStd = 0.1;

// A mean batch loss above this (or a non-finite one) aborts the run.
inline constexpr double kDivergenceThreshold = 1e4;

struct EpochRecord {
    int epoch = 0;
    std::string metric;  // metric that picked this epoch's subset; "full" = whole train split
    std::size_t m = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double wall_seconds = 0.0;  // volatile; stripped before artifact comparison
};

struct RunLog {
    RunConfig config;  // echo of what actually ran
    std::vector<EpochRecord> epochs;
    double final_val_accuracy = 0.0;
    double final_test_accuracy = 0.0;
    double total_wall_seconds = 0.0;  // volatile
    std::optional<int> diverged_at_epoch;
    // Per-epoch active sets as global sample ids; filled on request.
    std::vector<std::vector<SampleId>> active_sets;
};

struct EpochOutcome {
    EpochObservations observations;  // ids are train-split-local, one per active sample
    double mean_loss = 0.0;
};

// One pass over `active_local` (indices into dataset.train_ids) in seeded
// shuffled mini-batches: SGD with momentum and weight decay, per-sample
// signals taken from each sample's training-time forward pass.
EpochOutcome train_epoch(Model& model, std::vector<double>& momentum, const Dataset& dataset,
                         std::span<const SampleId> active_local, const HyperParams& hp,
                         Rng& shuffle_rng, Rng& augment_rng, int epoch);

// (argmax accuracy, mean unsmoothed cross-entropy) over global sample ids.
std::pair<double, double> evaluate(const Model& model, const Dataset& dataset,
                                   std::span<const SampleId> ids);

struct RunOptions {
    bool log_active_sets = false;
    // Record this metric's importance vector after every epoch (the hardness
    // trace); ids are train-split-local.
    std::optional<MetricKind> trace_metric;
};

struct HardnessTrace {
    std::vector<std::vector<double>> per_epoch;
};

struct RunOutput {
    RunLog log;
    Model model;
    ProxyMemory memory;
    HardnessTrace trace;
};

// The full alternating loop: epoch 0 trains on the whole train split, then
// each epoch's observations feed the proxy memory, the ratio scheduler sizes
// the next subset, a metric is fixed or drawn from the mixture, and the
// selector activates the next epoch's samples. FullData ignores selection;
// CoreSet pretrains on the full split, ranks once by the fixed metric, and
// keeps that top-m subset for a fresh training run (which is what the log
// covers). Divergence ends the run early with a partial log.
RunOutput run_asp(const RunConfig& config, const Dataset& dataset, const RunOptions& options = {});
RunOutput run_asp(const RunConfig& config, const RunOptions& options = {});

}  // namespace asp
