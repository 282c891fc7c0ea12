#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "asp/config.hpp"

namespace asp {

// Rank correlations. All three error on length mismatch, length < 2, or an
// all-constant input (DegenerateInput).
double kendall_tau(std::span<const double> a, std::span<const double> b);  // tau-b, tie-corrected
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);  // pearson over mid-ranks

// 1-based mid-ranks (ties share the average of their rank block).
std::vector<double> midranks(std::span<const double> values);

// One point of the hyper-parameter lattice, applied on top of a base setting.
struct GridCell {
    std::string id;
    HyperParams hyperparams;
};

// The 2x3x3x2 = 36 lattice: label_smoothing {0, 0.1} x learning_rate
// {0.05, 0.1, 0.2} x augment_prob {0.25, 0.5, 0.75} x momentum {0.8, 0.9}.
// Epochs, batch size and weight decay come from `base`.
std::vector<GridCell> correlation_grid_cells(const HyperParams& base);

struct GridSpec {
    std::vector<double> ratios = {0.1, 0.5};  // 1.0 is always added
    int seeds_per_cell = 3;
    std::size_t workers = 1;                  // > 1 fans cells out across threads
    std::filesystem::path cache_dir;          // empty disables the resume cache
};

struct GridFailure {
    std::string config_id;
    double ratio = 0.0;
    int seed_index = 0;
    std::string message;
};

struct GridResult {
    std::vector<double> ratios;                 // ascending, includes 1.0
    std::vector<std::string> config_ids;        // lattice order, identical across ratios
    std::vector<std::vector<double>> accuracy;  // [ratio][config] mean final test accuracy
                                                // over surviving seeds; NaN if none survived
    std::vector<GridFailure> failures;
};

// One run per (ratio, config, seed). The training seed is derived per
// (config, seed index) so a cell sees identical streams at every ratio, and
// the dataset seed is derived per seed index alone so all configs rank on the
// same data. Completed runs are resumed from cache_dir (one JSON file per
// resolved-config hash, written atomically); failed runs are recorded and the
// grid keeps going.
GridResult run_grid(const RunConfig& base, const GridSpec& spec);

struct CorrelationRow {
    double ratio = 0.0;
    double tau = 0.0;
    double rho = 0.0;
    double spearman = 0.0;
    std::size_t configs_used = 0;
    std::string note;  // empty = ok; otherwise why the row is NaN
};

struct CorrelationTable {
    std::vector<CorrelationRow> rows;  // one per ratio, ascending
};

// Correlates each ratio's config-accuracy vector against the r = 1.0 vector,
// pairing only configs valid at both ratios. The r = 1.0 row is the
// self-comparison and is 1 by definition. Degenerate vectors make a NaN row
// with a note rather than an error.
CorrelationTable correlate(const GridResult& result);

}  // namespace asp
