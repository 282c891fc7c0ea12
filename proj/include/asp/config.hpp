#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "asp/data.hpp"
#include "asp/model.hpp"
#include "asp/scheduler.hpp"
#include "asp/selector.hpp"
#include "asp/types.hpp"

namespace asp {

struct HyperParams {
    double learning_rate = 0.1;   // > 0
    double momentum = 0.9;        // [0, 1)
    double weight_decay = 0.0;    // >= 0
    double label_smoothing = 0.0; // [0, 1)
    double augment_prob = 0.0;    // [0, 1]; chance of additive feature noise per sample
    std::size_t batch_size = 32;  // >= 1
    int epochs = 10;              // >= 1

    bool operator==(const HyperParams& other) const = default;
};

enum class RunMode : std::uint8_t { Asp, FullData, CoreSet };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

// Mixture scheduler knobs; sigma <= 0 means "use the default N/8".
struct MixtureConfig {
    std::array<int, 3> order = {0, 1, 2};
    double sigma = 0.0;

    bool operator==(const MixtureConfig& other) const = default;
};

// Where the dataset comes from. `seed` pins the data-generation/split streams
// independently of the run seed (grids keep the data fixed while varying the
// training seed); unset means "use the run seed".
struct DataConfig {
    std::string source = "synthetic";  // synthetic | csv | idx
    std::optional<std::uint64_t> seed;
    SyntheticSpec synthetic;
    std::string csv_path;
    CsvSchema csv;
    std::string idx_images;
    std::string idx_labels;
    IdxOptions idx;

    bool operator==(const DataConfig& other) const = default;
};

struct RunConfig {
    std::uint64_t seed = 0;
    RunMode mode = RunMode::Asp;
    SelectionStrategy strategy = SelectionStrategy::Probabilistic;
    std::optional<MetricKind> fixed_metric;  // nullopt = mixture scheduling
    MixtureConfig mixture;
    RatioMode schedule_mode = RatioMode::Dynamic;
    double ratio = 0.5;  // (0, 1]
    ModelKind model_kind = ModelKind::Linear;
    std::size_t hidden_units = 16;
    HyperParams hyperparams;
    DataConfig data;

    std::uint64_t data_seed() const { return data.seed.value_or(seed); }

    bool operator==(const RunConfig& other) const = default;
};

// JSON round trip. Parsing rejects unknown keys and validates every range,
// throwing ErrorCode::Config with the offending field path.
RunConfig run_config_from_json_text(const std::string& text);
std::string run_config_to_json_text(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

void validate_run_config(const RunConfig& config);

// The dataset named by the config, fully built (generated or loaded).
Dataset build_dataset(const RunConfig& config);

}  // namespace asp
