#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "asp/types.hpp"

namespace asp {

// Immutable after construction. Features are row-major (size() x dims);
// split id vectors are sorted, mutually disjoint, and every class appears in
// the train split.
struct Dataset {
    std::size_t dims = 0;
    std::size_t num_classes = 0;
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<SampleId> train_ids;
    std::vector<SampleId> val_ids;
    std::vector<SampleId> test_ids;

    // Synthetic data: ids whose labels were deliberately flipped.
    std::vector<SampleId> flipped_ids;
    // CSV data: raw label value behind each dense class index (empty when the
    // file's labels were already 0..K-1).
    std::vector<long long> label_values;

    std::size_t size() const { return labels.size(); }
    std::span<const double> features_of(SampleId id) const {
        return {features.data() + static_cast<std::size_t>(id) * dims, dims};
    }
    int label_of(SampleId id) const { return labels[id]; }
};

// Gaussian class clusters around well-separated means. `overlap` pulls the
// means together (0 = essentially separable); `label_noise` flips the labels
// of exactly floor(label_noise * n) samples, recorded in flipped_ids.
struct SyntheticSpec {
    std::size_t classes = 2;
    std::size_t per_class = 100;
    std::size_t dims = 2;        // must be >= classes (means sit on the axes)
    double overlap = 0.0;        // >= 0
    double label_noise = 0.0;    // in [0, 0.5)
    double train_fraction = 0.8;
    double val_fraction = 0.1;   // test split takes the remainder
    bool standardize = true;     // per-dim zero mean / unit variance on train

    bool operator==(const SyntheticSpec& other) const = default;
};

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Header-row CSV: one label column, every other column a numeric feature
// (minus the optional split column holding train/val/test tags). Labels may
// be any integers; they are remapped to a dense 0..K-1 with the mapping
// recorded in label_values.
struct CsvSchema {
    std::string label_column = "label";
    std::string split_column;    // empty = seeded split by the fractions below
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    bool standardize = true;

    bool operator==(const CsvSchema& other) const = default;
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::uint64_t seed);

// IDX image/label file pair (the MNIST container format): big-endian headers,
// magics 0x00000803 / 0x00000801, pixel bytes scaled to [0,1] and flattened.
struct IdxOptions {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    bool standardize = true;

    bool operator==(const IdxOptions& other) const = default;
};

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 const IdxOptions& options, std::uint64_t seed);

}  // namespace asp
