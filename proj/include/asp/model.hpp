#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "asp/types.hpp"

namespace asp {

enum class ModelKind : std::uint8_t { Linear, MLP };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ModelSpec {
    ModelKind kind = ModelKind::Linear;
    std::size_t input_dim = 1;
    std::size_t num_classes = 2;
    std::size_t hidden_units = 16;  // MLP only

    bool operator==(const ModelSpec& other) const = default;
};

// Multinomial logistic regression or a one-hidden-layer ReLU MLP over a flat
// parameter vector (weights row-major, biases after each weight block).
class Model {
  public:
    Model(const ModelSpec& spec, std::uint64_t init_seed);

    const ModelSpec& spec() const { return spec_; }
    std::size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    // Class probabilities for one feature row.
    std::vector<double> predict(std::span<const double> features) const;

    // Forward pass plus analytic gradient of the mean label-smoothed
    // cross-entropy over a batch. `features` is batch x input_dim row-major;
    // `grad` (param_count, zero-initialized by the caller or not - it is
    // overwritten) receives the mean-loss gradient; `probabilities` is
    // resized to batch x num_classes. Returns the mean loss.
    double forward_backward(std::span<const double> features, std::span<const int> labels,
                            double label_smoothing, std::span<double> grad,
                            std::vector<double>& probabilities) const;

    // Versioned binary snapshot.
    void save(const std::filesystem::path& path) const;
    static Model load(const std::filesystem::path& path);

    bool operator==(const Model& other) const = default;

  private:
    ModelSpec spec_;
    std::vector<double> params_;
};

}  // namespace asp
