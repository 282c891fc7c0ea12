#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace asp {

// Dense sample index, stable within a dataset: [0, n).
using SampleId = std::uint32_t;

enum class MetricKind : std::uint8_t {
    Random = 0,
    Gradient = 1,
    Loss = 2,
    Entropy = 3,
    Prediction = 4,
};

inline constexpr std::size_t kMetricKindCount = 5;

inline constexpr std::array<MetricKind, kMetricKindCount> kAllMetricKinds = {
    MetricKind::Random,   MetricKind::Gradient,  MetricKind::Loss,
    MetricKind::Entropy,  MetricKind::Prediction,
};

std::string_view to_string(MetricKind kind);
MetricKind metric_kind_from_string(std::string_view name);

// One sample's signals from a single training epoch, observed on the forward
// pass. `correct` feeds the prediction-score accumulator.
struct SampleObservation {
    SampleId id = 0;
    double loss = 0.0;
    double entropy = 0.0;
    double gradient_norm = 0.0;
    bool correct = false;
};

// The signals emitted by one epoch over the active subset. Sample ids must be
// unique and cover exactly that subset.
struct EpochObservations {
    std::vector<SampleObservation> entries;
};

}  // namespace asp
