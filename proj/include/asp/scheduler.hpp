#pragma once

#include <array>
#include <cstddef>

#include "asp/rng.hpp"
#include "asp/types.hpp"

namespace asp {

enum class RatioMode : std::uint8_t { Static, Dynamic };

std::string_view to_string(RatioMode mode);
RatioMode ratio_mode_from_string(std::string_view name);

// Epoch -> proxy-set-size schedule. Static keeps the fraction r; Dynamic
// starts from the full set and shrinks linearly so that the mean fraction
// over all epochs stays at the requested budget (1.01*r for r <= 0.5, exactly
// r above).
struct RatioSchedule {
    RatioMode mode = RatioMode::Dynamic;
    double r = 0.5;          // target budget, in (0, 1]
    int total_epochs = 1;    // N >= 1
};

// Inclusive-endpoint linspace: count points from start to stop; count == 1
// yields start.
double linspace_value(double start, double stop, int count, int index);

// The pre-rounding fraction r' for one epoch (0-based, < total_epochs).
double scheduled_ratio(const RatioSchedule& schedule, int epoch);

// m = clamp(round(r' * n), 1, n).
std::size_t proxy_size(const RatioSchedule& schedule, int epoch, std::size_t n);

// Epoch -> distribution over the five metrics. Metrics are grouped coarse to
// fine (group 0 {Random}, group 1 {Prediction, Gradient}, group 2 {Loss,
// Entropy}); each group's weight follows a Gaussian bump over the epoch axis
// with means at N/4, N/2, 3N/4, handed out to the groups in `order`. Weight
// splits equally inside a group and the result is normalized.
struct MetricMixture {
    std::array<int, 3> order = {0, 1, 2};  // order[k] = group peaking at mean (k+1)*N/4
    double sigma = 0.0;                    // Gaussian std in epochs, > 0
    int total_epochs = 1;

    // Default shape: sigma = N/8 gives three visibly distinct regimes.
    static MetricMixture with_defaults(int total_epochs, std::array<int, 3> order = {0, 1, 2});
};

int metric_group(MetricKind kind);
int metric_group_size(int group);

// The epoch at which `group`'s Gaussian peaks under this mixture.
double group_mean(const MetricMixture& mixture, int group);

// Probability of each metric at `epoch`, indexed by MetricKind's value.
std::array<double, kMetricKindCount> metric_probabilities(const MetricMixture& mixture, int epoch);

// Categorical draw from metric_probabilities.
MetricKind draw_metric(const MetricMixture& mixture, int epoch, Rng& rng);

}  // namespace asp
