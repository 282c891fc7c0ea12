#include "asp/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "asp/error.hpp"

namespace asp {

namespace {

void check_schedule(const RatioSchedule& schedule, int epoch) {
    if (!(schedule.r > 0.0 && schedule.r <= 1.0))
        throw_error(ErrorCode::InvalidArgument, "sampling ratio must be in (0, 1]");
    if (schedule.total_epochs < 1)
        throw_error(ErrorCode::InvalidArgument, "total_epochs must be >= 1");
    if (epoch < 0 || epoch >= schedule.total_epochs)
        throw_error(ErrorCode::IndexOutOfRange,
                    "epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(schedule.total_epochs) + ")");
}

void check_mixture(const MetricMixture& mixture, int epoch) {
    std::array<bool, 3> present = {false, false, false};
    for (int g : mixture.order) {
        if (g < 0 || g > 2 || present[g])
            throw_error(ErrorCode::InvalidArgument, "mixture order must be a permutation of 0,1,2");
        present[g] = true;
    }
    if (!(mixture.sigma > 0.0))
        throw_error(ErrorCode::InvalidArgument, "mixture sigma must be > 0");
    if (mixture.total_epochs < 1)
        throw_error(ErrorCode::InvalidArgument, "total_epochs must be >= 1");
    if (epoch < 0 || epoch >= mixture.total_epochs)
        throw_error(ErrorCode::IndexOutOfRange,
                    "epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(mixture.total_epochs) + ")");
}

}  // namespace

std::string_view to_string(RatioMode mode) {
    return mode == RatioMode::Static ? "static" : "dynamic";
}

RatioMode ratio_mode_from_string(std::string_view name) {
    if (name == "static") return RatioMode::Static;
    if (name == "dynamic") return RatioMode::Dynamic;
    throw_error(ErrorCode::Parse, "unknown schedule mode: " + std::string(name));
}

double linspace_value(double start, double stop, int count, int index) {
    if (count < 1) throw_error(ErrorCode::InvalidArgument, "linspace needs >= 1 point");
    if (index < 0 || index >= count)
        throw_error(ErrorCode::IndexOutOfRange, "linspace index out of range");
    if (count == 1) return start;
    return start + (stop - start) * static_cast<double>(index) / static_cast<double>(count - 1);
}

double scheduled_ratio(const RatioSchedule& schedule, int epoch) {
    check_schedule(schedule, epoch);
    if (schedule.mode == RatioMode::Static) return schedule.r;
    if (schedule.r <= 0.5) {
        // Shrink from the full set toward (almost) nothing; the factor 2r
        // makes the per-epoch fractions average to 1.01*r.
        return linspace_value(1.0, 0.01, schedule.total_epochs, epoch) * 2.0 * schedule.r;
    }
    // Endpoint 2r-1 keeps the mean of the linear decay exactly at r.
    return linspace_value(1.0, 2.0 * schedule.r - 1.0, schedule.total_epochs, epoch);
}

std::size_t proxy_size(const RatioSchedule& schedule, int epoch, std::size_t n) {
    if (n < 1) throw_error(ErrorCode::InvalidArgument, "dataset size must be >= 1");
    const double fraction = scheduled_ratio(schedule, epoch);
    const auto rounded = static_cast<long long>(std::llround(fraction * static_cast<double>(n)));
    const long long clamped = std::clamp<long long>(rounded, 1, static_cast<long long>(n));
    return static_cast<std::size_t>(clamped);
}

MetricMixture MetricMixture::with_defaults(int total_epochs, std::array<int, 3> order) {
    return MetricMixture{order, static_cast<double>(total_epochs) / 8.0, total_epochs};
}

int metric_group(MetricKind kind) {
    switch (kind) {
        case MetricKind::Random: return 0;
        case MetricKind::Prediction:
        case MetricKind::Gradient: return 1;
        case MetricKind::Loss:
        case MetricKind::Entropy: return 2;
    }
    throw_error(ErrorCode::InvalidArgument, "unknown metric kind");
}

int metric_group_size(int group) {
    switch (group) {
        case 0: return 1;
        case 1:
        case 2: return 2;
    }
    throw_error(ErrorCode::InvalidArgument, "metric group must be 0, 1, or 2");
}

double group_mean(const MetricMixture& mixture, int group) {
    for (int k = 0; k < 3; ++k) {
        if (mixture.order[k] == group)
            return static_cast<double>(mixture.total_epochs) * static_cast<double>(k + 1) / 4.0;
    }
    throw_error(ErrorCode::InvalidArgument, "metric group must be 0, 1, or 2");
}

std::array<double, kMetricKindCount> metric_probabilities(const MetricMixture& mixture, int epoch) {
    check_mixture(mixture, epoch);
    std::array<double, kMetricKindCount> probabilities{};
    double total = 0.0;
    for (MetricKind kind : kAllMetricKinds) {
        const int group = metric_group(kind);
        const double distance = static_cast<double>(epoch) - group_mean(mixture, group);
        const double weight = std::exp(-distance * distance / (2.0 * mixture.sigma * mixture.sigma)) /
                              static_cast<double>(metric_group_size(group));
        probabilities[static_cast<std::size_t>(kind)] = weight;
        total += weight;
    }
    for (double& p : probabilities) p /= total;
    return probabilities;
}

MetricKind draw_metric(const MetricMixture& mixture, int epoch, Rng& rng) {
    const auto probabilities = metric_probabilities(mixture, epoch);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (MetricKind kind : kAllMetricKinds) {
        cumulative += probabilities[static_cast<std::size_t>(kind)];
        if (u < cumulative) return kind;
    }
    return kAllMetricKinds.back();  // guard against cumulative rounding short of 1
}

}  // namespace asp
