#include "asp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "asp/error.hpp"

namespace asp {

namespace {

void check_distribution(std::span<const double> p) {
    if (p.empty()) throw_error(ErrorCode::InvalidArgument, "empty probability vector");
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0)
            throw_error(ErrorCode::InvalidArgument, "probabilities must be finite and non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw_error(ErrorCode::InvalidArgument, "probabilities must sum to 1");
}

void check_label(std::size_t label, std::size_t num_classes) {
    if (label >= num_classes)
        throw_error(ErrorCode::IndexOutOfRange, "label out of range for probability vector");
}

}  // namespace

double entropy_of(std::span<const double> probabilities) {
    check_distribution(probabilities);
    double h = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) h -= p * std::log(std::max(p, kProbFloor));
    }
    return h;
}

double gradient_norm_of(std::span<const double> probabilities, std::size_t label) {
    check_distribution(probabilities);
    check_label(label, probabilities.size());
    double sq = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        const double d = probabilities[k] - (k == label ? 1.0 : 0.0);
        sq += d * d;
    }
    return std::sqrt(sq);
}

double loss_of(std::span<const double> probabilities, std::size_t label,
               double label_smoothing) {
    check_distribution(probabilities);
    check_label(label, probabilities.size());
    if (label_smoothing < 0.0 || label_smoothing >= 1.0)
        throw_error(ErrorCode::InvalidArgument, "label_smoothing must be in [0, 1)");
    const std::size_t k_classes = probabilities.size();
    const double eps = label_smoothing;
    double loss = 0.0;
    for (std::size_t k = 0; k < k_classes; ++k) {
        const double target = (k == label ? 1.0 - eps : 0.0) + eps / static_cast<double>(k_classes);
        if (target > 0.0) loss -= target * std::log(std::max(probabilities[k], kProbFloor));
    }
    return loss;
}

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::Random: return "random";
        case MetricKind::Gradient: return "gradient";
        case MetricKind::Loss: return "loss";
        case MetricKind::Entropy: return "entropy";
        case MetricKind::Prediction: return "prediction";
    }
    throw_error(ErrorCode::InvalidArgument, "unknown metric kind");
}

MetricKind metric_kind_from_string(std::string_view name) {
    for (MetricKind kind : kAllMetricKinds) {
        if (to_string(kind) == name) return kind;
    }
    throw_error(ErrorCode::Parse, "unknown metric name: " + std::string(name));
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::IndexOutOfRange: return "index_out_of_range";
        case ErrorCode::DuplicateSample: return "duplicate_sample";
        case ErrorCode::Budget: return "budget";
        case ErrorCode::DegenerateInput: return "degenerate_input";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Config: return "config";
        case ErrorCode::Divergence: return "divergence";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace asp
