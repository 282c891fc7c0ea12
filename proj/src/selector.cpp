#include "asp/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asp/error.hpp"

namespace asp {

std::string_view to_string(SelectionStrategy strategy) {
    return strategy == SelectionStrategy::Probabilistic ? "prob" : "topm";
}

SelectionStrategy selection_strategy_from_string(std::string_view name) {
    if (name == "prob") return SelectionStrategy::Probabilistic;
    if (name == "topm") return SelectionStrategy::TopM;
    throw_error(ErrorCode::Parse, "unknown selection strategy: " + std::string(name));
}

std::vector<double> sampling_probabilities(std::span<const double> values) {
    if (values.empty()) throw_error(ErrorCode::InvalidArgument, "empty importance vector");
    for (double v : values) {
        if (!std::isfinite(v))
            throw_error(ErrorCode::InvalidArgument, "importance values must be finite");
    }
    const double max_value = *std::max_element(values.begin(), values.end());
    std::vector<double> probabilities(values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        probabilities[i] = std::exp(values[i] - max_value);
        total += probabilities[i];
    }
    for (double& p : probabilities) p /= total;
    return probabilities;
}

namespace {

std::vector<SampleId> draw_without_duplicates(std::span<const double> probabilities,
                                              std::size_t m, Rng& rng) {
    const std::size_t n = probabilities.size();
    std::vector<double> weight(probabilities.begin(), probabilities.end());
    std::vector<bool> taken(n, false);
    std::vector<SampleId> picked;
    picked.reserve(m);
    double remaining = 1.0;
    for (std::size_t draw = 0; draw < m; ++draw) {
        std::size_t chosen = n;
        if (remaining > 0.0) {
            const double u = rng.uniform() * remaining;
            double cumulative = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                cumulative += weight[i];
                if (u < cumulative) {
                    chosen = i;
                    break;
                }
            }
        }
        if (chosen == n) {
            // Residual mass exhausted by cancellation (or u landed past the
            // last bucket): fall back to a uniform pick among the leftovers.
            auto skip = rng.uniform_index(n - draw);
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (skip == 0) {
                    chosen = i;
                    break;
                }
                --skip;
            }
        }
        taken[chosen] = true;
        remaining -= weight[chosen];
        picked.push_back(static_cast<SampleId>(chosen));
    }
    return picked;
}

}  // namespace

ProxySet select_proxy(std::span<const double> values, std::size_t m,
                      SelectionStrategy strategy, Rng& rng, int epoch) {
    const std::size_t n = values.size();
    if (n == 0) throw_error(ErrorCode::InvalidArgument, "empty importance vector");
    if (m == 0 || m > n)
        throw_error(ErrorCode::Budget, "subset size " + std::to_string(m) +
                                           " outside [1, " + std::to_string(n) + "]");
    ProxySet proxy;
    proxy.epoch = epoch;
    if (m == n) {
        proxy.ids.resize(n);
        std::iota(proxy.ids.begin(), proxy.ids.end(), SampleId{0});
        return proxy;
    }
    if (strategy == SelectionStrategy::TopM) {
        std::vector<SampleId> order(n);
        std::iota(order.begin(), order.end(), SampleId{0});
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m),
                          order.end(), [&](SampleId a, SampleId b) {
                              if (values[a] != values[b]) return values[a] > values[b];
                              return a < b;
                          });
        proxy.ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    } else {
        proxy.ids = draw_without_duplicates(sampling_probabilities(values), m, rng);
    }
    std::sort(proxy.ids.begin(), proxy.ids.end());
    return proxy;
}

std::vector<double> inclusion_frequencies(std::span<const double> values, std::size_t m,
                                          std::size_t trials, Rng& rng) {
    if (trials == 0) throw_error(ErrorCode::InvalidArgument, "trials must be >= 1");
    std::vector<double> rate(values.size(), 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const ProxySet proxy = select_proxy(values, m, SelectionStrategy::Probabilistic, rng);
        for (SampleId id : proxy.ids) rate[id] += 1.0;
    }
    for (double& r : rate) r /= static_cast<double>(trials);
    return rate;
}

}  // namespace asp
