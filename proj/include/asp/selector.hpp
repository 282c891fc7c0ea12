#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asp/rng.hpp"
#include "asp/types.hpp"

namespace asp {

enum class SelectionStrategy : std::uint8_t {
    Probabilistic,  // weighted sampling without duplicates over softmax(values)
    TopM,           // deterministic m largest, ties by ascending id
};

std::string_view to_string(SelectionStrategy strategy);
SelectionStrategy selection_strategy_from_string(std::string_view name);

// The active subset for one epoch. Ids are kept sorted ascending.
struct ProxySet {
    std::vector<SampleId> ids;
    int epoch = 0;
};

// Softmax with max-subtraction. Strictly positive, sums to 1, order-preserving.
std::vector<double> sampling_probabilities(std::span<const double> values);

// Draws m distinct ids. Probabilistic mode renormalizes after each draw so
// every sample keeps a nonzero chance; TopM takes the m largest values.
ProxySet select_proxy(std::span<const double> values, std::size_t m,
                      SelectionStrategy strategy, Rng& rng, int epoch = 0);

// Monte-Carlo estimate of each id's probability of landing in the proxy set
// under the Probabilistic strategy. Diagnostic support for the selection
// tests and reports.
std::vector<double> inclusion_frequencies(std::span<const double> values, std::size_t m,
                                          std::size_t trials, Rng& rng);

}  // namespace asp
