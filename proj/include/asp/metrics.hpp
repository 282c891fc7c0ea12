#pragma once

#include <span>

#include "asp/types.hpp"

namespace asp {

// Probabilities below this are clamped before entering a log.
inline constexpr double kProbFloor = 1e-12;

// Shannon entropy -sum p*ln(p) with 0*ln(0) := 0. `probabilities` must be a
// distribution: non-negative entries summing to 1 within 1e-6.
double entropy_of(std::span<const double> probabilities);

// Euclidean norm of (p - onehot(label)): the exact logit gradient of softmax
// cross-entropy for one sample, used as the cheap per-sample gradient signal.
// Range [0, sqrt(2)].
double gradient_norm_of(std::span<const double> probabilities, std::size_t label);

// Cross-entropy against the label-smoothed target (1-eps)*onehot + eps/K.
double loss_of(std::span<const double> probabilities, std::size_t label,
               double label_smoothing = 0.0);

}  // namespace asp
