#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "asp/rng.hpp"
#include "asp/types.hpp"

namespace asp {

// last_active_epoch value for a sample that has never been activated.
inline constexpr std::int64_t kNeverActive = -1;

// Per-sample store of the latest importance observations. Values for samples
// absent from an epoch go stale rather than being decayed or cleared; the
// selector's softmax renormalization is what lets them re-enter training.
class ProxyMemory {
  public:
    explicit ProxyMemory(std::size_t n);

    std::size_t size() const { return loss_.size(); }

    // Overwrites loss/entropy/gradient for every observed sample, applies the
    // prediction-score update (-1 correct, +1 wrong, untouched when absent)
    // and stamps last_active_epoch. Ids must be unique and < n.
    void record_observations(std::int64_t epoch, const EpochObservations& obs);

    // Score update alone: pairs of (id, correct). Ids absent from the list
    // keep their score (the +0 branch).
    void update_prediction_scores(std::span<const std::pair<SampleId, bool>> correctness);

    // Scores for one metric over all n samples. Loss/Entropy/Gradient return
    // the stored (possibly stale) values, Prediction the integer accumulator
    // widened to double, Random n fresh uniform(0,1) draws (memory unchanged).
    std::vector<double> importance_vector(MetricKind kind, Rng& rng) const;

    double value(MetricKind kind, SampleId id) const;
    std::int64_t prediction_score(SampleId id) const { return prediction_scores_.at(id); }
    std::int64_t last_active_epoch(SampleId id) const { return last_active_.at(id); }

    // Snapshot I/O: versioned binary, and CSV with columns
    // sample_id,loss,entropy,gradient,prediction_score,last_active_epoch.
    void save(const std::filesystem::path& path) const;
    static ProxyMemory load(const std::filesystem::path& path);
    void write_csv(std::ostream& out) const;

    bool operator==(const ProxyMemory& other) const = default;

  private:
    void check_id(SampleId id) const;

    std::vector<double> loss_;
    std::vector<double> entropy_;
    std::vector<double> gradient_;
    std::vector<std::int64_t> prediction_scores_;
    std::vector<std::int64_t> last_active_;
};

// One row of the hardness ranking produced by mean_importance_report.
struct RankedImportance {
    SampleId id = 0;
    double mean_value = 0.0;
};

// Ranks samples by their importance averaged over a run's epochs, descending;
// ties broken by ascending id. `history` holds one equal-length array per
// epoch. The head of the result is the "hardest" samples, the tail the
// "easiest".
std::vector<RankedImportance> mean_importance_report(
    std::span<const std::vector<double>> history);

}  // namespace asp
