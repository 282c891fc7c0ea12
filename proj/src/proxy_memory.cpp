#include "asp/proxy_memory.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "asp/error.hpp"
#include "asp/io_util.hpp"

namespace asp {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

ProxyMemory::ProxyMemory(std::size_t n)
    : loss_(n, 0.0),
      entropy_(n, 0.0),
      gradient_(n, 0.0),
      prediction_scores_(n, 0),
      last_active_(n, kNeverActive) {
    if (n == 0) throw_error(ErrorCode::InvalidArgument, "proxy memory needs at least one sample");
}

void ProxyMemory::check_id(SampleId id) const {
    if (id >= size())
        throw_error(ErrorCode::IndexOutOfRange,
                    "sample id " + std::to_string(id) + " >= sample count " + std::to_string(size()));
}

void ProxyMemory::record_observations(std::int64_t epoch, const EpochObservations& obs) {
    std::vector<bool> seen(size(), false);
    for (const SampleObservation& o : obs.entries) {
        check_id(o.id);
        if (seen[o.id])
            throw_error(ErrorCode::DuplicateSample,
                        "sample id " + std::to_string(o.id) + " observed twice in one epoch");
        seen[o.id] = true;
    }
    for (const SampleObservation& o : obs.entries) {
        loss_[o.id] = o.loss;
        entropy_[o.id] = o.entropy;
        gradient_[o.id] = o.gradient_norm;
        prediction_scores_[o.id] += o.correct ? -1 : +1;
        last_active_[o.id] = epoch;
    }
}

void ProxyMemory::update_prediction_scores(
    std::span<const std::pair<SampleId, bool>> correctness) {
    std::vector<bool> seen(size(), false);
    for (const auto& [id, correct] : correctness) {
        check_id(id);
        if (seen[id])
            throw_error(ErrorCode::DuplicateSample,
                        "sample id " + std::to_string(id) + " listed twice");
        seen[id] = true;
    }
    for (const auto& [id, correct] : correctness) {
        prediction_scores_[id] += correct ? -1 : +1;
    }
}

std::vector<double> ProxyMemory::importance_vector(MetricKind kind, Rng& rng) const {
    std::vector<double> out(size());
    switch (kind) {
        case MetricKind::Random:
            for (double& v : out) v = rng.uniform();
            break;
        case MetricKind::Gradient:
            out = gradient_;
            break;
        case MetricKind::Loss:
            out = loss_;
            break;
        case MetricKind::Entropy:
            out = entropy_;
            break;
        case MetricKind::Prediction:
            std::transform(prediction_scores_.begin(), prediction_scores_.end(), out.begin(),
                           [](std::int64_t s) { return static_cast<double>(s); });
            break;
    }
    return out;
}

double ProxyMemory::value(MetricKind kind, SampleId id) const {
    check_id(id);
    switch (kind) {
        case MetricKind::Gradient: return gradient_[id];
        case MetricKind::Loss: return loss_[id];
        case MetricKind::Entropy: return entropy_[id];
        case MetricKind::Prediction: return static_cast<double>(prediction_scores_[id]);
        case MetricKind::Random:
            throw_error(ErrorCode::InvalidArgument, "random metric has no stored value");
    }
    throw_error(ErrorCode::InvalidArgument, "unknown metric kind");
}

void ProxyMemory::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    detail::write_raw<std::uint32_t>(out, kVersion);
    detail::write_raw<std::uint64_t>(out, size());
    for (double v : loss_) detail::write_raw(out, v);
    for (double v : entropy_) detail::write_raw(out, v);
    for (double v : gradient_) detail::write_raw(out, v);
    for (std::int64_t v : prediction_scores_) detail::write_raw(out, v);
    for (std::int64_t v : last_active_) detail::write_raw(out, v);
    if (!out) throw_error(ErrorCode::Io, "failed writing " + path.string());
}

ProxyMemory ProxyMemory::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorCode::Io, "cannot open " + path.string());
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw_error(ErrorCode::Parse, path.string() + ": not a proxy memory snapshot");
    const auto version = detail::read_raw<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw_error(ErrorCode::Parse,
                    path.string() + ": unsupported snapshot version " + std::to_string(version));
    const auto n = detail::read_raw<std::uint64_t>(in, "sample count");
    if (n == 0) throw_error(ErrorCode::Parse, path.string() + ": zero sample count");
    ProxyMemory memory(static_cast<std::size_t>(n));
    for (double& v : memory.loss_) v = detail::read_raw<double>(in, "loss");
    for (double& v : memory.entropy_) v = detail::read_raw<double>(in, "entropy");
    for (double& v : memory.gradient_) v = detail::read_raw<double>(in, "gradient");
    for (std::int64_t& v : memory.prediction_scores_)
        v = detail::read_raw<std::int64_t>(in, "prediction score");
    for (std::int64_t& v : memory.last_active_)
        v = detail::read_raw<std::int64_t>(in, "last active epoch");
    return memory;
}

void ProxyMemory::write_csv(std::ostream& out) const {
    out << "sample_id,loss,entropy,gradient,prediction_score,last_active_epoch\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out << i << ',' << format_double(loss_[i]) << ',' << format_double(entropy_[i]) << ','
            << format_double(gradient_[i]) << ',' << prediction_scores_[i] << ','
            << last_active_[i] << '\n';
    }
}

std::vector<RankedImportance> mean_importance_report(
    std::span<const std::vector<double>> history) {
    if (history.empty())
        throw_error(ErrorCode::InvalidArgument, "importance history is empty");
    const std::size_t n = history.front().size();
    if (n == 0) throw_error(ErrorCode::InvalidArgument, "importance arrays are empty");
    for (const auto& epoch_values : history) {
        if (epoch_values.size() != n)
            throw_error(ErrorCode::InvalidArgument, "importance arrays differ in length");
    }
    std::vector<RankedImportance> ranked(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& epoch_values : history) sum += epoch_values[i];
        ranked[i] = {static_cast<SampleId>(i), sum / static_cast<double>(history.size())};
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedImportance& a, const RankedImportance& b) {
        if (a.mean_value != b.mean_value) return a.mean_value > b.mean_value;
        return a.id < b.id;
    });
    return ranked;
}

}  // namespace asp
