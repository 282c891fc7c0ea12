#include "asp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "asp/error.hpp"
#include "asp/metrics.hpp"
#include "asp/scheduler.hpp"

namespace asp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t argmax(std::span<const double> values) {
    return static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
}

ProxySet full_proxy(std::size_t n, int epoch) {
    ProxySet proxy;
    proxy.epoch = epoch;
    proxy.ids.resize(n);
    std::iota(proxy.ids.begin(), proxy.ids.end(), SampleId{0});
    return proxy;
}

void check_model_matches(const Model& model, const Dataset& dataset) {
    if (model.spec().input_dim != dataset.dims)
        throw_config_error("model", "input_dim " + std::to_string(model.spec().input_dim) +
                                        " does not match dataset dims " +
                                        std::to_string(dataset.dims));
    if (model.spec().num_classes != dataset.num_classes)
        throw_config_error("model", "num_classes " + std::to_string(model.spec().num_classes) +
                                        " does not match dataset classes " +
                                        std::to_string(dataset.num_classes));
}

}  // namespace

EpochOutcome train_epoch(Model& model, std::vector<double>& momentum, const Dataset& dataset,
                         std::span<const SampleId> active_local, const HyperParams& hp,
                         Rng& shuffle_rng, Rng& augment_rng, int epoch) {
    if (active_local.empty()) throw_error(ErrorCode::InvalidArgument, "empty active set");
    check_model_matches(model, dataset);
    if (momentum.size() != model.param_count())
        throw_error(ErrorCode::InvalidArgument, "momentum buffer size mismatch");
    const std::size_t n_train = dataset.train_ids.size();
    for (SampleId local : active_local) {
        if (local >= n_train)
            throw_error(ErrorCode::IndexOutOfRange, "active sample index out of train split");
    }

    std::vector<SampleId> order(active_local.begin(), active_local.end());
    shuffle_rng.shuffle(order);

    const std::size_t d = dataset.dims;
    std::vector<double> features(hp.batch_size * d);
    std::vector<int> labels(hp.batch_size);
    std::vector<double> grad(model.param_count());
    std::vector<double> probabilities;

    EpochOutcome outcome;
    outcome.observations.entries.reserve(order.size());
    double loss_sum = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += hp.batch_size) {
        const std::size_t batch = std::min(hp.batch_size, order.size() - begin);
        for (std::size_t b = 0; b < batch; ++b) {
            const SampleId global = dataset.train_ids[order[begin + b]];
            const auto row = dataset.features_of(global);
            std::copy(row.begin(), row.end(), features.begin() + b * d);
            if (augment_rng.uniform() < hp.augment_prob) {
                for (std::size_t j = 0; j < d; ++j)
                    features[b * d + j] += kAugmentNoiseStd * augment_rng.normal();
            }
            labels[b] = dataset.labels[global];
        }
        const double batch_loss =
            model.forward_backward({features.data(), batch * d}, {labels.data(), batch},
                                   hp.label_smoothing, grad, probabilities);
        if (!std::isfinite(batch_loss) || batch_loss > kDivergenceThreshold)
            throw_error(ErrorCode::Divergence,
                        "training diverged at epoch " + std::to_string(epoch));
        loss_sum += batch_loss * static_cast<double>(batch);

        auto params = model.params();
        for (std::size_t p = 0; p < params.size(); ++p) {
            const double g = grad[p] + hp.weight_decay * params[p];
            momentum[p] = hp.momentum * momentum[p] + g;
            params[p] -= hp.learning_rate * momentum[p];
        }

        const std::size_t k_classes = dataset.num_classes;
        for (std::size_t b = 0; b < batch; ++b) {
            const std::span<const double> p{probabilities.data() + b * k_classes, k_classes};
            const auto label = static_cast<std::size_t>(labels[b]);
            SampleObservation obs;
            obs.id = order[begin + b];
            obs.loss = loss_of(p, label, hp.label_smoothing);
            obs.entropy = entropy_of(p);
            obs.gradient_norm = gradient_norm_of(p, label);
            obs.correct = argmax(p) == label;
            outcome.observations.entries.push_back(obs);
        }
    }
    outcome.mean_loss = loss_sum / static_cast<double>(order.size());
    return outcome;
}

std::pair<double, double> evaluate(const Model& model, const Dataset& dataset,
                                   std::span<const SampleId> ids) {
    if (ids.empty()) throw_error(ErrorCode::InvalidArgument, "empty evaluation split");
    check_model_matches(model, dataset);
    std::size_t hits = 0;
    double loss_sum = 0.0;
    for (SampleId id : ids) {
        const std::vector<double> p = model.predict(dataset.features_of(id));
        for (double v : p)
            if (!std::isfinite(v))
                throw_error(ErrorCode::Divergence, "non-finite prediction (model diverged)");
        const auto label = static_cast<std::size_t>(dataset.labels[id]);
        if (argmax(p) == label) ++hits;
        loss_sum += loss_of(p, label, 0.0);
    }
    return {static_cast<double>(hits) / static_cast<double>(ids.size()),
            loss_sum / static_cast<double>(ids.size())};
}

namespace {

// CoreSet phase 1: pretrain a throwaway model on the full train split, then
// rank every sample once by the fixed metric.
ProxySet coreset_subset(const RunConfig& config, const Dataset& dataset, const ModelSpec& spec) {
    const std::size_t n = dataset.train_ids.size();
    Model model(spec, derive_seed(config.seed, "pretrain-init"));
    std::vector<double> momentum(model.param_count(), 0.0);
    ProxyMemory memory(n);
    const ProxySet full = full_proxy(n, 0);
    for (int e = 0; e < config.hyperparams.epochs; ++e) {
        Rng shuffle_rng(derive_seed(config.seed, "pretrain-shuffle", static_cast<std::uint64_t>(e)));
        Rng augment_rng(derive_seed(config.seed, "pretrain-augment", static_cast<std::uint64_t>(e)));
        const EpochOutcome outcome =
            train_epoch(model, momentum, dataset, full.ids, config.hyperparams, shuffle_rng,
                        augment_rng, e);
        memory.record_observations(e, outcome.observations);
    }
    const auto m = static_cast<std::size_t>(std::clamp<long long>(
        std::llround(config.ratio * static_cast<double>(n)), 1, static_cast<long long>(n)));
    Rng rank_rng(derive_seed(config.seed, "coreset-select"));
    const std::vector<double> values = memory.importance_vector(*config.fixed_metric, rank_rng);
    return select_proxy(values, m, SelectionStrategy::TopM, rank_rng, 0);
}

}  // namespace

RunOutput run_asp(const RunConfig& config, const Dataset& dataset, const RunOptions& options) {
    validate_run_config(config);
    if (dataset.train_ids.empty()) throw_error(ErrorCode::InvalidArgument, "empty train split");

    const ModelSpec spec{config.model_kind, dataset.dims, dataset.num_classes,
                         config.hidden_units};
    const std::size_t n = dataset.train_ids.size();
    const int total_epochs = config.hyperparams.epochs;
    const RatioSchedule schedule{config.schedule_mode, config.ratio, total_epochs};
    const MetricMixture mixture =
        config.mixture.sigma > 0.0
            ? MetricMixture{config.mixture.order, config.mixture.sigma, total_epochs}
            : MetricMixture::with_defaults(total_epochs, config.mixture.order);

    const auto t_run = Clock::now();

    ProxySet proxy = full_proxy(n, 0);
    std::string metric_label = "full";
    if (config.mode == RunMode::CoreSet) {
        proxy = coreset_subset(config, dataset, spec);
        metric_label = std::string(to_string(*config.fixed_metric));
    }

    Model model(spec, derive_seed(config.seed, "init"));
    std::vector<double> momentum(model.param_count(), 0.0);
    ProxyMemory memory(n);
    RunLog log;
    log.config = config;
    HardnessTrace trace;

    for (int e = 0; e < total_epochs; ++e) {
        const auto t_epoch = Clock::now();
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(e)));
        Rng augment_rng(derive_seed(config.seed, "augment", static_cast<std::uint64_t>(e)));
        EpochOutcome outcome;
        EpochRecord record;
        record.epoch = e;
        record.metric = metric_label;
        record.m = proxy.ids.size();
        try {
            outcome = train_epoch(model, momentum, dataset, proxy.ids, config.hyperparams,
                                  shuffle_rng, augment_rng, e);
            // A blow-up on the epoch's last update only shows at evaluation
            // time, so the evaluations share the divergence handling.
            std::tie(record.val_accuracy, std::ignore) =
                dataset.val_ids.empty() ? std::pair<double, double>{0.0, 0.0}
                                        : evaluate(model, dataset, dataset.val_ids);
            std::tie(record.test_accuracy, std::ignore) =
                dataset.test_ids.empty() ? std::pair<double, double>{0.0, 0.0}
                                         : evaluate(model, dataset, dataset.test_ids);
        } catch (const Error& err) {
            if (err.code() == ErrorCode::Divergence) {
                log.diverged_at_epoch = e;
                break;
            }
            throw;
        }
        memory.record_observations(e, outcome.observations);
        record.train_loss = outcome.mean_loss;
        record.wall_seconds = seconds_since(t_epoch);
        log.epochs.push_back(std::move(record));

        if (options.log_active_sets) {
            std::vector<SampleId> global_ids;
            global_ids.reserve(proxy.ids.size());
            for (SampleId local : proxy.ids) global_ids.push_back(dataset.train_ids[local]);
            log.active_sets.push_back(std::move(global_ids));
        }
        if (options.trace_metric) {
            Rng trace_rng(derive_seed(config.seed, "trace", static_cast<std::uint64_t>(e)));
            trace.per_epoch.push_back(memory.importance_vector(*options.trace_metric, trace_rng));
        }

        if (e + 1 >= total_epochs) break;
        if (config.mode == RunMode::FullData) {
            proxy = full_proxy(n, e + 1);
        } else if (config.mode == RunMode::CoreSet) {
            proxy.epoch = e + 1;  // same fixed subset every epoch
        } else {
            const std::size_t m_next = proxy_size(schedule, e + 1, n);
            if (m_next == n) {
                proxy = full_proxy(n, e + 1);
                metric_label = "full";
            } else {
                MetricKind kind;
                if (config.fixed_metric) {
                    kind = *config.fixed_metric;
                } else {
                    Rng metric_rng(
                        derive_seed(config.seed, "metric", static_cast<std::uint64_t>(e + 1)));
                    kind = draw_metric(mixture, e + 1, metric_rng);
                }
                Rng select_rng(
                    derive_seed(config.seed, "select", static_cast<std::uint64_t>(e + 1)));
                const std::vector<double> values = memory.importance_vector(kind, select_rng);
                proxy = select_proxy(values, m_next, config.strategy, select_rng, e + 1);
                metric_label = std::string(to_string(kind));
            }
        }
    }

    if (!log.epochs.empty()) {
        log.final_val_accuracy = log.epochs.back().val_accuracy;
        log.final_test_accuracy = log.epochs.back().test_accuracy;
    }
    log.total_wall_seconds = seconds_since(t_run);
    return RunOutput{std::move(log), std::move(model), std::move(memory), std::move(trace)};
}

RunOutput run_asp(const RunConfig& config, const RunOptions& options) {
    const Dataset dataset = build_dataset(config);
    return run_asp(config, dataset, options);
}

}  // namespace asp
