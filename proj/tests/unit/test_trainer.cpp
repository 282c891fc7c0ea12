#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "asp/artifacts.hpp"
#include "asp/error.hpp"
#include "asp/scheduler.hpp"
#include "asp/trainer.hpp"
#include "test_util.hpp"

using namespace asp;

namespace {

// Hand-built two-cluster dataset: x < 0 is class 0, x > 0 is class 1.
Dataset line_dataset(std::size_t per_class) {
    Dataset dataset;
    dataset.dims = 1;
    dataset.num_classes = 2;
    for (std::size_t i = 0; i < per_class; ++i) {
        dataset.features.push_back(-1.0 - 0.01 * static_cast<double>(i));
        dataset.labels.push_back(0);
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        dataset.features.push_back(1.0 + 0.01 * static_cast<double>(i));
        dataset.labels.push_back(1);
    }
    dataset.train_ids.resize(dataset.labels.size());
    std::iota(dataset.train_ids.begin(), dataset.train_ids.end(), SampleId{0});
    return dataset;
}

RunConfig small_config(std::uint64_t seed) {
    RunConfig config;
    config.seed = seed;
    config.hyperparams.epochs = 8;
    config.hyperparams.batch_size = 16;
    config.data.synthetic.classes = 2;
    config.data.synthetic.per_class = 60;
    config.data.synthetic.dims = 2;
    config.data.synthetic.overlap = 0.5;
    return config;
}

std::vector<SampleId> iota_ids(std::size_t n) {
    std::vector<SampleId> ids(n);
    std::iota(ids.begin(), ids.end(), SampleId{0});
    return ids;
}

}  // namespace

TEST_CASE("train_epoch: zero learning rate is a null update") {
    const Dataset dataset = line_dataset(10);
    Model model({ModelKind::Linear, 1, 2, 4}, 3);
    const std::vector<double> before(model.params().begin(), model.params().end());
    std::vector<double> momentum(model.param_count(), 0.0);

    HyperParams hp;
    hp.learning_rate = 0.0;
    hp.batch_size = 4;
    Rng shuffle_rng(1), augment_rng(2);
    const EpochOutcome outcome =
        train_epoch(model, momentum, dataset, iota_ids(20), hp, shuffle_rng, augment_rng, 0);

    CHECK(std::vector<double>(model.params().begin(), model.params().end()) == before);
    CHECK(outcome.observations.entries.size() == 20);
    CHECK(std::isfinite(outcome.mean_loss));
}

TEST_CASE("train_epoch: a single repeated sample gets memorized") {
    const Dataset dataset = line_dataset(5);
    Model model({ModelKind::Linear, 1, 2, 4}, 7);
    std::vector<double> momentum(model.param_count(), 0.0);

    HyperParams hp;
    hp.learning_rate = 0.5;
    hp.momentum = 0.0;
    hp.batch_size = 1;
    const std::vector<SampleId> active = {3};  // global id 3, label 0

    for (int e = 0; e < 200; ++e) {
        Rng shuffle_rng(derive_seed(1, "shuffle", static_cast<std::uint64_t>(e)));
        Rng augment_rng(derive_seed(1, "augment", static_cast<std::uint64_t>(e)));
        train_epoch(model, momentum, dataset, active, hp, shuffle_rng, augment_rng, e);
    }
    const SampleId global = dataset.train_ids[3];
    const auto p = model.predict(dataset.features_of(global));
    const auto label = static_cast<std::size_t>(dataset.labels[global]);
    CHECK(std::max_element(p.begin(), p.end()) - p.begin() ==
          static_cast<std::ptrdiff_t>(label));
    CHECK(-std::log(p[label]) < 0.01);
}

TEST_CASE("train_epoch: observations cover exactly the active set") {
    const Dataset dataset = line_dataset(15);
    Model model({ModelKind::Linear, 1, 2, 4}, 11);
    std::vector<double> momentum(model.param_count(), 0.0);
    HyperParams hp;
    hp.batch_size = 4;

    const std::vector<SampleId> active = {1, 4, 7, 9, 20, 25, 28};
    Rng shuffle_rng(5), augment_rng(6);
    const EpochOutcome outcome =
        train_epoch(model, momentum, dataset, active, hp, shuffle_rng, augment_rng, 0);

    std::vector<SampleId> seen;
    for (const SampleObservation& o : outcome.observations.entries) seen.push_back(o.id);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == active);
    for (const SampleObservation& o : outcome.observations.entries) {
        CHECK(std::isfinite(o.loss));
        CHECK(o.loss >= 0.0);
        CHECK(o.entropy >= 0.0);
        CHECK(o.gradient_norm >= 0.0);
        CHECK(o.gradient_norm <= std::sqrt(2.0) + 1e-12);
    }
}

TEST_CASE("train_epoch: single-batch mean loss reproduces the raw forward pass") {
    const Dataset dataset = line_dataset(8);
    const std::uint64_t shuffle_seed = 909;
    Model model({ModelKind::Linear, 1, 2, 4}, 13);
    const Model pristine = model;
    std::vector<double> momentum(model.param_count(), 0.0);

    HyperParams hp;
    hp.batch_size = 64;  // one batch holds the whole active set
    hp.augment_prob = 0.0;
    const std::vector<SampleId> active = iota_ids(16);

    Rng shuffle_rng(shuffle_seed), augment_rng(4);
    const EpochOutcome outcome =
        train_epoch(model, momentum, dataset, active, hp, shuffle_rng, augment_rng, 0);

    // Replay the epoch's shuffle and evaluate the same batch on the pre-update
    // weights.
    std::vector<SampleId> order = active;
    Rng replay(shuffle_seed);
    replay.shuffle(order);
    std::vector<double> features;
    std::vector<int> labels;
    for (const SampleId local : order) {
        const SampleId global = dataset.train_ids[local];
        const auto row = dataset.features_of(global);
        features.insert(features.end(), row.begin(), row.end());
        labels.push_back(dataset.labels[global]);
    }
    std::vector<double> grad(pristine.param_count());
    std::vector<double> probabilities;
    const double raw = pristine.forward_backward(features, labels, hp.label_smoothing, grad,
                                                 probabilities);
    CHECK(outcome.mean_loss == raw);
}

TEST_CASE("train_epoch: input validation") {
    const Dataset dataset = line_dataset(5);
    Model model({ModelKind::Linear, 1, 2, 4}, 1);
    std::vector<double> momentum(model.param_count(), 0.0);
    HyperParams hp;
    Rng a(1), b(2);

    CHECK_THROWS_AS(train_epoch(model, momentum, dataset, std::vector<SampleId>{}, hp, a, b, 0),
                    Error);
    CHECK_THROWS_AS(
        train_epoch(model, momentum, dataset, std::vector<SampleId>{10}, hp, a, b, 0), Error);

    Model mismatched({ModelKind::Linear, 3, 2, 4}, 1);
    std::vector<double> wrong_momentum(mismatched.param_count(), 0.0);
    try {
        train_epoch(mismatched, wrong_momentum, dataset, iota_ids(2), hp, a, b, 0);
        FAIL("expected a throw");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Config);
        CHECK(err.field() == "model");
    }
}

TEST_CASE("evaluate: known accuracies") {
    const Dataset dataset = line_dataset(10);

    // All-zero weights: uniform probabilities, argmax lands on class 0.
    Model flat({ModelKind::Linear, 1, 2, 4}, 1);
    std::fill(flat.params().begin(), flat.params().end(), 0.0);
    const auto [flat_acc, flat_loss] = evaluate(flat, dataset, dataset.train_ids);
    CHECK(flat_acc == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(flat_loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Hand-set separator: class-1 logit grows with x.
    Model sharp({ModelKind::Linear, 1, 2, 4}, 1);
    auto params = sharp.params();
    params[0] = -8.0;  // W[class 0]
    params[1] = 8.0;   // W[class 1]
    params[2] = 0.0;
    params[3] = 0.0;
    const auto [sharp_acc, sharp_loss] = evaluate(sharp, dataset, dataset.train_ids);
    CHECK(sharp_acc == 1.0);
    CHECK(sharp_loss < 0.01);

    // A reloaded model evaluates identically.
    TempDir dir;
    sharp.save(dir / "model.bin");
    const Model reloaded = Model::load(dir / "model.bin");
    const auto [acc2, loss2] = evaluate(reloaded, dataset, dataset.train_ids);
    CHECK(acc2 == sharp_acc);
    CHECK(loss2 == sharp_loss);

    CHECK_THROWS_AS(evaluate(flat, dataset, std::vector<SampleId>{}), Error);
}

TEST_CASE("run_asp: epoch zero is full, later sizes follow the schedule") {
    RunConfig config = small_config(17);
    config.schedule_mode = RatioMode::Dynamic;
    config.ratio = 0.3;
    config.fixed_metric = MetricKind::Loss;

    const Dataset dataset = build_dataset(config);
    const std::size_t n = dataset.train_ids.size();
    const RunOutput output = run_asp(config, dataset);
    const RatioSchedule schedule{config.schedule_mode, config.ratio,
                                 config.hyperparams.epochs};

    REQUIRE(output.log.epochs.size() ==
            static_cast<std::size_t>(config.hyperparams.epochs));
    CHECK(output.log.epochs[0].m == n);
    CHECK(output.log.epochs[0].metric == "full");
    for (std::size_t e = 1; e < output.log.epochs.size(); ++e) {
        const std::size_t expected = proxy_size(schedule, static_cast<int>(e), n);
        CHECK(output.log.epochs[e].m == expected);
        if (expected == n) {
            CHECK(output.log.epochs[e].metric == "full");
        } else {
            CHECK(output.log.epochs[e].metric == "loss");
        }
    }
    CHECK(output.log.final_val_accuracy == output.log.epochs.back().val_accuracy);
    CHECK(output.log.final_test_accuracy == output.log.epochs.back().test_accuracy);
    CHECK(output.memory.size() == n);
}

TEST_CASE("run_asp: mixture draws give valid metric labels") {
    RunConfig config = small_config(23);
    config.ratio = 0.4;
    config.fixed_metric.reset();
    config.hyperparams.epochs = 12;

    const RunOutput output = run_asp(config);
    const std::set<std::string> valid = {"full",    "random",  "gradient",
                                         "loss",    "entropy", "prediction"};
    std::set<std::string> seen;
    for (const EpochRecord& record : output.log.epochs) {
        CHECK(valid.count(record.metric) == 1);
        seen.insert(record.metric);
    }
    CHECK(output.log.epochs[0].metric == "full");
}

TEST_CASE("run_asp: same seed, same bytes") {
    RunConfig config = small_config(31);
    config.hyperparams.augment_prob = 0.5;

    RunOptions options;
    options.log_active_sets = true;
    const RunOutput a = run_asp(config, options);
    const RunOutput b = run_asp(config, options);

    CHECK(run_log_epochs_csv(a.log) == run_log_epochs_csv(b.log));
    CHECK(strip_volatile(run_log_to_json_text(a.log)) ==
          strip_volatile(run_log_to_json_text(b.log)));
    CHECK(a.model == b.model);
    CHECK(a.memory == b.memory);
    CHECK(a.log.active_sets == b.log.active_sets);
}

TEST_CASE("run_asp: full-budget run equals the full-data baseline") {
    RunConfig asp_config = small_config(37);
    asp_config.mode = RunMode::Asp;
    asp_config.ratio = 1.0;
    asp_config.schedule_mode = RatioMode::Static;

    RunConfig full_config = asp_config;
    full_config.mode = RunMode::FullData;

    const RunOutput asp_run = run_asp(asp_config);
    const RunOutput full_run = run_asp(full_config);

    CHECK(run_log_epochs_csv(asp_run.log) == run_log_epochs_csv(full_run.log));
    CHECK(asp_run.model == full_run.model);
    CHECK(asp_run.memory == full_run.memory);
    for (const EpochRecord& record : asp_run.log.epochs) {
        CHECK(record.metric == "full");
    }
}

TEST_CASE("run_asp: full-data mode ignores the selection machinery") {
    RunConfig a = small_config(41);
    a.mode = RunMode::FullData;
    a.strategy = SelectionStrategy::Probabilistic;
    RunConfig b = a;
    b.strategy = SelectionStrategy::TopM;  // unused in this mode

    const RunOutput run_a = run_asp(a);
    const RunOutput run_b = run_asp(b);
    CHECK(run_log_epochs_csv(run_a.log) == run_log_epochs_csv(run_b.log));
    CHECK(run_a.model == run_b.model);
    for (const EpochRecord& record : run_a.log.epochs) {
        CHECK(record.m == run_a.memory.size());
        CHECK(record.metric == "full");
    }
}

TEST_CASE("run_asp: single epoch run") {
    RunConfig config = small_config(43);
    config.hyperparams.epochs = 1;
    const RunOutput output = run_asp(config);
    REQUIRE(output.log.epochs.size() == 1);
    CHECK(output.log.epochs[0].metric == "full");
    CHECK(output.log.epochs[0].m == output.memory.size());
}

TEST_CASE("run_asp: divergence ends with a partial log") {
    RunConfig config = small_config(47);
    config.mode = RunMode::FullData;
    config.hyperparams.epochs = 30;
    config.hyperparams.learning_rate = 1e5;
    config.hyperparams.weight_decay = 1e5;  // geometric parameter blow-up
    config.hyperparams.momentum = 0.0;

    const RunOutput output = run_asp(config);
    REQUIRE(output.log.diverged_at_epoch.has_value());
    const int at = *output.log.diverged_at_epoch;
    CHECK(at >= 0);
    CHECK(at < config.hyperparams.epochs);
    CHECK(output.log.epochs.size() == static_cast<std::size_t>(at));

    const std::string json = run_log_to_json_text(output.log);
    CHECK(json.find("\"diverged_at_epoch\"") != std::string::npos);
}

TEST_CASE("run_asp: coreset keeps one fixed subset") {
    RunConfig config = small_config(53);
    config.mode = RunMode::CoreSet;
    config.fixed_metric = MetricKind::Loss;
    config.ratio = 0.25;

    RunOptions options;
    options.log_active_sets = true;
    const Dataset dataset = build_dataset(config);
    const RunOutput output = run_asp(config, dataset, options);

    const std::size_t n = dataset.train_ids.size();
    const auto expected_m = static_cast<std::size_t>(std::llround(0.25 * static_cast<double>(n)));
    REQUIRE(output.log.active_sets.size() == output.log.epochs.size());
    for (const auto& ids : output.log.active_sets) {
        CHECK(ids == output.log.active_sets.front());
        CHECK(ids.size() == expected_m);
    }
    for (const EpochRecord& record : output.log.epochs) {
        CHECK(record.m == expected_m);
        CHECK(record.metric == "loss");
    }

    RunConfig bad = config;
    bad.fixed_metric.reset();
    try {
        run_asp(bad, dataset);
        FAIL("expected a throw");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Config);
        CHECK(err.field() == "metric");
    }
}

TEST_CASE("run_asp: active set logging and the hardness trace line up") {
    RunConfig config = small_config(59);
    config.ratio = 0.5;
    RunOptions options;
    options.log_active_sets = true;
    options.trace_metric = MetricKind::Loss;

    const Dataset dataset = build_dataset(config);
    const RunOutput output = run_asp(config, dataset, options);
    const std::set<SampleId> train(dataset.train_ids.begin(), dataset.train_ids.end());

    REQUIRE(output.log.active_sets.size() == output.log.epochs.size());
    REQUIRE(output.trace.per_epoch.size() == output.log.epochs.size());
    for (std::size_t e = 0; e < output.log.epochs.size(); ++e) {
        CHECK(output.log.active_sets[e].size() == output.log.epochs[e].m);
        for (const SampleId id : output.log.active_sets[e]) CHECK(train.count(id) == 1);
        CHECK(output.trace.per_epoch[e].size() == dataset.train_ids.size());
    }
}

TEST_CASE("train_epoch: wall time grows with the active-set size") {
    SyntheticSpec spec;
    spec.classes = 4;
    spec.per_class = 750;
    spec.dims = 16;
    spec.train_fraction = 1.0;
    spec.val_fraction = 0.0;
    const Dataset dataset = generate_synthetic(spec, 61);
    const std::size_t n = dataset.train_ids.size();

    HyperParams hp;
    hp.batch_size = 64;
    const std::vector<double> fractions = {0.1, 0.3, 0.5, 1.0};
    std::vector<double> medians;
    for (const double fraction : fractions) {
        const auto m = static_cast<std::size_t>(fraction * static_cast<double>(n));
        const std::vector<SampleId> active = iota_ids(m);
        std::vector<double> times;
        for (int rep = 0; rep < 3; ++rep) {
            Model model({ModelKind::MLP, dataset.dims, dataset.num_classes, 32}, 5);
            std::vector<double> momentum(model.param_count(), 0.0);
            Rng shuffle_rng(1), augment_rng(2);
            const auto start = std::chrono::steady_clock::now();
            train_epoch(model, momentum, dataset, active, hp, shuffle_rng, augment_rng, 0);
            times.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        std::sort(times.begin(), times.end());
        medians.push_back(times[1]);
    }
    // Course-grained: a tenth of the data must train measurably faster than
    // all of it; the middle sizes stay below the full-set time with slack.
    CHECK(medians[0] < medians[3]);
    CHECK(medians[1] < medians[3]);
    CHECK(medians[2] < medians[3] * 1.1);
}
