#include <doctest.h>

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "asp/config.hpp"
#include "asp/error.hpp"
#include "test_util.hpp"

using namespace asp;

namespace {

// Parse text expected to fail and hand back the offending field path.
std::string rejected_field(const std::string& text) {
    try {
        run_config_from_json_text(text);
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Config);
        return err.field();
    }
    FAIL("expected a config error for: " << text);
    return {};
}

}  // namespace

TEST_CASE("run config: empty object means defaults") {
    const RunConfig parsed = run_config_from_json_text("{}");
    CHECK(parsed == RunConfig{});
    CHECK(!parsed.fixed_metric.has_value());
    CHECK(!parsed.data.seed.has_value());
    CHECK(parsed.data_seed() == parsed.seed);
}

TEST_CASE("run config: serialization round trips and is idempotent") {
    const RunConfig defaults;
    const std::string text = run_config_to_json_text(defaults);
    CHECK(run_config_from_json_text(text) == defaults);
    CHECK(run_config_to_json_text(run_config_from_json_text(text)) == text);

    RunConfig custom;
    custom.seed = 42;
    custom.mode = RunMode::CoreSet;
    custom.strategy = SelectionStrategy::TopM;
    custom.fixed_metric = MetricKind::Entropy;
    custom.mixture.order = {2, 0, 1};
    custom.mixture.sigma = 7.5;
    custom.schedule_mode = RatioMode::Static;
    custom.ratio = 0.25;
    custom.model_kind = ModelKind::MLP;
    custom.hidden_units = 5;
    custom.hyperparams.learning_rate = 0.01;
    custom.hyperparams.momentum = 0.5;
    custom.hyperparams.weight_decay = 1e-4;
    custom.hyperparams.label_smoothing = 0.05;
    custom.hyperparams.augment_prob = 0.75;
    custom.hyperparams.batch_size = 3;
    custom.hyperparams.epochs = 21;
    custom.data.source = "csv";
    custom.data.seed = 9;
    custom.data.csv_path = "table.csv";
    custom.data.csv.label_column = "target";
    custom.data.csv.split_column = "fold";
    custom.data.csv.train_fraction = 0.6;
    custom.data.csv.val_fraction = 0.2;
    custom.data.csv.standardize = false;
    custom.data.synthetic.classes = 3;
    custom.data.synthetic.per_class = 17;
    custom.data.synthetic.dims = 6;
    custom.data.synthetic.overlap = 2.0;
    custom.data.synthetic.label_noise = 0.2;
    custom.data.idx_images = "imgs.idx";
    custom.data.idx_labels = "lbls.idx";
    custom.data.idx.val_fraction = 0.3;

    const std::string custom_text = run_config_to_json_text(custom);
    const RunConfig reparsed = run_config_from_json_text(custom_text);
    CHECK(reparsed == custom);
    CHECK(reparsed.data_seed() == 9);
    CHECK(run_config_to_json_text(reparsed) == custom_text);
}

TEST_CASE("run config: metric accepts names or the mixture") {
    CHECK(!run_config_from_json_text(R"({"metric": "mixture"})").fixed_metric.has_value());
    CHECK(run_config_from_json_text(R"({"metric": "loss"})").fixed_metric == MetricKind::Loss);
    CHECK(run_config_from_json_text(R"({"metric": "prediction"})").fixed_metric ==
          MetricKind::Prediction);
}

TEST_CASE("run config: rejects malformed documents") {
    try {
        run_config_from_json_text("{not json");
        FAIL("expected a throw");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Config);
        CHECK(err.field().empty());
        CHECK(std::string(err.what()).find("invalid JSON") != std::string::npos);
    }
    CHECK(rejected_field("[1, 2]") == "");
}

TEST_CASE("run config: field paths in rejections") {
    const std::vector<std::pair<std::string, std::string>> cases = {
        // unknown keys
        {R"({"bogus": 1})", "bogus"},
        {R"({"hyperparams": {"lr": 0.1}})", "hyperparams.lr"},
        {R"({"mixture": {"shape": 1}})", "mixture.shape"},
        {R"({"data": {"synthetic": {"bogus": true}}})", "data.synthetic.bogus"},
        // wrong types
        {R"({"seed": -5})", "seed"},
        {R"({"schedule": "static"})", "schedule"},
        {R"({"hyperparams": {"momentum": "fast"}})", "hyperparams.momentum"},
        {R"({"hyperparams": {"epochs": 1.5}})", "hyperparams.epochs"},
        {R"({"hyperparams": {"batch_size": -1}})", "hyperparams.batch_size"},
        {R"({"data": {"seed": -1}})", "data.seed"},
        {R"({"data": {"synthetic": {"standardize": "yes"}}})", "data.synthetic.standardize"},
        {R"({"mixture": {"order": [0, 1]}})", "mixture.order"},
        {R"({"mixture": {"order": [0, 1, "x"]}})", "mixture.order"},
        // unrecognized enum values
        {R"({"mode": "turbo"})", "mode"},
        {R"({"strategy": "best"})", "strategy"},
        {R"({"metric": "entropyy"})", "metric"},
        {R"({"schedule": {"mode": "linear"}})", "schedule.mode"},
        {R"({"model": {"kind": "cnn"}})", "model.kind"},
        // out-of-range values
        {R"({"schedule": {"ratio": 0}})", "schedule.ratio"},
        {R"({"schedule": {"ratio": 1.5}})", "schedule.ratio"},
        {R"({"mixture": {"order": [0, 0, 1]}})", "mixture.order"},
        {R"({"mixture": {"sigma": -0.5}})", "mixture.sigma"},
        {R"({"model": {"kind": "mlp", "hidden_units": 0}})", "model.hidden_units"},
        {R"({"hyperparams": {"learning_rate": 0}})", "hyperparams.learning_rate"},
        {R"({"hyperparams": {"momentum": 1.0}})", "hyperparams.momentum"},
        {R"({"hyperparams": {"weight_decay": -1}})", "hyperparams.weight_decay"},
        {R"({"hyperparams": {"label_smoothing": 1.0}})", "hyperparams.label_smoothing"},
        {R"({"hyperparams": {"augment_prob": 1.5}})", "hyperparams.augment_prob"},
        {R"({"hyperparams": {"batch_size": 0}})", "hyperparams.batch_size"},
        {R"({"hyperparams": {"epochs": 0}})", "hyperparams.epochs"},
        {R"({"data": {"synthetic": {"classes": 1}}})", "data.synthetic.classes"},
        {R"({"data": {"synthetic": {"per_class": 0}}})", "data.synthetic.per_class"},
        {R"({"data": {"synthetic": {"classes": 4, "dims": 3}}})", "data.synthetic.dims"},
        {R"({"data": {"synthetic": {"overlap": -1}}})", "data.synthetic.overlap"},
        {R"({"data": {"synthetic": {"label_noise": 0.5}}})", "data.synthetic.label_noise"},
        {R"({"data": {"synthetic": {"train_fraction": 0}}})", "data.synthetic.train_fraction"},
        {R"({"data": {"synthetic": {"train_fraction": 0.9, "val_fraction": 0.2}}})",
         "data.synthetic.val_fraction"},
        // cross-field / source requirements
        {R"({"mode": "coreset"})", "metric"},
        {R"({"data": {"source": "parquet"}})", "data.source"},
        {R"({"data": {"source": "csv"}})", "data.csv.path"},
        {R"({"data": {"source": "idx", "idx": {"images": "x"}}})", "data.idx.labels"},
    };
    for (const auto& [text, field] : cases) {
        CAPTURE(text);
        CHECK(rejected_field(text) == field);
    }
}

TEST_CASE("run config: validate checks constructed configs too") {
    RunConfig config;
    config.ratio = 0.0;
    CHECK_THROWS_AS(validate_run_config(config), Error);
    config.ratio = 1.0;
    CHECK_NOTHROW(validate_run_config(config));
    config.mode = RunMode::CoreSet;
    try {
        validate_run_config(config);
        FAIL("expected a throw");
    } catch (const Error& err) {
        CHECK(err.field() == "metric");
    }
    config.fixed_metric = MetricKind::Loss;
    CHECK_NOTHROW(validate_run_config(config));
}

TEST_CASE("run config: file loading") {
    TempDir dir;
    RunConfig config;
    config.seed = 77;
    config.hyperparams.epochs = 4;
    const auto path = dir / "run.json";
    {
        std::ofstream out(path);
        out << run_config_to_json_text(config);
    }
    CHECK(load_run_config(path) == config);

    try {
        load_run_config(dir / "absent.json");
        FAIL("expected a throw");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Io);
    }
}

TEST_CASE("build_dataset: synthetic source uses the data seed") {
    RunConfig config;
    config.seed = 5;
    config.data.synthetic.classes = 2;
    config.data.synthetic.per_class = 10;
    config.data.synthetic.dims = 2;
    const Dataset by_run_seed = build_dataset(config);
    CHECK(by_run_seed.size() == 20);

    config.data.seed = 5;  // same stream, explicitly
    const Dataset pinned = build_dataset(config);
    CHECK(pinned.features == by_run_seed.features);

    config.data.seed = 6;
    CHECK(build_dataset(config).features != by_run_seed.features);
}
