// Command-line front door: dataset generation, single runs, hyperparameter
// grids, ranking-correlation reports, hardness reports, schedule dumps.
// Artifacts land in --out-dir; stdout lists what was written, logs go to
// stderr (level via ASP_LOG_LEVEL).

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asp/analysis.hpp"
#include "asp/artifacts.hpp"
#include "asp/config.hpp"
#include "asp/error.hpp"
#include "asp/log.hpp"
#include "asp/trainer.hpp"

namespace fs = std::filesystem;
using namespace asp;

namespace {

struct Options {
    std::string config_path;
    fs::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> ratio;
    std::optional<std::string> schedule;
    std::optional<std::string> metric;
    std::optional<std::string> strategy;
    std::optional<std::string> mode;
    std::size_t workers = 0;  // grid/correlate only; 0 = hardware default
};

void add_common_flags(CLI::App& cmd, Options& options) {
    cmd.add_option("--config", options.config_path, "Run configuration JSON file");
    cmd.add_option("--seed", options.seed, "Override the run seed");
    cmd.add_option("--out-dir", options.out_dir, "Directory for output artifacts")
        ->capture_default_str();
}

void add_override_flags(CLI::App& cmd, Options& options) {
    cmd.add_option("--ratio", options.ratio, "Override the proxy budget, in (0, 1]");
    cmd.add_option("--schedule", options.schedule, "Override the ratio schedule")
        ->check(CLI::IsMember({"static", "dynamic"}));
    cmd.add_option("--metric", options.metric,
                   "Override the importance metric; 'mixture' re-enables scheduling")
        ->check(CLI::IsMember({"random", "gradient", "loss", "entropy", "prediction", "mixture"}));
    cmd.add_option("--strategy", options.strategy, "Override the selection strategy")
        ->check(CLI::IsMember({"prob", "topm"}));
    cmd.add_option("--mode", options.mode, "Override the run mode")
        ->check(CLI::IsMember({"asp", "full", "coreset"}));
}

// File config (or defaults) with the flag overrides applied, re-validated so
// flag values go through the same checks as file values.
RunConfig effective_config(const Options& options) {
    RunConfig config =
        options.config_path.empty() ? RunConfig{} : load_run_config(options.config_path);
    if (options.seed) config.seed = *options.seed;
    if (options.ratio) config.ratio = *options.ratio;
    if (options.schedule) config.schedule_mode = ratio_mode_from_string(*options.schedule);
    if (options.metric) {
        if (*options.metric == "mixture")
            config.fixed_metric.reset();
        else
            config.fixed_metric = metric_kind_from_string(*options.metric);
    }
    if (options.strategy) config.strategy = selection_strategy_from_string(*options.strategy);
    if (options.mode) config.mode = run_mode_from_string(*options.mode);
    validate_run_config(config);
    return config;
}

void emit(const fs::path& path, const std::string& text) {
    write_text_file(path, text);
    std::printf("%s\n", path.string().c_str());
}

std::string dataset_csv(const Dataset& dataset) {
    std::string text;
    for (std::size_t j = 0; j < dataset.dims; ++j) text += "f" + std::to_string(j) + ",";
    text += "label,split\n";
    std::vector<const char*> split_of(dataset.size(), nullptr);
    for (const SampleId id : dataset.train_ids) split_of[id] = "train";
    for (const SampleId id : dataset.val_ids) split_of[id] = "val";
    for (const SampleId id : dataset.test_ids) split_of[id] = "test";
    char cell[64];
    for (SampleId id = 0; id < dataset.size(); ++id) {
        for (const double v : dataset.features_of(id)) {
            std::snprintf(cell, sizeof cell, "%.17g,", v);
            text += cell;
        }
        text += std::to_string(dataset.label_of(id));
        text += ",";
        text += split_of[id];
        text += "\n";
    }
    return text;
}

int run_generate_data(const Options& options) {
    const RunConfig config = effective_config(options);
    const Dataset dataset = build_dataset(config);
    log_info("generated " + std::to_string(dataset.size()) + " samples, dims " +
             std::to_string(dataset.dims) + ", classes " + std::to_string(dataset.num_classes));
    emit(options.out_dir / "dataset.csv", dataset_csv(dataset));
    return 0;
}

int run_train(const Options& options) {
    const RunConfig config = effective_config(options);
    const RunOutput output = run_asp(config);
    log_info("final val " + std::to_string(output.log.final_val_accuracy) + ", test " +
             std::to_string(output.log.final_test_accuracy));
    emit(options.out_dir / "run.json", run_log_to_json_text(output.log));
    emit(options.out_dir / "epochs.csv", run_log_epochs_csv(output.log));
    return 0;
}

GridResult run_grid_command(const Options& options, const RunConfig& base) {
    GridSpec spec;
    if (options.workers > 0) spec.workers = options.workers;
    spec.cache_dir = options.out_dir / "grid-cache";
    const GridResult grid = run_grid(base, spec);
    emit(options.out_dir / "grid.json", grid_result_to_json_text(grid));
    emit(options.out_dir / "grid.csv", grid_result_csv(grid));
    return grid;
}

int run_grid_only(const Options& options) {
    run_grid_command(options, effective_config(options));
    return 0;
}

int run_correlate(const Options& options) {
    const GridResult grid = run_grid_command(options, effective_config(options));
    const CorrelationTable table = correlate(grid);
    emit(options.out_dir / "correlation.json", correlation_table_to_json_text(table));
    emit(options.out_dir / "correlation.csv", correlation_table_csv(table));
    return 0;
}

int run_hardness(const Options& options) {
    const RunConfig config = effective_config(options);
    const Dataset dataset = build_dataset(config);
    RunOptions run_options;
    // Trace whichever metric drives selection; under mixture scheduling the
    // loss trace is the canonical hardness signal.
    run_options.trace_metric = config.fixed_metric.value_or(MetricKind::Loss);
    const RunOutput output = run_asp(config, dataset, run_options);
    const auto ranking = mean_importance_report(output.trace.per_epoch);
    emit(options.out_dir / "hardness.csv", hardness_csv(ranking, dataset.train_ids));
    emit(options.out_dir / "importance_trace.csv",
         importance_trace_csv(output.trace, dataset.train_ids));
    return 0;
}

int run_schedule_dump(const Options& options) {
    const RunConfig config = effective_config(options);
    const Dataset dataset = build_dataset(config);
    emit(options.out_dir / "schedule.csv",
         schedule_table_csv(config, dataset.train_ids.size()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-time proxy-subset selection toolkit"};
    app.name("asp");
    app.require_subcommand(1);
    Options options;

    CLI::App* generate = app.add_subcommand("generate-data", "Write the configured dataset as CSV");
    add_common_flags(*generate, options);

    CLI::App* train = app.add_subcommand("train", "Run one training configuration");
    add_common_flags(*train, options);
    add_override_flags(*train, options);

    CLI::App* grid = app.add_subcommand("grid", "Train the hyperparameter lattice at each budget");
    add_common_flags(*grid, options);
    add_override_flags(*grid, options);
    grid->add_option("--workers", options.workers, "Concurrent grid runs (0 = hardware)");

    CLI::App* correlate_cmd =
        app.add_subcommand("correlate", "Grid plus rank-correlation table against the full budget");
    add_common_flags(*correlate_cmd, options);
    add_override_flags(*correlate_cmd, options);
    correlate_cmd->add_option("--workers", options.workers, "Concurrent grid runs (0 = hardware)");

    CLI::App* hardness = app.add_subcommand("hardness", "Rank samples by mean importance");
    add_common_flags(*hardness, options);
    add_override_flags(*hardness, options);

    CLI::App* schedule =
        app.add_subcommand("schedule-dump", "Epoch table of subset sizes and metric probabilities");
    add_common_flags(*schedule, options);
    add_override_flags(*schedule, options);

    try {
        app.parse(argc, argv);
        if (generate->parsed()) return run_generate_data(options);
        if (train->parsed()) return run_train(options);
        if (grid->parsed()) return run_grid_only(options);
        if (correlate_cmd->parsed()) return run_correlate(options);
        if (hardness->parsed()) return run_hardness(options);
        if (schedule->parsed()) return run_schedule_dump(options);
        return 2;
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& error) {
        app.exit(error);  // prints the usage hint
        return 2;
    } catch (const Error& error) {
        nlohmann::json report = {{"error", std::string(to_string(error.code()))},
                                 {"message", error.what()}};
        if (!error.field().empty()) report["field"] = error.field();
        std::fprintf(stderr, "%s\n", report.dump().c_str());
        return error.code() == ErrorCode::Config ? 3 : 1;
    } catch (const std::exception& error) {
        const nlohmann::json report = {{"error", "internal"}, {"message", error.what()}};
        std::fprintf(stderr, "%s\n", report.dump().c_str());
        return 1;
    }
}
