#include "asp/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "asp/error.hpp"
#include "asp/io_util.hpp"

namespace asp {

namespace {

using Json = nlohmann::ordered_json;

Json number_or_null(double value) {
    if (std::isnan(value)) return nullptr;
    return value;
}

}  // namespace

std::string run_log_to_json_text(const RunLog& log) {
    Json root;
    root["config"] = Json::parse(run_config_to_json_text(log.config));
    Json epochs = Json::array();
    for (const EpochRecord& record : log.epochs) {
        Json row;
        row["epoch"] = record.epoch;
        row["metric"] = record.metric;
        row["m"] = record.m;
        row["train_loss"] = record.train_loss;
        row["val_accuracy"] = record.val_accuracy;
        row["test_accuracy"] = record.test_accuracy;
        row["wall_seconds"] = record.wall_seconds;
        epochs.push_back(std::move(row));
    }
    root["epochs"] = std::move(epochs);
    Json final_metrics;
    final_metrics["val_accuracy"] = log.final_val_accuracy;
    final_metrics["test_accuracy"] = log.final_test_accuracy;
    root["final"] = std::move(final_metrics);
    if (log.diverged_at_epoch) root["diverged_at_epoch"] = *log.diverged_at_epoch;
    if (!log.active_sets.empty()) {
        Json sets = Json::array();
        for (const auto& ids : log.active_sets) sets.push_back(ids);
        root["active_sets"] = std::move(sets);
    }
    Json wall;
    wall["total_seconds"] = log.total_wall_seconds;
    root["wall"] = std::move(wall);
    return root.dump(2) + "\n";
}

std::string run_log_epochs_csv(const RunLog& log) {
    std::string out = "epoch,metric,m,train_loss,val_accuracy,test_accuracy\n";
    for (const EpochRecord& record : log.epochs) {
        out += std::to_string(record.epoch);
        out += ',';
        out += record.metric;
        out += ',';
        out += std::to_string(record.m);
        out += ',';
        out += format_double(record.train_loss);
        out += ',';
        out += format_double(record.val_accuracy);
        out += ',';
        out += format_double(record.test_accuracy);
        out += '\n';
    }
    return out;
}

std::string strip_volatile(const std::string& run_log_json_text) {
    Json root;
    try {
        root = Json::parse(run_log_json_text);
    } catch (const Json::parse_error& e) {
        throw_error(ErrorCode::Parse, std::string("invalid run log JSON: ") + e.what());
    }
    root.erase("wall");
    if (root.contains("epochs")) {
        for (Json& row : root["epochs"]) row.erase("wall_seconds");
    }
    return root.dump(2) + "\n";
}

std::string grid_result_to_json_text(const GridResult& result) {
    Json root;
    root["ratios"] = result.ratios;
    root["config_ids"] = result.config_ids;
    Json accuracy = Json::array();
    for (const auto& row : result.accuracy) {
        Json cells = Json::array();
        for (double v : row) cells.push_back(number_or_null(v));
        accuracy.push_back(std::move(cells));
    }
    root["accuracy"] = std::move(accuracy);
    Json failures = Json::array();
    for (const GridFailure& failure : result.failures) {
        Json row;
        row["config_id"] = failure.config_id;
        row["ratio"] = failure.ratio;
        row["seed_index"] = failure.seed_index;
        row["message"] = failure.message;
        failures.push_back(std::move(row));
    }
    root["failures"] = std::move(failures);
    return root.dump(2) + "\n";
}

std::string grid_result_csv(const GridResult& result) {
    std::string out = "ratio,config_id,test_accuracy\n";
    for (std::size_t ri = 0; ri < result.ratios.size(); ++ri) {
        for (std::size_t ci = 0; ci < result.config_ids.size(); ++ci) {
            out += format_double(result.ratios[ri]);
            out += ',';
            out += result.config_ids[ci];
            out += ',';
            const double v = result.accuracy[ri][ci];
            out += std::isnan(v) ? "" : format_double(v);
            out += '\n';
        }
    }
    return out;
}

std::string correlation_table_to_json_text(const CorrelationTable& table) {
    Json rows = Json::array();
    for (const CorrelationRow& row : table.rows) {
        Json r;
        r["ratio"] = row.ratio;
        r["tau"] = number_or_null(row.tau);
        r["rho"] = number_or_null(row.rho);
        r["spearman"] = number_or_null(row.spearman);
        r["configs_used"] = row.configs_used;
        r["note"] = row.note;
        rows.push_back(std::move(r));
    }
    Json root;
    root["rows"] = std::move(rows);
    return root.dump(2) + "\n";
}

std::string correlation_table_csv(const CorrelationTable& table) {
    std::string out = "ratio,tau,rho,spearman,configs_used,note\n";
    for (const CorrelationRow& row : table.rows) {
        out += format_double(row.ratio);
        out += ',';
        out += std::isnan(row.tau) ? "" : format_double(row.tau);
        out += ',';
        out += std::isnan(row.rho) ? "" : format_double(row.rho);
        out += ',';
        out += std::isnan(row.spearman) ? "" : format_double(row.spearman);
        out += ',';
        out += std::to_string(row.configs_used);
        out += ',';
        out += row.note;
        out += '\n';
    }
    return out;
}

std::string hardness_csv(std::span<const RankedImportance> ranking,
                         std::span<const SampleId> local_to_global) {
    std::string out = "rank,sample_id,mean_importance\n";
    for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
        const RankedImportance& row = ranking[rank];
        out += std::to_string(rank + 1);
        out += ',';
        out += std::to_string(local_to_global[row.id]);
        out += ',';
        out += format_double(row.mean_value);
        out += '\n';
    }
    return out;
}

std::string importance_trace_csv(const HardnessTrace& trace,
                                 std::span<const SampleId> local_to_global) {
    std::string out = "epoch,sample_id,importance\n";
    for (std::size_t e = 0; e < trace.per_epoch.size(); ++e) {
        const std::vector<double>& values = trace.per_epoch[e];
        for (std::size_t i = 0; i < values.size(); ++i) {
            out += std::to_string(e);
            out += ',';
            out += std::to_string(local_to_global[i]);
            out += ',';
            out += format_double(values[i]);
            out += '\n';
        }
    }
    return out;
}

std::string schedule_table_csv(const RunConfig& config, std::size_t train_size) {
    const int total_epochs = config.hyperparams.epochs;
    const RatioSchedule schedule{config.schedule_mode, config.ratio, total_epochs};
    const MetricMixture mixture =
        config.mixture.sigma > 0.0
            ? MetricMixture{config.mixture.order, config.mixture.sigma, total_epochs}
            : MetricMixture::with_defaults(total_epochs, config.mixture.order);

    std::string out = "epoch,ratio,m,p_random,p_gradient,p_loss,p_entropy,p_prediction\n";
    for (int e = 0; e < total_epochs; ++e) {
        std::array<double, kMetricKindCount> probabilities{};
        if (config.fixed_metric) {
            probabilities[static_cast<std::size_t>(*config.fixed_metric)] = 1.0;
        } else {
            probabilities = metric_probabilities(mixture, e);
        }
        out += std::to_string(e);
        out += ',';
        out += format_double(scheduled_ratio(schedule, e));
        out += ',';
        out += std::to_string(proxy_size(schedule, e, train_size));
        for (MetricKind kind : kAllMetricKinds) {
            out += ',';
            out += format_double(probabilities[static_cast<std::size_t>(kind)]);
        }
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation anywhere
    if (!out) throw_error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw_error(ErrorCode::Io, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace asp
