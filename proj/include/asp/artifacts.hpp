#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "asp/analysis.hpp"
#include "asp/proxy_memory.hpp"
#include "asp/scheduler.hpp"
#include "asp/trainer.hpp"

namespace asp {

// Serialized artifacts are deterministic given the run seeds, except for wall
// times, which sit under dedicated keys ("wall" at the top level and
// "wall_seconds" per epoch record) so byte comparisons can strip them.

std::string run_log_to_json_text(const RunLog& log);
std::string run_log_epochs_csv(const RunLog& log);  // no wall-time column

// Canonical form of a run-log JSON text with the volatile keys removed.
std::string strip_volatile(const std::string& run_log_json_text);

std::string grid_result_to_json_text(const GridResult& result);
std::string grid_result_csv(const GridResult& result);
std::string correlation_table_to_json_text(const CorrelationTable& table);
std::string correlation_table_csv(const CorrelationTable& table);

// Hardness report: ranking rows as rank,sample_id,mean_importance with local
// ids translated to global ones, and the epoch-by-epoch trace behind it.
std::string hardness_csv(std::span<const RankedImportance> ranking,
                         std::span<const SampleId> local_to_global);
std::string importance_trace_csv(const HardnessTrace& trace,
                                 std::span<const SampleId> local_to_global);

// Full epoch table of one run configuration: the scheduled subset size plus
// the metric distribution (a fixed metric is a one-hot column set).
std::string schedule_table_csv(const RunConfig& config, std::size_t train_size);

// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace asp
