#include "asp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "asp/error.hpp"
#include "asp/io_util.hpp"
#include "asp/trainer.hpp"

namespace asp {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw_error(ErrorCode::InvalidArgument, "correlation inputs differ in length");
    if (a.size() < 2) throw_error(ErrorCode::InvalidArgument, "correlation needs >= 2 points");
    for (double v : a)
        if (!std::isfinite(v)) throw_error(ErrorCode::InvalidArgument, "non-finite input");
    for (double v : b)
        if (!std::isfinite(v)) throw_error(ErrorCode::InvalidArgument, "non-finite input");
    const auto constant = [](std::span<const double> x) {
        return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    };
    if (constant(a) || constant(b))
        throw_error(ErrorCode::DegenerateInput, "correlation input is constant");
}

// Pairs tied within consecutive equal-value runs of a sorted sequence.
std::int64_t tied_pairs(std::span<const double> sorted) {
    std::int64_t ties = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto run = static_cast<std::int64_t>(j - i);
        ties += run * (run - 1) / 2;
        i = j;
    }
    return ties;
}

// Merge sort counting strict inversions (pairs i < j with values[i] > values[j]).
std::int64_t count_inversions(std::vector<double>& values, std::vector<double>& scratch,
                              std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t inversions = count_inversions(values, scratch, lo, mid) +
                              count_inversions(values, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (values[i] <= values[j]) {
            scratch[k++] = values[i++];
        } else {
            inversions += static_cast<std::int64_t>(mid - i);
            scratch[k++] = values[j++];
        }
    }
    while (i < mid) scratch[k++] = values[i++];
    while (j < hi) scratch[k++] = values[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
              scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              values.begin() + static_cast<std::ptrdiff_t>(lo));
    return inversions;
}

}  // namespace

double kendall_tau(std::span<const double> a, std::span<const double> b) {
    check_pair(a, b);
    const std::size_t n = a.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (a[i] != a[j]) return a[i] < a[j];
        return b[i] < b[j];
    });

    // Tie counts in a and joint ties in (a, b), scanned over the sorted order.
    std::int64_t ties_a = 0, ties_ab = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i + 1;
            while (j < n && a[order[j]] == a[order[i]]) ++j;
            const auto run = static_cast<std::int64_t>(j - i);
            ties_a += run * (run - 1) / 2;
            std::size_t u = i;
            while (u < j) {
                std::size_t v = u + 1;
                while (v < j && b[order[v]] == b[order[u]]) ++v;
                const auto joint = static_cast<std::int64_t>(v - u);
                ties_ab += joint * (joint - 1) / 2;
                u = v;
            }
            i = j;
        }
    }

    // Discordant pairs: inversions of b once rows are sorted by (a, b).
    // Inside an equal-a block b is ascending, so only cross-block (strictly
    // ordered in a) pairs are counted.
    std::vector<double> b_sorted_by_a(n), scratch(n);
    for (std::size_t i = 0; i < n; ++i) b_sorted_by_a[i] = b[order[i]];
    const std::int64_t discordant = count_inversions(b_sorted_by_a, scratch, 0, n);

    std::vector<double> b_sorted(b.begin(), b.end());
    std::sort(b_sorted.begin(), b_sorted.end());
    const std::int64_t ties_b = tied_pairs(b_sorted);

    const auto n64 = static_cast<std::int64_t>(n);
    const std::int64_t total = n64 * (n64 - 1) / 2;
    if (ties_a == total || ties_b == total)
        throw_error(ErrorCode::DegenerateInput, "correlation input is constant");
    const std::int64_t con_minus_dis = total - ties_a - ties_b + ties_ab - 2 * discordant;
    const double denominator = std::sqrt(static_cast<double>(total - ties_a)) *
                               std::sqrt(static_cast<double>(total - ties_b));
    return std::clamp(static_cast<double>(con_minus_dis) / denominator, -1.0, 1.0);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    check_pair(a, b);
    const auto n = static_cast<double>(a.size());
    const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw_error(ErrorCode::DegenerateInput, "correlation input is constant");
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // 1-based ranks i+1 .. j averaged across the tie block.
        const double rank = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t u = i; u < j; ++u) ranks[order[u]] = rank;
        i = j;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    check_pair(a, b);
    return pearson(midranks(a), midranks(b));
}

std::vector<GridCell> correlation_grid_cells(const HyperParams& base) {
    const double smoothings[] = {0.0, 0.1};
    const double rates[] = {0.05, 0.1, 0.2};
    const double augments[] = {0.25, 0.5, 0.75};
    const double momenta[] = {0.8, 0.9};
    std::vector<GridCell> cells;
    cells.reserve(36);
    for (double ls : smoothings)
        for (double lr : rates)
            for (double ap : augments)
                for (double mom : momenta) {
                    GridCell cell;
                    cell.hyperparams = base;
                    cell.hyperparams.label_smoothing = ls;
                    cell.hyperparams.learning_rate = lr;
                    cell.hyperparams.augment_prob = ap;
                    cell.hyperparams.momentum = mom;
                    cell.id = "ls" + format_double(ls) + "_lr" + format_double(lr) + "_ap" +
                              format_double(ap) + "_mom" + format_double(mom);
                    cells.push_back(std::move(cell));
                }
    return cells;
}

namespace {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

struct GridTask {
    std::size_t ratio_index = 0;
    std::size_t config_index = 0;
    int seed_index = 0;
    RunConfig config;
};

struct TaskOutcome {
    bool ok = false;
    double test_accuracy = 0.0;
    std::string message;
};

// One grid run, resumed from `cache_dir` when a matching cache file exists.
// Success and divergence are both deterministic, so both are cached.
TaskOutcome execute_task(const GridTask& task, const std::filesystem::path& cache_dir,
                         std::size_t task_index) {
    const std::string config_text = run_config_to_json_text(task.config);
    const std::string cache_name = hex64(fnv1a64(config_text)) + ".json";
    const std::filesystem::path cache_file = cache_dir / cache_name;

    if (!cache_dir.empty()) {
        std::ifstream in(cache_file);
        if (in) {
            std::stringstream buffer;
            buffer << in.rdbuf();
            try {
                const auto cached = nlohmann::json::parse(buffer.str());
                TaskOutcome outcome;
                if (cached.contains("test_accuracy")) {
                    outcome.ok = true;
                    outcome.test_accuracy = cached.at("test_accuracy").get<double>();
                } else {
                    outcome.message = cached.at("error").get<std::string>();
                }
                return outcome;
            } catch (const nlohmann::json::exception&) {
                // Unreadable cache entry: fall through and recompute it.
            }
        }
    }

    TaskOutcome outcome;
    bool cacheable = true;
    try {
        const RunOutput output = run_asp(task.config);
        if (output.log.diverged_at_epoch) {
            outcome.message =
                "diverged at epoch " + std::to_string(*output.log.diverged_at_epoch);
        } else {
            outcome.ok = true;
            outcome.test_accuracy = output.log.final_test_accuracy;
        }
    } catch (const Error& err) {
        outcome.message = err.what();
        cacheable = false;  // could be transient (I/O etc.), leave uncached
    }

    if (!cache_dir.empty() && cacheable) {
        nlohmann::ordered_json entry;
        entry["config"] = nlohmann::ordered_json::parse(config_text);
        if (outcome.ok) {
            entry["test_accuracy"] = outcome.test_accuracy;
        } else {
            entry["error"] = outcome.message;
        }
        const std::filesystem::path tmp =
            cache_dir / (cache_name + ".tmp" + std::to_string(task_index));
        std::ofstream out(tmp);
        if (out) {
            out << entry.dump(2) << '\n';
            out.close();
            std::error_code ec;
            std::filesystem::rename(tmp, cache_file, ec);  // atomic publish; loss is harmless
        }
    }
    return outcome;
}

}  // namespace

GridResult run_grid(const RunConfig& base, const GridSpec& spec) {
    validate_run_config(base);
    if (spec.seeds_per_cell < 1) throw_error(ErrorCode::InvalidArgument, "seeds_per_cell must be >= 1");
    for (double r : spec.ratios) {
        if (!(r > 0.0 && r <= 1.0))
            throw_error(ErrorCode::InvalidArgument, "grid ratios must be in (0, 1]");
    }

    GridResult result;
    result.ratios = spec.ratios;
    result.ratios.push_back(1.0);
    std::sort(result.ratios.begin(), result.ratios.end());
    result.ratios.erase(std::unique(result.ratios.begin(), result.ratios.end()),
                        result.ratios.end());

    const std::vector<GridCell> cells = correlation_grid_cells(base.hyperparams);
    for (const GridCell& cell : cells) result.config_ids.push_back(cell.id);

    if (!spec.cache_dir.empty()) std::filesystem::create_directories(spec.cache_dir);

    std::vector<GridTask> tasks;
    tasks.reserve(result.ratios.size() * cells.size() *
                  static_cast<std::size_t>(spec.seeds_per_cell));
    for (std::size_t ri = 0; ri < result.ratios.size(); ++ri) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            for (int si = 0; si < spec.seeds_per_cell; ++si) {
                GridTask task;
                task.ratio_index = ri;
                task.config_index = ci;
                task.seed_index = si;
                task.config = base;
                task.config.hyperparams = cells[ci].hyperparams;
                task.config.ratio = result.ratios[ri];
                // Same training streams for a cell at every ratio; same data
                // for every cell at a seed index.
                task.config.seed = derive_seed(base.seed, "grid-run:" + cells[ci].id,
                                               static_cast<std::uint64_t>(si));
                task.config.data.seed =
                    derive_seed(base.seed, "grid-data", static_cast<std::uint64_t>(si));
                tasks.push_back(std::move(task));
            }
        }
    }

    std::vector<TaskOutcome> outcomes(tasks.size());
    const std::size_t workers = std::max<std::size_t>(1, spec.workers);
    if (workers == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t)
            outcomes[t] = execute_task(tasks[t], spec.cache_dir, t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= tasks.size()) return;
                    outcomes[t] = execute_task(tasks[t], spec.cache_dir, t);
                }
            });
        }
        for (std::thread& worker : pool) worker.join();
    }

    result.accuracy.assign(result.ratios.size(),
                           std::vector<double>(cells.size(), 0.0));
    std::vector<std::vector<int>> survivors(result.ratios.size(),
                                            std::vector<int>(cells.size(), 0));
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const GridTask& task = tasks[t];
        const TaskOutcome& outcome = outcomes[t];
        if (outcome.ok) {
            result.accuracy[task.ratio_index][task.config_index] += outcome.test_accuracy;
            ++survivors[task.ratio_index][task.config_index];
        } else {
            result.failures.push_back({result.config_ids[task.config_index],
                                       result.ratios[task.ratio_index], task.seed_index,
                                       outcome.message});
        }
    }
    for (std::size_t ri = 0; ri < result.ratios.size(); ++ri) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            if (survivors[ri][ci] > 0) {
                result.accuracy[ri][ci] /= survivors[ri][ci];
            } else {
                result.accuracy[ri][ci] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return result;
}

CorrelationTable correlate(const GridResult& result) {
    if (result.config_ids.size() < 2)
        throw_error(ErrorCode::InvalidArgument, "correlation needs >= 2 configs");
    const auto full_it = std::find(result.ratios.begin(), result.ratios.end(), 1.0);
    if (full_it == result.ratios.end())
        throw_error(ErrorCode::InvalidArgument, "grid result is missing the r = 1.0 column");
    const auto full_index = static_cast<std::size_t>(full_it - result.ratios.begin());

    CorrelationTable table;
    for (std::size_t ri = 0; ri < result.ratios.size(); ++ri) {
        CorrelationRow row;
        row.ratio = result.ratios[ri];
        std::vector<double> at_ratio, at_full;
        for (std::size_t ci = 0; ci < result.config_ids.size(); ++ci) {
            const double x = result.accuracy[ri][ci];
            const double y = result.accuracy[full_index][ci];
            if (std::isnan(x) || std::isnan(y)) continue;
            at_ratio.push_back(x);
            at_full.push_back(y);
        }
        row.configs_used = at_ratio.size();
        if (ri == full_index) {
            // Self-comparison row: 1 by definition.
            row.tau = row.rho = row.spearman = 1.0;
        } else if (at_ratio.size() < 2) {
            row.tau = row.rho = row.spearman = std::numeric_limits<double>::quiet_NaN();
            row.note = "fewer than 2 valid configs";
        } else {
            try {
                row.tau = kendall_tau(at_ratio, at_full);
                row.rho = pearson(at_ratio, at_full);
                row.spearman = spearman(at_ratio, at_full);
            } catch (const Error& err) {
                row.tau = row.rho = row.spearman = std::numeric_limits<double>::quiet_NaN();
                row.note = err.what();
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace asp
