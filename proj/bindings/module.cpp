#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <string>
#include <vector>

#include "asp/analysis.hpp"
#include "asp/artifacts.hpp"
#include "asp/config.hpp"
#include "asp/error.hpp"
#include "asp/rng.hpp"
#include "asp/scheduler.hpp"
#include "asp/selector.hpp"
#include "asp/trainer.hpp"

namespace py = pybind11;
using namespace asp;

PYBIND11_MODULE(_asp, m) {
    m.doc() = "Training-time proxy-subset selection core";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const asp::Error& e) {
            if (e.code() == asp::ErrorCode::Config || e.code() == asp::ErrorCode::Parse) {
                PyErr_SetString(PyExc_ValueError, e.what());
            } else {
                PyErr_SetString(PyExc_RuntimeError, e.what());
            }
        }
    });

    m.def(
        "default_config", [] { return run_config_to_json_text(RunConfig{}); },
        "Fully-populated default run configuration as JSON text");

    m.def(
        "validate_config",
        [](const std::string& text) {
            return run_config_to_json_text(run_config_from_json_text(text));
        },
        py::arg("config_json"), "Parse and validate; returns the normalized echo");

    m.def(
        "train",
        [](const std::string& config_json) {
            const RunOutput output = run_asp(run_config_from_json_text(config_json));
            return run_log_to_json_text(output.log);
        },
        py::arg("config_json"), py::call_guard<py::gil_scoped_release>(),
        "Run one configuration end to end; returns the run-log JSON");

    m.def(
        "grid",
        [](const std::string& config_json, const std::string& cache_dir, std::size_t workers) {
            GridSpec spec;
            if (!cache_dir.empty()) spec.cache_dir = cache_dir;
            if (workers > 0) spec.workers = workers;
            const GridResult grid = run_grid(run_config_from_json_text(config_json), spec);
            return grid_result_to_json_text(grid);
        },
        py::arg("config_json"), py::arg("cache_dir") = "", py::arg("workers") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Hyperparameter lattice at each budget; returns the grid JSON");

    m.def(
        "grid_correlation",
        [](const std::string& config_json, const std::string& cache_dir, std::size_t workers) {
            GridSpec spec;
            if (!cache_dir.empty()) spec.cache_dir = cache_dir;
            if (workers > 0) spec.workers = workers;
            const GridResult grid = run_grid(run_config_from_json_text(config_json), spec);
            return correlation_table_to_json_text(correlate(grid));
        },
        py::arg("config_json"), py::arg("cache_dir") = "", py::arg("workers") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Grid plus rank correlations against the full budget, as JSON");

    m.def(
        "scheduled_ratio",
        [](const std::string& mode, double r, int total_epochs, int epoch) {
            return scheduled_ratio({ratio_mode_from_string(mode), r, total_epochs}, epoch);
        },
        py::arg("mode"), py::arg("r"), py::arg("total_epochs"), py::arg("epoch"));

    m.def(
        "proxy_size",
        [](const std::string& mode, double r, int total_epochs, int epoch, std::size_t n) {
            return proxy_size({ratio_mode_from_string(mode), r, total_epochs}, epoch, n);
        },
        py::arg("mode"), py::arg("r"), py::arg("total_epochs"), py::arg("epoch"), py::arg("n"));

    m.def(
        "metric_probabilities",
        [](int total_epochs, int epoch, std::array<int, 3> order, double sigma) {
            MetricMixture mixture = MetricMixture::with_defaults(total_epochs, order);
            if (sigma > 0.0) mixture.sigma = sigma;
            const auto p = metric_probabilities(mixture, epoch);
            return std::vector<double>(p.begin(), p.end());
        },
        py::arg("total_epochs"), py::arg("epoch"), py::arg("order") = std::array<int, 3>{0, 1, 2},
        py::arg("sigma") = 0.0,
        "Distribution over [random, gradient, loss, entropy, prediction] at one epoch");

    m.def(
        "sampling_probabilities",
        [](const std::vector<double>& values) {
            return sampling_probabilities(values);
        },
        py::arg("values"));

    m.def(
        "select",
        [](const std::vector<double>& values, std::size_t m_, const std::string& strategy,
           std::uint64_t seed, int epoch) {
            Rng rng(seed);
            return select_proxy(values, m_, selection_strategy_from_string(strategy), rng, epoch)
                .ids;
        },
        py::arg("values"), py::arg("m"), py::arg("strategy") = "prob", py::arg("seed") = 0,
        py::arg("epoch") = 0, "Draw a proxy set; returns sorted sample ids");

    m.def(
        "kendall_tau",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return kendall_tau(a, b);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "spearman",
        [](const std::vector<double>& a, const std::vector<double>& b) { return spearman(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "pearson",
        [](const std::vector<double>& a, const std::vector<double>& b) { return pearson(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "midranks",
        [](const std::vector<double>& values) { return midranks(values); }, py::arg("values"));
}
