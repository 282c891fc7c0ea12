#include "asp/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "asp/error.hpp"

namespace asp {

namespace {

using Json = nlohmann::ordered_json;

std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) known = known || it.key() == key;
        if (!known) throw_config_error(join(path, it.key().c_str()), "unknown key");
    }
}

const Json* find(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_double(const Json& obj, const std::string& path, const char* key, double fallback) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) throw_config_error(join(path, key), "expected a number");
    return v->get<double>();
}

std::uint64_t get_u64(const Json& obj, const std::string& path, const char* key,
                      std::uint64_t fallback) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
        throw_config_error(join(path, key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
}

int get_int(const Json& obj, const std::string& path, const char* key, int fallback) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw_config_error(join(path, key), "expected an integer");
    return v->get<int>();
}

std::size_t get_size(const Json& obj, const std::string& path, const char* key,
                     std::size_t fallback) {
    return static_cast<std::size_t>(get_u64(obj, path, key, fallback));
}

bool get_bool(const Json& obj, const std::string& path, const char* key, bool fallback) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw_config_error(join(path, key), "expected true or false");
    return v->get<bool>();
}

std::string get_string(const Json& obj, const std::string& path, const char* key,
                       const std::string& fallback) {
    const Json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) throw_config_error(join(path, key), "expected a string");
    return v->get<std::string>();
}

const Json& get_object(const Json& obj, const std::string& path, const char* key) {
    static const Json empty = Json::object();
    const Json* v = find(obj, key);
    if (!v) return empty;
    if (!v->is_object()) throw_config_error(join(path, key), "expected an object");
    return *v;
}

template <typename Fn>
auto parse_enum(const std::string& path, const char* key, Fn&& from_string, const std::string& text) {
    try {
        return from_string(text);
    } catch (const Error&) {
        throw_config_error(join(path, key), "unrecognized value '" + text + "'");
    }
}

void parse_fractions(const Json& obj, const std::string& path, double& train_fraction,
                     double& val_fraction) {
    train_fraction = get_double(obj, path, "train_fraction", train_fraction);
    val_fraction = get_double(obj, path, "val_fraction", val_fraction);
}

}  // namespace

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Asp: return "asp";
        case RunMode::FullData: return "full";
        case RunMode::CoreSet: return "coreset";
    }
    throw_error(ErrorCode::InvalidArgument, "unknown run mode");
}

RunMode run_mode_from_string(std::string_view name) {
    if (name == "asp") return RunMode::Asp;
    if (name == "full") return RunMode::FullData;
    if (name == "coreset") return RunMode::CoreSet;
    throw_error(ErrorCode::Parse, "unknown run mode: " + std::string(name));
}

RunConfig run_config_from_json_text(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw_config_error("", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw_config_error("", "config root must be an object");
    check_keys(root, "", {"seed", "mode", "strategy", "metric", "mixture", "schedule", "model",
                          "hyperparams", "data"});

    RunConfig config;
    config.seed = get_u64(root, "", "seed", config.seed);
    config.mode = parse_enum("", "mode", run_mode_from_string, get_string(root, "", "mode", "asp"));
    config.strategy = parse_enum("", "strategy", selection_strategy_from_string,
                                 get_string(root, "", "strategy", "prob"));

    const std::string metric = get_string(root, "", "metric", "mixture");
    if (metric == "mixture") {
        config.fixed_metric.reset();
    } else {
        config.fixed_metric = parse_enum("", "metric", metric_kind_from_string, metric);
    }

    const Json& mixture = get_object(root, "", "mixture");
    check_keys(mixture, "mixture", {"order", "sigma"});
    if (const Json* order = find(mixture, "order")) {
        if (!order->is_array() || order->size() != 3)
            throw_config_error("mixture.order", "expected an array of 3 group indices");
        for (std::size_t k = 0; k < 3; ++k) {
            if (!(*order)[k].is_number_integer())
                throw_config_error("mixture.order", "expected an array of 3 group indices");
            config.mixture.order[k] = (*order)[k].get<int>();
        }
    }
    config.mixture.sigma = get_double(mixture, "mixture", "sigma", config.mixture.sigma);

    const Json& schedule = get_object(root, "", "schedule");
    check_keys(schedule, "schedule", {"mode", "ratio"});
    config.schedule_mode = parse_enum("schedule", "mode", ratio_mode_from_string,
                                      get_string(schedule, "schedule", "mode", "dynamic"));
    config.ratio = get_double(schedule, "schedule", "ratio", config.ratio);

    const Json& model = get_object(root, "", "model");
    check_keys(model, "model", {"kind", "hidden_units"});
    config.model_kind = parse_enum("model", "kind", model_kind_from_string,
                                   get_string(model, "model", "kind", "linear"));
    config.hidden_units = get_size(model, "model", "hidden_units", config.hidden_units);

    const Json& hp = get_object(root, "", "hyperparams");
    check_keys(hp, "hyperparams",
               {"learning_rate", "momentum", "weight_decay", "label_smoothing", "augment_prob",
                "batch_size", "epochs"});
    config.hyperparams.learning_rate =
        get_double(hp, "hyperparams", "learning_rate", config.hyperparams.learning_rate);
    config.hyperparams.momentum = get_double(hp, "hyperparams", "momentum", config.hyperparams.momentum);
    config.hyperparams.weight_decay =
        get_double(hp, "hyperparams", "weight_decay", config.hyperparams.weight_decay);
    config.hyperparams.label_smoothing =
        get_double(hp, "hyperparams", "label_smoothing", config.hyperparams.label_smoothing);
    config.hyperparams.augment_prob =
        get_double(hp, "hyperparams", "augment_prob", config.hyperparams.augment_prob);
    config.hyperparams.batch_size =
        get_size(hp, "hyperparams", "batch_size", config.hyperparams.batch_size);
    config.hyperparams.epochs = get_int(hp, "hyperparams", "epochs", config.hyperparams.epochs);

    const Json& data = get_object(root, "", "data");
    check_keys(data, "data", {"source", "seed", "synthetic", "csv", "idx"});
    config.data.source = get_string(data, "data", "source", config.data.source);
    if (find(data, "seed")) config.data.seed = get_u64(data, "data", "seed", 0);

    const Json& synthetic = get_object(data, "data", "synthetic");
    check_keys(synthetic, "data.synthetic",
               {"classes", "per_class", "dims", "overlap", "label_noise", "train_fraction",
                "val_fraction", "standardize"});
    SyntheticSpec& sp = config.data.synthetic;
    sp.classes = get_size(synthetic, "data.synthetic", "classes", sp.classes);
    sp.per_class = get_size(synthetic, "data.synthetic", "per_class", sp.per_class);
    sp.dims = get_size(synthetic, "data.synthetic", "dims", sp.dims);
    sp.overlap = get_double(synthetic, "data.synthetic", "overlap", sp.overlap);
    sp.label_noise = get_double(synthetic, "data.synthetic", "label_noise", sp.label_noise);
    parse_fractions(synthetic, "data.synthetic", sp.train_fraction, sp.val_fraction);
    sp.standardize = get_bool(synthetic, "data.synthetic", "standardize", sp.standardize);

    const Json& csv = get_object(data, "data", "csv");
    check_keys(csv, "data.csv", {"path", "label_column", "split_column", "train_fraction",
                                 "val_fraction", "standardize"});
    config.data.csv_path = get_string(csv, "data.csv", "path", config.data.csv_path);
    config.data.csv.label_column =
        get_string(csv, "data.csv", "label_column", config.data.csv.label_column);
    config.data.csv.split_column =
        get_string(csv, "data.csv", "split_column", config.data.csv.split_column);
    parse_fractions(csv, "data.csv", config.data.csv.train_fraction, config.data.csv.val_fraction);
    config.data.csv.standardize = get_bool(csv, "data.csv", "standardize", config.data.csv.standardize);

    const Json& idx = get_object(data, "data", "idx");
    check_keys(idx, "data.idx", {"images", "labels", "train_fraction", "val_fraction", "standardize"});
    config.data.idx_images = get_string(idx, "data.idx", "images", config.data.idx_images);
    config.data.idx_labels = get_string(idx, "data.idx", "labels", config.data.idx_labels);
    parse_fractions(idx, "data.idx", config.data.idx.train_fraction, config.data.idx.val_fraction);
    config.data.idx.standardize = get_bool(idx, "data.idx", "standardize", config.data.idx.standardize);

    validate_run_config(config);
    return config;
}

void validate_run_config(const RunConfig& config) {
    if (!(config.ratio > 0.0 && config.ratio <= 1.0))
        throw_config_error("schedule.ratio", "must be in (0, 1]");
    {
        std::array<bool, 3> present = {false, false, false};
        for (int g : config.mixture.order) {
            if (g < 0 || g > 2 || present[g])
                throw_config_error("mixture.order", "must be a permutation of [0, 1, 2]");
            present[g] = true;
        }
    }
    if (config.mixture.sigma < 0.0)
        throw_config_error("mixture.sigma", "must be >= 0 (0 selects the default)");
    if (config.mode == RunMode::CoreSet && !config.fixed_metric)
        throw_config_error("metric", "coreset mode needs a fixed metric, not the mixture");
    if (config.model_kind == ModelKind::MLP && config.hidden_units < 1)
        throw_config_error("model.hidden_units", "must be >= 1");

    const HyperParams& hp = config.hyperparams;
    if (!(hp.learning_rate > 0.0)) throw_config_error("hyperparams.learning_rate", "must be > 0");
    if (hp.momentum < 0.0 || hp.momentum >= 1.0)
        throw_config_error("hyperparams.momentum", "must be in [0, 1)");
    if (hp.weight_decay < 0.0) throw_config_error("hyperparams.weight_decay", "must be >= 0");
    if (hp.label_smoothing < 0.0 || hp.label_smoothing >= 1.0)
        throw_config_error("hyperparams.label_smoothing", "must be in [0, 1)");
    if (hp.augment_prob < 0.0 || hp.augment_prob > 1.0)
        throw_config_error("hyperparams.augment_prob", "must be in [0, 1]");
    if (hp.batch_size < 1) throw_config_error("hyperparams.batch_size", "must be >= 1");
    if (hp.epochs < 1) throw_config_error("hyperparams.epochs", "must be >= 1");

    const DataConfig& data = config.data;
    if (data.source == "synthetic") {
        const SyntheticSpec& sp = data.synthetic;
        if (sp.classes < 2) throw_config_error("data.synthetic.classes", "need at least 2 classes");
        if (sp.per_class < 1) throw_config_error("data.synthetic.per_class", "must be >= 1");
        if (sp.dims < sp.classes)
            throw_config_error("data.synthetic.dims", "must be >= classes");
        if (sp.overlap < 0.0) throw_config_error("data.synthetic.overlap", "must be >= 0");
        if (sp.label_noise < 0.0 || sp.label_noise >= 0.5)
            throw_config_error("data.synthetic.label_noise", "must be in [0, 0.5)");
        if (!(sp.train_fraction > 0.0 && sp.train_fraction <= 1.0))
            throw_config_error("data.synthetic.train_fraction", "must be in (0, 1]");
        if (sp.val_fraction < 0.0 || sp.train_fraction + sp.val_fraction > 1.0 + 1e-12)
            throw_config_error("data.synthetic.val_fraction", "fractions must fit in [0, 1]");
    } else if (data.source == "csv") {
        if (data.csv_path.empty()) throw_config_error("data.csv.path", "required for csv data");
    } else if (data.source == "idx") {
        if (data.idx_images.empty()) throw_config_error("data.idx.images", "required for idx data");
        if (data.idx_labels.empty()) throw_config_error("data.idx.labels", "required for idx data");
    } else {
        throw_config_error("data.source", "must be synthetic, csv, or idx");
    }
}

std::string run_config_to_json_text(const RunConfig& config) {
    Json root;
    root["seed"] = config.seed;
    root["mode"] = std::string(to_string(config.mode));
    root["strategy"] = std::string(to_string(config.strategy));
    root["metric"] =
        config.fixed_metric ? std::string(to_string(*config.fixed_metric)) : std::string("mixture");
    Json mixture;
    mixture["order"] = config.mixture.order;
    mixture["sigma"] = config.mixture.sigma;
    root["mixture"] = std::move(mixture);
    Json schedule;
    schedule["mode"] = std::string(to_string(config.schedule_mode));
    schedule["ratio"] = config.ratio;
    root["schedule"] = std::move(schedule);
    Json model;
    model["kind"] = std::string(to_string(config.model_kind));
    model["hidden_units"] = config.hidden_units;
    root["model"] = std::move(model);
    Json hp;
    hp["learning_rate"] = config.hyperparams.learning_rate;
    hp["momentum"] = config.hyperparams.momentum;
    hp["weight_decay"] = config.hyperparams.weight_decay;
    hp["label_smoothing"] = config.hyperparams.label_smoothing;
    hp["augment_prob"] = config.hyperparams.augment_prob;
    hp["batch_size"] = config.hyperparams.batch_size;
    hp["epochs"] = config.hyperparams.epochs;
    root["hyperparams"] = std::move(hp);
    Json data;
    data["source"] = config.data.source;
    if (config.data.seed) data["seed"] = *config.data.seed;
    Json synthetic;
    synthetic["classes"] = config.data.synthetic.classes;
    synthetic["per_class"] = config.data.synthetic.per_class;
    synthetic["dims"] = config.data.synthetic.dims;
    synthetic["overlap"] = config.data.synthetic.overlap;
    synthetic["label_noise"] = config.data.synthetic.label_noise;
    synthetic["train_fraction"] = config.data.synthetic.train_fraction;
    synthetic["val_fraction"] = config.data.synthetic.val_fraction;
    synthetic["standardize"] = config.data.synthetic.standardize;
    data["synthetic"] = std::move(synthetic);
    Json csv;
    csv["path"] = config.data.csv_path;
    csv["label_column"] = config.data.csv.label_column;
    csv["split_column"] = config.data.csv.split_column;
    csv["train_fraction"] = config.data.csv.train_fraction;
    csv["val_fraction"] = config.data.csv.val_fraction;
    csv["standardize"] = config.data.csv.standardize;
    data["csv"] = std::move(csv);
    Json idx;
    idx["images"] = config.data.idx_images;
    idx["labels"] = config.data.idx_labels;
    idx["train_fraction"] = config.data.idx.train_fraction;
    idx["val_fraction"] = config.data.idx.val_fraction;
    idx["standardize"] = config.data.idx.standardize;
    data["idx"] = std::move(idx);
    root["data"] = std::move(data);
    return root.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return run_config_from_json_text(buffer.str());
}

Dataset build_dataset(const RunConfig& config) {
    const std::uint64_t seed = config.data_seed();
    if (config.data.source == "synthetic") return generate_synthetic(config.data.synthetic, seed);
    if (config.data.source == "csv") return load_csv(config.data.csv_path, config.data.csv, seed);
    return load_idx(config.data.idx_images, config.data.idx_labels, config.data.idx, seed);
}

}  // namespace asp
