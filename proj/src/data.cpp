#include "asp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "asp/error.hpp"
#include "asp/rng.hpp"

namespace asp {

namespace {

void check_fractions(double train_fraction, double val_fraction) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw_config_error("train_fraction", "must be in (0, 1]");
    if (val_fraction < 0.0 || train_fraction + val_fraction > 1.0 + 1e-12)
        throw_config_error("val_fraction", "train and validation fractions must fit in [0, 1]");
}

// Seeded stratified split: shuffles each class's ids and cuts them by the
// fractions. Guarantees every class lands in the train split.
void stratified_split(Dataset& dataset, double train_fraction, double val_fraction, Rng& rng) {
    std::vector<std::vector<SampleId>> by_class(dataset.num_classes);
    for (std::size_t i = 0; i < dataset.size(); ++i)
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(static_cast<SampleId>(i));
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& ids = by_class[c];
        if (ids.empty())
            throw_error(ErrorCode::InvalidArgument, "class " + std::to_string(c) + " has no samples");
        rng.shuffle(ids);
        const auto n_c = static_cast<double>(ids.size());
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n_c));
        n_train = std::clamp<std::size_t>(n_train, 1, ids.size());
        auto n_val = static_cast<std::size_t>(std::llround(val_fraction * n_c));
        n_val = std::min(n_val, ids.size() - n_train);
        dataset.train_ids.insert(dataset.train_ids.end(), ids.begin(), ids.begin() + n_train);
        dataset.val_ids.insert(dataset.val_ids.end(), ids.begin() + n_train,
                               ids.begin() + n_train + n_val);
        dataset.test_ids.insert(dataset.test_ids.end(), ids.begin() + n_train + n_val, ids.end());
    }
    std::sort(dataset.train_ids.begin(), dataset.train_ids.end());
    std::sort(dataset.val_ids.begin(), dataset.val_ids.end());
    std::sort(dataset.test_ids.begin(), dataset.test_ids.end());
}

void check_train_covers_classes(const Dataset& dataset) {
    std::vector<bool> present(dataset.num_classes, false);
    for (SampleId id : dataset.train_ids) present[static_cast<std::size_t>(dataset.labels[id])] = true;
    for (std::size_t c = 0; c < present.size(); ++c) {
        if (!present[c])
            throw_error(ErrorCode::InvalidArgument,
                        "class " + std::to_string(c) + " missing from the train split");
    }
}

// Per-dimension zero mean / unit variance, statistics taken on the train
// split only. Constant dimensions are centered but not scaled.
void standardize_features(Dataset& dataset) {
    const std::size_t d = dataset.dims;
    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (SampleId id : dataset.train_ids) {
        const auto row = dataset.features_of(id);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    const auto n_train = static_cast<double>(dataset.train_ids.size());
    for (double& m : mean) m /= n_train;
    for (SampleId id : dataset.train_ids) {
        const auto row = dataset.features_of(id);
        for (std::size_t j = 0; j < d; ++j) {
            const double centered = row[j] - mean[j];
            scale[j] += centered * centered;
        }
    }
    for (double& s : scale) {
        s = std::sqrt(s / n_train);
        if (s < 1e-12) s = 1.0;
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        double* row = dataset.features.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] = (row[j] - mean[j]) / scale[j];
    }
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2) throw_config_error("classes", "need at least 2 classes");
    if (spec.per_class < 1) throw_config_error("per_class", "need at least 1 sample per class");
    if (spec.dims < spec.classes)
        throw_config_error("dims", "must be >= classes (one mean axis per class)");
    if (spec.overlap < 0.0) throw_config_error("overlap", "must be >= 0");
    if (spec.label_noise < 0.0 || spec.label_noise >= 0.5)
        throw_config_error("label_noise", "must be in [0, 0.5)");
    check_fractions(spec.train_fraction, spec.val_fraction);

    Dataset dataset;
    dataset.dims = spec.dims;
    dataset.num_classes = spec.classes;
    const std::size_t n = spec.classes * spec.per_class;
    dataset.features.resize(n * spec.dims);
    dataset.labels.resize(n);

    // Class means sit on the coordinate axes; pulling them toward the origin
    // raises the cluster overlap.
    const double separation = 5.0 / (1.0 + spec.overlap);
    Rng sample_rng(derive_seed(seed, "samples"));
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<int>(i / spec.per_class);
        dataset.labels[i] = label;
        double* row = dataset.features.data() + i * spec.dims;
        for (std::size_t j = 0; j < spec.dims; ++j) row[j] = sample_rng.normal();
        row[label] += separation;
    }

    const auto n_flips = static_cast<std::size_t>(spec.label_noise * static_cast<double>(n));
    if (n_flips > 0) {
        Rng flip_rng(derive_seed(seed, "flips"));
        std::vector<SampleId> ids(n);
        std::iota(ids.begin(), ids.end(), SampleId{0});
        flip_rng.shuffle(ids);
        ids.resize(n_flips);
        std::sort(ids.begin(), ids.end());
        for (SampleId id : ids) {
            const auto offset = 1 + flip_rng.uniform_index(spec.classes - 1);
            dataset.labels[id] = static_cast<int>(
                (static_cast<std::uint64_t>(dataset.labels[id]) + offset) % spec.classes);
        }
        dataset.flipped_ids = std::move(ids);
    }

    Rng split_rng(derive_seed(seed, "split"));
    stratified_split(dataset, spec.train_fraction, spec.val_fraction, split_rng);
    check_train_covers_classes(dataset);
    if (spec.standardize) standardize_features(dataset);
    return dataset;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_number, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    // Tolerate surrounding spaces, which from_chars does not.
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
        throw_error(ErrorCode::Parse, "line " + std::to_string(line_number) + ", column '" +
                                          column + "': not a number: '" + cell + "'");
    return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw_error(ErrorCode::Io, "cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw_error(ErrorCode::Parse, path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    std::size_t label_col = header.size();
    std::size_t split_col = header.size();
    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == schema.label_column) {
            label_col = j;
        } else if (!schema.split_column.empty() && header[j] == schema.split_column) {
            split_col = j;
        } else {
            feature_cols.push_back(j);
        }
    }
    if (label_col == header.size())
        throw_error(ErrorCode::Parse, path.string() + ": no column named '" + schema.label_column + "'");
    if (!schema.split_column.empty() && split_col == header.size())
        throw_error(ErrorCode::Parse, path.string() + ": no column named '" + schema.split_column + "'");
    if (feature_cols.empty()) throw_error(ErrorCode::Parse, path.string() + ": no feature columns");

    Dataset dataset;
    dataset.dims = feature_cols.size();
    std::vector<long long> raw_labels;
    std::vector<int> split_tags;  // 0 train / 1 val / 2 test
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw_error(ErrorCode::Parse, "line " + std::to_string(line_number) + ": expected " +
                                              std::to_string(header.size()) + " cells, got " +
                                              std::to_string(cells.size()));
        for (std::size_t j : feature_cols)
            dataset.features.push_back(parse_cell(cells[j], line_number, header[j]));
        const double raw = parse_cell(cells[label_col], line_number, header[label_col]);
        if (std::abs(raw - std::round(raw)) > 1e-9)
            throw_error(ErrorCode::Parse, "line " + std::to_string(line_number) +
                                              ": label is not an integer: '" + cells[label_col] + "'");
        raw_labels.push_back(static_cast<long long>(std::llround(raw)));
        if (split_col != header.size()) {
            const std::string& tag = cells[split_col];
            if (tag == "train") split_tags.push_back(0);
            else if (tag == "val") split_tags.push_back(1);
            else if (tag == "test") split_tags.push_back(2);
            else
                throw_error(ErrorCode::Parse, "line " + std::to_string(line_number) +
                                                  ": split must be train/val/test, got '" + tag + "'");
        }
    }
    if (raw_labels.empty()) throw_error(ErrorCode::Parse, path.string() + ": no data rows");

    // Remap arbitrary integer labels onto a dense 0..K-1 range.
    std::vector<long long> distinct(raw_labels);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::map<long long, int> to_dense;
    for (std::size_t c = 0; c < distinct.size(); ++c) to_dense[distinct[c]] = static_cast<int>(c);
    dataset.num_classes = distinct.size();
    bool identity = true;
    for (std::size_t c = 0; c < distinct.size(); ++c)
        identity = identity && distinct[c] == static_cast<long long>(c);
    if (!identity) dataset.label_values = distinct;
    dataset.labels.reserve(raw_labels.size());
    for (long long raw : raw_labels) dataset.labels.push_back(to_dense[raw]);

    if (split_col != header.size()) {
        for (std::size_t i = 0; i < split_tags.size(); ++i) {
            const auto id = static_cast<SampleId>(i);
            if (split_tags[i] == 0) dataset.train_ids.push_back(id);
            else if (split_tags[i] == 1) dataset.val_ids.push_back(id);
            else dataset.test_ids.push_back(id);
        }
    } else {
        Rng split_rng(derive_seed(seed, "split"));
        stratified_split(dataset, schema.train_fraction, schema.val_fraction, split_rng);
    }
    check_train_covers_classes(dataset);
    if (schema.standardize) standardize_features(dataset);
    return dataset;
}

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::filesystem::path& path, const char* what) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw_error(ErrorCode::Parse, path.string() + ": truncated reading " + what);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 const IdxOptions& options, std::uint64_t seed) {
    check_fractions(options.train_fraction, options.val_fraction);

    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw_error(ErrorCode::Io, "cannot open " + images_path.string());
    if (read_be_u32(images, images_path, "magic") != 0x00000803u)
        throw_error(ErrorCode::Parse, images_path.string() + ": bad image magic");
    const std::uint32_t n_images = read_be_u32(images, images_path, "count");
    const std::uint32_t rows = read_be_u32(images, images_path, "rows");
    const std::uint32_t cols = read_be_u32(images, images_path, "cols");

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw_error(ErrorCode::Io, "cannot open " + labels_path.string());
    if (read_be_u32(labels, labels_path, "magic") != 0x00000801u)
        throw_error(ErrorCode::Parse, labels_path.string() + ": bad label magic");
    const std::uint32_t n_labels = read_be_u32(labels, labels_path, "count");
    if (n_images != n_labels)
        throw_error(ErrorCode::Parse, "image count " + std::to_string(n_images) +
                                          " != label count " + std::to_string(n_labels));
    if (n_images == 0) throw_error(ErrorCode::Parse, images_path.string() + ": zero items");

    Dataset dataset;
    dataset.dims = static_cast<std::size_t>(rows) * cols;
    if (dataset.dims == 0) throw_error(ErrorCode::Parse, images_path.string() + ": zero image size");

    std::vector<unsigned char> pixel_row(dataset.dims);
    dataset.features.reserve(static_cast<std::size_t>(n_images) * dataset.dims);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        images.read(reinterpret_cast<char*>(pixel_row.data()),
                    static_cast<std::streamsize>(pixel_row.size()));
        if (!images) throw_error(ErrorCode::Parse, images_path.string() + ": truncated pixel data");
        for (unsigned char px : pixel_row) dataset.features.push_back(px / 255.0);
    }

    std::vector<unsigned char> label_bytes(n_labels);
    labels.read(reinterpret_cast<char*>(label_bytes.data()),
                static_cast<std::streamsize>(label_bytes.size()));
    if (!labels) throw_error(ErrorCode::Parse, labels_path.string() + ": truncated label data");
    int max_label = 0;
    for (unsigned char b : label_bytes) max_label = std::max(max_label, static_cast<int>(b));
    dataset.num_classes = static_cast<std::size_t>(max_label) + 1;
    dataset.labels.assign(label_bytes.begin(), label_bytes.end());

    Rng split_rng(derive_seed(seed, "split"));
    stratified_split(dataset, options.train_fraction, options.val_fraction, split_rng);
    check_train_covers_classes(dataset);
    if (options.standardize) standardize_features(dataset);
    return dataset;
}

}  // namespace asp
