#include "asp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "asp/error.hpp"
#include "asp/io_util.hpp"
#include "asp/metrics.hpp"
#include "asp/rng.hpp"

namespace asp {

namespace {

constexpr char kMagic[4] = {'A', 'S', 'P', 'W'};
constexpr std::uint32_t kVersion = 1;

void check_spec(const ModelSpec& spec) {
    if (spec.input_dim < 1) throw_error(ErrorCode::InvalidArgument, "input_dim must be >= 1");
    if (spec.num_classes < 2) throw_error(ErrorCode::InvalidArgument, "num_classes must be >= 2");
    if (spec.kind == ModelKind::MLP && spec.hidden_units < 1)
        throw_error(ErrorCode::InvalidArgument, "hidden_units must be >= 1");
}

std::size_t param_count_of(const ModelSpec& spec) {
    if (spec.kind == ModelKind::Linear)
        return spec.num_classes * spec.input_dim + spec.num_classes;
    return spec.hidden_units * spec.input_dim + spec.hidden_units +
           spec.num_classes * spec.hidden_units + spec.num_classes;
}

void softmax_inplace(std::span<double> logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        total += v;
    }
    for (double& v : logits) v /= total;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::Linear ? "linear" : "mlp";
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "linear") return ModelKind::Linear;
    if (name == "mlp") return ModelKind::MLP;
    throw_error(ErrorCode::Parse, "unknown model kind: " + std::string(name));
}

Model::Model(const ModelSpec& spec, std::uint64_t init_seed) : spec_(spec) {
    check_spec(spec);
    params_.assign(param_count_of(spec), 0.0);
    Rng rng(init_seed);
    // He-style fan-in scaling on the weight blocks; biases stay zero.
    if (spec_.kind == ModelKind::Linear) {
        const double scale = std::sqrt(1.0 / static_cast<double>(spec_.input_dim));
        for (std::size_t i = 0; i < spec_.num_classes * spec_.input_dim; ++i)
            params_[i] = scale * rng.normal();
    } else {
        const double scale1 = std::sqrt(2.0 / static_cast<double>(spec_.input_dim));
        const double scale2 = std::sqrt(2.0 / static_cast<double>(spec_.hidden_units));
        std::size_t i = 0;
        for (; i < spec_.hidden_units * spec_.input_dim; ++i) params_[i] = scale1 * rng.normal();
        i += spec_.hidden_units;  // b1
        const std::size_t w2_end = i + spec_.num_classes * spec_.hidden_units;
        for (; i < w2_end; ++i) params_[i] = scale2 * rng.normal();
    }
}

std::vector<double> Model::predict(std::span<const double> features) const {
    if (features.size() != spec_.input_dim)
        throw_error(ErrorCode::InvalidArgument, "feature row size does not match input_dim");
    const std::size_t d = spec_.input_dim;
    const std::size_t k_classes = spec_.num_classes;
    std::vector<double> logits(k_classes, 0.0);
    if (spec_.kind == ModelKind::Linear) {
        const double* weight = params_.data();
        const double* bias = weight + k_classes * d;
        for (std::size_t k = 0; k < k_classes; ++k) {
            double z = bias[k];
            for (std::size_t j = 0; j < d; ++j) z += weight[k * d + j] * features[j];
            logits[k] = z;
        }
    } else {
        const std::size_t h = spec_.hidden_units;
        const double* weight1 = params_.data();
        const double* bias1 = weight1 + h * d;
        const double* weight2 = bias1 + h;
        const double* bias2 = weight2 + k_classes * h;
        std::vector<double> hidden(h);
        for (std::size_t u = 0; u < h; ++u) {
            double z = bias1[u];
            for (std::size_t j = 0; j < d; ++j) z += weight1[u * d + j] * features[j];
            hidden[u] = z > 0.0 ? z : 0.0;
        }
        for (std::size_t k = 0; k < k_classes; ++k) {
            double z = bias2[k];
            for (std::size_t u = 0; u < h; ++u) z += weight2[k * h + u] * hidden[u];
            logits[k] = z;
        }
    }
    softmax_inplace(logits);
    return logits;
}

double Model::forward_backward(std::span<const double> features, std::span<const int> labels,
                               double label_smoothing, std::span<double> grad,
                               std::vector<double>& probabilities) const {
    const std::size_t d = spec_.input_dim;
    const std::size_t k_classes = spec_.num_classes;
    const std::size_t batch = labels.size();
    if (batch == 0) throw_error(ErrorCode::InvalidArgument, "empty batch");
    if (features.size() != batch * d)
        throw_error(ErrorCode::InvalidArgument, "feature matrix does not match batch x input_dim");
    if (grad.size() != params_.size())
        throw_error(ErrorCode::InvalidArgument, "gradient buffer size mismatch");
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= k_classes)
            throw_error(ErrorCode::IndexOutOfRange, "label out of range");
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    probabilities.assign(batch * k_classes, 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch);
    const double eps = label_smoothing;
    double loss_sum = 0.0;

    if (spec_.kind == ModelKind::Linear) {
        const double* weight = params_.data();
        const double* bias = weight + k_classes * d;
        double* grad_weight = grad.data();
        double* grad_bias = grad_weight + k_classes * d;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = features.data() + b * d;
            double* p = probabilities.data() + b * k_classes;
            for (std::size_t k = 0; k < k_classes; ++k) {
                double z = bias[k];
                for (std::size_t j = 0; j < d; ++j) z += weight[k * d + j] * x[j];
                // Exploded parameters surface as a non-finite loss (the
                // trainer's divergence signal), not as a validation error.
                if (!std::isfinite(z)) return std::numeric_limits<double>::quiet_NaN();
                p[k] = z;
            }
            softmax_inplace({p, k_classes});
            const auto label = static_cast<std::size_t>(labels[b]);
            loss_sum += loss_of({p, k_classes}, label, eps);
            for (std::size_t k = 0; k < k_classes; ++k) {
                const double target =
                    (k == label ? 1.0 - eps : 0.0) + eps / static_cast<double>(k_classes);
                const double dz = (p[k] - target) * inv_batch;
                grad_bias[k] += dz;
                for (std::size_t j = 0; j < d; ++j) grad_weight[k * d + j] += dz * x[j];
            }
        }
    } else {
        const std::size_t h = spec_.hidden_units;
        const double* weight1 = params_.data();
        const double* bias1 = weight1 + h * d;
        const double* weight2 = bias1 + h;
        const double* bias2 = weight2 + k_classes * h;
        double* grad_w1 = grad.data();
        double* grad_b1 = grad_w1 + h * d;
        double* grad_w2 = grad_b1 + h;
        double* grad_b2 = grad_w2 + k_classes * h;
        std::vector<double> hidden(h), delta_hidden(h);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = features.data() + b * d;
            double* p = probabilities.data() + b * k_classes;
            for (std::size_t u = 0; u < h; ++u) {
                double z = bias1[u];
                for (std::size_t j = 0; j < d; ++j) z += weight1[u * d + j] * x[j];
                hidden[u] = z > 0.0 ? z : 0.0;
            }
            for (std::size_t k = 0; k < k_classes; ++k) {
                double z = bias2[k];
                for (std::size_t u = 0; u < h; ++u) z += weight2[k * h + u] * hidden[u];
                if (!std::isfinite(z)) return std::numeric_limits<double>::quiet_NaN();
                p[k] = z;
            }
            softmax_inplace({p, k_classes});
            const auto label = static_cast<std::size_t>(labels[b]);
            loss_sum += loss_of({p, k_classes}, label, eps);
            std::fill(delta_hidden.begin(), delta_hidden.end(), 0.0);
            for (std::size_t k = 0; k < k_classes; ++k) {
                const double target =
                    (k == label ? 1.0 - eps : 0.0) + eps / static_cast<double>(k_classes);
                const double dz = (p[k] - target) * inv_batch;
                grad_b2[k] += dz;
                for (std::size_t u = 0; u < h; ++u) {
                    grad_w2[k * h + u] += dz * hidden[u];
                    delta_hidden[u] += dz * weight2[k * h + u];
                }
            }
            for (std::size_t u = 0; u < h; ++u) {
                if (hidden[u] <= 0.0) continue;  // ReLU gate
                grad_b1[u] += delta_hidden[u];
                for (std::size_t j = 0; j < d; ++j) grad_w1[u * d + j] += delta_hidden[u] * x[j];
            }
        }
    }
    return loss_sum * inv_batch;
}

void Model::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    detail::write_raw<std::uint32_t>(out, kVersion);
    detail::write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(spec_.kind));
    detail::write_raw<std::uint64_t>(out, spec_.input_dim);
    detail::write_raw<std::uint64_t>(out, spec_.num_classes);
    detail::write_raw<std::uint64_t>(out, spec_.hidden_units);
    detail::write_raw<std::uint64_t>(out, params_.size());
    for (double v : params_) detail::write_raw(out, v);
    if (!out) throw_error(ErrorCode::Io, "failed writing " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_error(ErrorCode::Io, "cannot open " + path.string());
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw_error(ErrorCode::Parse, path.string() + ": not a model snapshot");
    const auto version = detail::read_raw<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw_error(ErrorCode::Parse,
                    path.string() + ": unsupported model version " + std::to_string(version));
    ModelSpec spec;
    const auto kind = detail::read_raw<std::uint8_t>(in, "kind");
    if (kind > static_cast<std::uint8_t>(ModelKind::MLP))
        throw_error(ErrorCode::Parse, path.string() + ": unknown model kind");
    spec.kind = static_cast<ModelKind>(kind);
    spec.input_dim = detail::read_raw<std::uint64_t>(in, "input_dim");
    spec.num_classes = detail::read_raw<std::uint64_t>(in, "num_classes");
    spec.hidden_units = detail::read_raw<std::uint64_t>(in, "hidden_units");
    const auto count = detail::read_raw<std::uint64_t>(in, "param count");
    Model model(spec, 0);
    if (count != model.params_.size())
        throw_error(ErrorCode::Parse, path.string() + ": parameter count mismatch");
    for (double& v : model.params_) v = detail::read_raw<double>(in, "parameter");
    return model;
}

}  // namespace asp
