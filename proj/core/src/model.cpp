#include "ace/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ace/errors.hpp"
#include "ace/pyramid.hpp"
#include "ace/rng.hpp"

namespace ace {

namespace {

std::string level_prefix(Level level) {
    return "level" + std::to_string(static_cast<int>(level));
}

constexpr Conv2dGeometry kClassifierConv{2, 1};

}  // namespace

std::size_t ModelConfig::band_dim(Level level) const {
    const std::size_t side = level == Level::residual ? image_side : image_side / 2;
    return channels * side * side;
}

void ModelConfig::validate() const {
    if (channels == 0 || image_side < 2 || image_side % 2 != 0) {
        throw std::invalid_argument("model: image side must be even and at least 2");
    }
    if (hidden[0] == 0 || hidden[1] == 0 || num_classes == 0) {
        throw std::invalid_argument("model: hidden widths and class count must be positive");
    }
    for (std::size_t c : classifier_channels) {
        if (c == 0) throw std::invalid_argument("model: classifier widths must be positive");
    }
}

AceModel::AceModel(ModelConfig config) : config_(config) {
    config_.validate();
    for (Level level : kLevels) {
        const std::string pre = level_prefix(level);
        auto& net = levels_[level_index(level)];
        const std::size_t in = config_.band_dim(level);
        const std::size_t hid = config_.hidden[level_index(level)];
        net.encoder = make_affine(pre + ".encoder", in, hid, false);
        net.encoder_bn = make_bn(pre + ".encoder", hid);
        for (std::size_t k = 0; k < config_.num_classes; ++k) {
            const std::string cls = ".class" + std::to_string(k);
            net.mu.push_back(make_affine(pre + ".mu" + cls, hid, kLatentDim, false));
            net.log_sigma.push_back(make_affine(pre + ".logsigma" + cls, hid, kLatentDim, false));
        }
        for (std::size_t k = 0; k < config_.num_classes; ++k) {
            const std::string cls = ".class" + std::to_string(k);
            net.decoder_hidden.push_back(make_affine(pre + ".decoder" + cls, kLatentDim, hid, false));
            net.decoder_bn.push_back(make_bn(pre + ".decoder" + cls, hid));
            net.decoder_out.push_back(make_affine(pre + ".decoder" + cls + ".out", hid, in, false));
        }
    }

    std::size_t in_ch = config_.channels;
    for (std::size_t i = 0; i < conv_.size(); ++i) {
        const std::string pre = "clf.layer" + std::to_string(i + 1);
        const std::size_t out_ch = config_.classifier_channels[i];
        const std::size_t fan_in = in_ch * 9;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        CounterRng rng(config_.init_seed, init_stream_++);
        std::vector<double> k(out_ch * fan_in);
        for (double& v : k) v = rng.uniform(-bound, bound);
        conv_[i].kernels = Tensor({out_ch, in_ch, 3, 3}, std::move(k), true);
        conv_[i].bias = Tensor::zeros({out_ch}, true);
        params_.add(pre + ".W", conv_[i].kernels);
        params_.add(pre + ".b", conv_[i].bias);
        conv_[i].bn = make_bn(pre, out_ch);
        in_ch = out_ch;
    }
    classifier_out_ = make_affine("clf.layer4", in_ch, 1, true);
}

Affine AceModel::make_affine(const std::string& prefix, std::size_t in, std::size_t out,
                             bool uniform) {
    CounterRng rng(config_.init_seed, init_stream_++);
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<double> w(in * out);
    for (double& v : w) v = uniform ? rng.uniform(-s, s) : s * rng.normal();
    Affine a{Tensor({in, out}, std::move(w), true), Tensor::zeros({out}, true)};
    params_.add(prefix + ".W", a.weight);
    params_.add(prefix + ".b", a.bias);
    return a;
}

BatchNorm AceModel::make_bn(const std::string& prefix, std::size_t features) {
    BatchNorm bn(features);
    params_.add(prefix + ".gamma", bn.gamma);
    params_.add(prefix + ".beta", bn.beta);
    return bn;
}

void AceModel::check_class(std::size_t cls) const {
    if (cls >= config_.num_classes) {
        throw std::invalid_argument("class label " + std::to_string(cls) + " outside 0.." +
                                    std::to_string(config_.num_classes - 1));
    }
}

Tensor AceModel::encode(Level level, const Tensor& band, Mode mode) {
    auto& net = levels_[level_index(level)];
    const std::size_t dim = config_.band_dim(level);
    if (band.rank() != 2 || band.dim(1) != dim) {
        throw std::invalid_argument(level_prefix(level) + " encoder expects [B," + std::to_string(dim) +
                                    "], got " + shape_string(band.shape()));
    }
    return batchnorm(lncosh(net.encoder(band)), net.encoder_bn, mode);
}

HeadOutput AceModel::sampler_heads(Level level, const Tensor& hidden, std::size_t cls) const {
    check_class(cls);
    const auto& net = levels_[level_index(level)];
    HeadOutput out;
    out.mu = net.mu[cls](hidden);
    out.log_sigma = clamp(net.log_sigma[cls](hidden), kLogSigmaMin, kLogSigmaMax);
    out.sigma = exp(out.log_sigma);
    return out;
}

Tensor AceModel::decode(Level level, const Tensor& z, std::size_t cls, Mode mode) {
    check_class(cls);
    if (z.rank() != 2 || z.dim(1) != kLatentDim) {
        throw std::invalid_argument("decoder expects latents [B,2], got " + shape_string(z.shape()));
    }
    auto& net = levels_[level_index(level)];
    Tensor h = batchnorm(tanh(net.decoder_hidden[cls](z)), net.decoder_bn[cls], mode);
    return net.decoder_out[cls](h);
}

Tensor AceModel::classifier_logits(const Tensor& images, Mode mode) {
    if (images.rank() != 4 || images.dim(1) != config_.channels ||
        images.dim(2) != config_.image_side || images.dim(3) != config_.image_side) {
        throw std::invalid_argument("classifier expects [B," + std::to_string(config_.channels) + "," +
                                    std::to_string(config_.image_side) + "," +
                                    std::to_string(config_.image_side) + "], got " +
                                    shape_string(images.shape()));
    }
    Tensor x = images;
    for (auto& block : conv_) {
        x = relu(batchnorm(conv2d(x, block.kernels, block.bias, kClassifierConv), block.bn, mode));
    }
    Tensor logits = classifier_out_(global_avg_pool(x));
    return logits.reshape({images.dim(0)});
}

Tensor decode_images(AceModel& model, const Tensor& z_residual, const Tensor& z_coarse, std::size_t cls) {
    const auto& c = model.config();
    const std::size_t b = z_residual.dim(0);
    if (z_coarse.rank() != 2 || z_coarse.dim(0) != b) {
        throw std::invalid_argument("decode_images: latents " + shape_string(z_residual.shape()) + " vs " +
                                    shape_string(z_coarse.shape()));
    }
    Tensor residual = model.decode(Level::residual, z_residual, cls, Mode::eval);
    Tensor coarse = model.decode(Level::coarse, z_coarse, cls, Mode::eval);
    const std::size_t s = c.image_side;
    return pyramid::reconstruct(coarse.reshape({b, c.channels, s / 2, s / 2}),
                                residual.reshape({b, c.channels, s, s}));
}

void AceModel::zero_sampler_heads() {
    for (auto& net : levels_) {
        for (auto* heads : {&net.mu, &net.log_sigma}) {
            for (auto& a : *heads) {
                for (double& v : a.weight.mutable_values()) v = 0.0;
                for (double& v : a.bias.mutable_values()) v = 0.0;
            }
        }
    }
}

std::vector<std::pair<std::string, BatchNorm*>> AceModel::batch_norms() {
    std::vector<std::pair<std::string, BatchNorm*>> out;
    for (Level level : kLevels) {
        auto& net = levels_[level_index(level)];
        const std::string pre = level_prefix(level);
        out.emplace_back(pre + ".encoder", &net.encoder_bn);
        for (std::size_t k = 0; k < net.decoder_bn.size(); ++k) {
            out.emplace_back(pre + ".decoder.class" + std::to_string(k), &net.decoder_bn[k]);
        }
    }
    for (std::size_t i = 0; i < conv_.size(); ++i) {
        out.emplace_back("clf.layer" + std::to_string(i + 1), &conv_[i].bn);
    }
    return out;
}

std::vector<std::pair<std::string, const BatchNorm*>> AceModel::batch_norms() const {
    std::vector<std::pair<std::string, const BatchNorm*>> out;
    for (auto& [name, bn] : const_cast<AceModel*>(this)->batch_norms()) out.emplace_back(name, bn);
    return out;
}

std::vector<TensorRecord> AceModel::buffer_records() const {
    std::vector<TensorRecord> out;
    const auto& c = config_;
    out.push_back({"meta.model",
                   {10},
                   {static_cast<double>(c.channels), static_cast<double>(c.image_side),
                    static_cast<double>(c.hidden[0]), static_cast<double>(c.hidden[1]),
                    static_cast<double>(c.num_classes), static_cast<double>(c.classifier_channels[0]),
                    static_cast<double>(c.classifier_channels[1]),
                    static_cast<double>(c.classifier_channels[2]), static_cast<double>(kLatentDim),
                    static_cast<double>(c.init_seed)}});
    for (const auto& [name, bn] : batch_norms()) {
        out.push_back({name + ".running_mean", {bn->features()}, bn->running_mean});
        out.push_back({name + ".running_var", {bn->features()}, bn->running_var});
    }
    return out;
}

void AceModel::load_buffers(const std::vector<TensorRecord>& records) {
    auto lookup = [&](const std::string& name) -> const TensorRecord& {
        for (const auto& r : records) {
            if (r.name == name) return r;
        }
        throw InputError("checkpoint is missing buffer " + name);
    };
    for (auto& [name, bn] : batch_norms()) {
        const auto& mean = lookup(name + ".running_mean");
        const auto& var = lookup(name + ".running_var");
        if (mean.values.size() != bn->features() || var.values.size() != bn->features()) {
            throw InputError("checkpoint buffer " + name + " has the wrong size");
        }
        bn->running_mean = mean.values;
        bn->running_var = var.values;
    }
}

// ---------------------------------------------------------------------------

Tensor windowed_logits(const Tensor& logits, std::optional<std::size_t> hardcoded) {
    if (logits.rank() != 1 || logits.size() == 0) {
        throw std::invalid_argument("observation weights need a non-empty logit vector, got " +
                                    shape_string(logits.shape()));
    }
    const std::size_t n = logits.size();
    if (hardcoded && *hardcoded >= n) {
        throw std::out_of_range("hard-coded observation " + std::to_string(*hardcoded) +
                                " outside a minibatch of " + std::to_string(n));
    }
    auto x = logits.values();
    const std::size_t arg = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
    const double top = hardcoded ? x[arg] + kLogWeightWindow : x[arg];
    const double floor = top - kLogWeightWindow;
    std::vector<double> out(n);
    // source[i]: which raw logit output i follows.
    std::vector<std::size_t> source(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (hardcoded && i == *hardcoded) {
            out[i] = top;
            source[i] = arg;
        } else if (x[i] >= floor) {
            out[i] = x[i];
            source[i] = i;
        } else {
            out[i] = floor;
            source[i] = arg;
        }
    }
    return Tensor::make({n}, std::move(out), {logits},
                        [source = std::move(source)](std::span<const double> g,
                                                     std::span<const std::shared_ptr<detail::Node>> p) {
                            double* t = Tensor::grad_target(p[0]);
                            if (!t) return;
                            for (std::size_t i = 0; i < g.size(); ++i) t[source[i]] += g[i];
                        });
}

Tensor observation_weights(const Tensor& logits, std::optional<std::size_t> hardcoded) {
    Tensor p = softmax(windowed_logits(logits, hardcoded));
    return scale(p, static_cast<double>(logits.size()));
}

Tensor classifier_weights(AceModel& model, const Tensor& images,
                          std::optional<std::size_t> hardcoded, Mode mode) {
    if (images.rank() != 4 || images.dim(0) < 2) {
        throw std::invalid_argument("classifier weights need a minibatch of at least 2 images");
    }
    if (hardcoded && *hardcoded >= images.dim(0)) {
        throw std::out_of_range("hard-coded observation " + std::to_string(*hardcoded) +
                                " outside a minibatch of " + std::to_string(images.dim(0)));
    }
    return observation_weights(model.classifier_logits(images, mode), hardcoded);
}

void validate_weights(std::span<const double> w) {
    if (w.empty()) throw std::invalid_argument("empty weight vector");
    double total = 0.0;
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("observation weight " + std::to_string(v) + " is not positive");
        }
        total += v;
    }
    const double b = static_cast<double>(w.size());
    if (std::abs(total - b) > 1e-6 * b) {
        throw std::invalid_argument("observation weights sum to " + std::to_string(total) +
                                    ", expected " + std::to_string(w.size()));
    }
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    if (*hi / *lo > kMaxWeightRatio) {
        throw std::invalid_argument("observation weight ratio " + std::to_string(*hi / *lo) +
                                    " exceeds 1e6");
    }
}

std::size_t dominant_index(std::span<const double> w, std::optional<std::size_t> hardcoded) {
    if (hardcoded) return *hardcoded;
    return static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
}

// ---------------------------------------------------------------------------

Checkpoint make_checkpoint(const AceModel& model, const AdamState* optimizer, int run_number) {
    Checkpoint ckpt;
    ckpt.tensors = parameter_records(model.parameters());
    auto buffers = model.buffer_records();
    buffers.push_back({"meta.run", {}, {static_cast<double>(run_number)}});
    ckpt.tensors.insert(ckpt.tensors.end(), buffers.begin(), buffers.end());
    if (optimizer) ckpt.optimizer = adam_records(*optimizer, model.parameters());
    return ckpt;
}

AceModel model_from_checkpoint(const Checkpoint& ckpt) {
    const auto& meta = ckpt.at("meta.model");
    if (meta.values.size() != 10 || meta.values[8] != static_cast<double>(kLatentDim)) {
        throw InputError("checkpoint model metadata is not recognised");
    }
    auto as_size = [&](std::size_t i) { return static_cast<std::size_t>(meta.values[i]); };
    ModelConfig c;
    c.channels = as_size(0);
    c.image_side = as_size(1);
    c.hidden = {as_size(2), as_size(3)};
    c.num_classes = as_size(4);
    c.classifier_channels = {as_size(5), as_size(6), as_size(7)};
    c.init_seed = static_cast<std::uint64_t>(meta.values[9]);
    AceModel model(c);
    load_parameters(ckpt.tensors, model.parameters());
    model.load_buffers(ckpt.tensors);
    return model;
}

int checkpoint_run_number(const Checkpoint& ckpt) {
    const auto* r = ckpt.find("meta.run");
    return r && r->values.size() == 1 ? static_cast<int>(r->values[0]) : 1;
}

}  // namespace ace
