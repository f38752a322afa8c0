#include "ace/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "ace/errors.hpp"
#include "ace/loss.hpp"
#include "ace/rng.hpp"

namespace ace {

namespace {

constexpr std::size_t kEvalChunk = 500;

Tensor gather_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
    const std::size_t width = t.size() / t.dim(0);
    std::vector<double> out;
    out.reserve(rows.size() * width);
    auto v = t.values();
    for (std::size_t r : rows) out.insert(out.end(), v.begin() + r * width, v.begin() + (r + 1) * width);
    return Tensor({rows.size(), width}, std::move(out));
}

// Row positions within [first, first + count) grouped by label.
std::vector<std::vector<std::size_t>> rows_by_class(const dataio::Dataset& data, std::size_t first,
                                                    std::size_t count, std::size_t classes) {
    std::vector<std::vector<std::size_t>> out(classes);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t label = data.labels[first + r];
        if (label >= classes) {
            throw InputError("observation " + std::to_string(first + r) + " has label " + std::to_string(label) +
                             " but the model has " + std::to_string(classes) + " classes");
        }
        out[label].push_back(r);
    }
    return out;
}

// Visits eval-mode hidden activations per chunk.
template <typename Fn>
void for_each_chunk(AceModel& model, const dataio::Dataset& data, Fn&& fn) {
    NoGradGuard guard;
    for (std::size_t first = 0; first < data.size(); first += kEvalChunk) {
        const std::size_t count = std::min(kEvalChunk, data.size() - first);
        MinibatchBands mb = make_minibatch(data.batch(first, count));
        std::array<Tensor, 2> hidden;
        for (Level level : kLevels) {
            hidden[level_index(level)] = model.encode(level, mb.bands[level_index(level)], Mode::eval);
        }
        fn(first, count, hidden);
    }
}

LatentNoise draw_noise(std::uint64_t seed, std::size_t epoch, std::size_t first, std::size_t count) {
    LatentNoise n;
    for (Level level : kLevels) {
        auto& u = n.u[level_index(level)];
        u.resize(count * kLatentDim);
        for (std::size_t r = 0; r < count; ++r) {
            for (std::size_t d = 0; d < kLatentDim; ++d) {
                u[r * kLatentDim + d] = counter_uniform(seed, static_cast<std::uint32_t>(epoch),
                                                        static_cast<std::uint32_t>(first + r),
                                                        static_cast<std::uint32_t>(level),
                                                        static_cast<std::uint32_t>(d));
            }
        }
    }
    return n;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void TrainConfig::validate(std::size_t n) const {
    if (batch_size < 2) throw std::invalid_argument("batch_size must be at least 2");
    if (n == 0 || n % batch_size != 0) {
        throw std::invalid_argument("batch_size " + std::to_string(batch_size) + " does not divide " +
                                    std::to_string(n) + " observations");
    }
    if (run_number < 1) throw std::invalid_argument("run number must be at least 1");
    std::set<std::size_t> batches;
    for (std::size_t i = 0; i < hardcoded.size(); ++i) {
        const std::size_t h = hardcoded[i];
        if (h >= n) {
            throw std::invalid_argument("hard-coded index " + std::to_string(h) + " outside 0.." +
                                        std::to_string(n - 1));
        }
        if (std::count(hardcoded.begin(), hardcoded.end(), h) > 1) {
            throw std::invalid_argument("hard-coded index " + std::to_string(h) + " listed twice");
        }
        if (!batches.insert(h / batch_size).second) {
            throw std::invalid_argument("two hard-coded indices share minibatch " +
                                        std::to_string(h / batch_size));
        }
    }
    model.validate();
}

std::optional<std::size_t> TrainConfig::hardcoded_in(std::size_t batch) const {
    for (std::size_t h : hardcoded) {
        if (h / batch_size == batch) return h % batch_size;
    }
    return std::nullopt;
}

std::string EpochMetrics::csv_header() {
    return "run,epoch,reconstruction_l1,reconstruction_l2,generative_l1,generative_l2,objective,dominant";
}

std::string EpochMetrics::csv_line() const {
    std::string s = std::to_string(run) + "," + std::to_string(epoch);
    for (double v : {reconstruction[0], reconstruction[1], generative[0], generative[1], objective}) {
        s += "," + format_real(v);
    }
    s += ",";
    for (std::size_t i = 0; i < dominant.size(); ++i) s += (i ? ";" : "") + std::to_string(dominant[i]);
    return s;
}

TrainResult train_run(const TrainConfig& config, const dataio::Dataset& data, const DriftRegistry* targets,
                      const Checkpoint* resume, const TrainHooks& hooks) {
    config.validate(data.size());
    if (config.run_number == 1 && targets) {
        throw std::invalid_argument("run 1 trains against the prior and takes no registry");
    }
    if (config.run_number >= 2) {
        if (!targets) throw std::invalid_argument("run " + std::to_string(config.run_number) + " needs a registry");
        if (!targets->complete(data.size())) throw InputError("registry does not cover every observation");
        if (!resume) {
            throw std::invalid_argument("run " + std::to_string(config.run_number) +
                                        " resumes from the previous run's checkpoint");
        }
    }

    AceModel model = resume ? model_from_checkpoint(*resume) : AceModel(config.model);
    AdamState adam;
    adam.config = config.adam;
    if (resume && !resume->optimizer.empty()) {
        adam = adam_from_records(resume->optimizer, model.parameters());
        adam.config = config.adam;
    }
    if (model.config().image_side != data.side || model.config().channels != data.channels) {
        throw InputError("model geometry does not match the dataset images");
    }

    std::vector<double> initial;
    if (targets) initial = generative_error_at(model, data, *targets);

    auto& params = model.parameters();
    const std::size_t batches = data.size() / config.batch_size;
    const std::size_t b = config.batch_size;
    std::vector<EpochMetrics> metrics;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        EpochMetrics m;
        m.run = config.run_number;
        m.epoch = epoch;
        for (std::size_t t = 0; t < batches; ++t) {
            const std::size_t first = t * b;
            const auto hard = config.hardcoded_in(t);
            Tensor images = data.batch(first, b);
            MinibatchBands mb = make_minibatch(images);

            params.zero_grad();
            Tensor weights = classifier_weights(model, images, hard, Mode::train);
            const std::size_t dom = dominant_index(weights.values(), hard);
            const std::size_t cls = data.labels[first + dom];
            const LatentTargets lt = targets ? targets->targets(first, b) : LatentTargets::prior(b);
            VaeLoss loss = vae_loss(model, mb, cls, lt, draw_noise(config.seed, epoch, first, b), Mode::train);
            LossBreakdown lb = weighted_minibatch_loss(loss, weights);
            if (!std::isfinite(lb.weighted_total)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", minibatch " +
                                   std::to_string(t));
            }
            lb.objective.backward();
            adam_step(params, adam, static_cast<double>(epoch));

            for (std::size_t l = 0; l < 2; ++l) {
                m.reconstruction[l] += lb.reconstruction[l];
                m.generative[l] += lb.generative[l];
            }
            m.objective += lb.weighted_total;
            m.dominant.push_back(first + dom);
        }
        if (hooks.on_epoch) hooks.on_epoch(m);
        metrics.push_back(std::move(m));
        if (config.checkpoint_every && (epoch + 1) % config.checkpoint_every == 0 && hooks.on_checkpoint) {
            hooks.on_checkpoint(epoch + 1, model, adam);
        }
    }

    DriftRegistry registry = extract_drifts(model, data);
    return TrainResult{std::move(model), std::move(adam), std::move(registry), std::move(metrics),
                       std::move(initial)};
}

DriftRegistry extract_drifts(AceModel& model, const dataio::Dataset& data) {
    DriftRegistry out;
    const std::size_t classes = model.config().num_classes;
    for_each_chunk(model, data, [&](std::size_t first, std::size_t count, const std::array<Tensor, 2>& hidden) {
        std::vector<ObservationDrift> drifts(count);
        const auto groups = rows_by_class(data, first, count, classes);
        for (std::size_t cls = 0; cls < classes; ++cls) {
            if (groups[cls].empty()) continue;
            for (Level level : kLevels) {
                const std::size_t li = level_index(level);
                HeadOutput h = model.sampler_heads(level, gather_rows(hidden[li], groups[cls]), cls);
                auto mu = h.mu.values();
                auto sigma = h.sigma.values();
                for (std::size_t k = 0; k < groups[cls].size(); ++k) {
                    for (std::size_t d = 0; d < kLatentDim; ++d) {
                        drifts[groups[cls][k]][li][d] = {mu[k * kLatentDim + d], sigma[k * kLatentDim + d]};
                    }
                }
            }
        }
        for (std::size_t r = 0; r < count; ++r) out.set(first + r, drifts[r]);
    });
    return out;
}

std::vector<double> generative_error_at(AceModel& model, const dataio::Dataset& data,
                                        const DriftRegistry& registry) {
    const DriftRegistry attained = extract_drifts(model, data);
    std::vector<double> out(data.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& post = attained.at(i);
        const auto& target = registry.at(i);
        for (std::size_t l = 0; l < 2; ++l) {
            for (std::size_t d = 0; d < kLatentDim; ++d) {
                out[i] += laplace::generative_error(post[l][d], target[l][d]);
            }
        }
    }
    return out;
}

Tensor reconstruct_observations(AceModel& model, const dataio::Dataset& data) {
    const std::size_t classes = model.config().num_classes;
    const std::size_t width = data.image_size();
    std::vector<double> out(data.size() * width);
    for_each_chunk(model, data, [&](std::size_t first, std::size_t count, const std::array<Tensor, 2>& hidden) {
        const auto groups = rows_by_class(data, first, count, classes);
        for (std::size_t cls = 0; cls < classes; ++cls) {
            if (groups[cls].empty()) continue;
            std::array<Tensor, 2> mu;
            for (Level level : kLevels) {
                const std::size_t li = level_index(level);
                mu[li] = model.sampler_heads(level, gather_rows(hidden[li], groups[cls]), cls).mu;
            }
            Tensor images = decode_images(model, mu[0], mu[1], cls);
            auto v = images.values();
            for (std::size_t k = 0; k < groups[cls].size(); ++k) {
                std::copy_n(v.begin() + k * width, width, out.begin() + (first + groups[cls][k]) * width);
            }
        }
    });
    return Tensor({data.size(), data.channels, data.side, data.side}, std::move(out));
}

std::vector<double> reconstruction_report(AceModel& model, const dataio::Dataset& data) {
    const Tensor recon = reconstruct_observations(model, data);
    const std::size_t width = data.image_size();
    auto r = recon.values();
    std::vector<double> mse(data.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto x = data.image(i);
        double acc = 0.0;
        for (std::size_t p = 0; p < width; ++p) {
            const double d = r[i * width + p] - x[p];
            acc += d * d;
        }
        mse[i] = acc / static_cast<double>(width);
    }
    return mse;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double hi = values[mid];
    if (values.size() % 2) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace ace
