#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ace/checkpoint.hpp"
#include "ace/ops.hpp"
#include "ace/parameters.hpp"

namespace ace {

// Pyramid levels. Level 1 is the full-resolution residual band, level 2 the
// half-resolution coarse band.
enum class Level : int { residual = 1, coarse = 2 };
inline constexpr std::array<Level, 2> kLevels = {Level::residual, Level::coarse};
inline constexpr std::size_t level_index(Level l) { return static_cast<std::size_t>(l) - 1; }

// Latent dimensions per class per level.
inline constexpr std::size_t kLatentDim = 2;

// ln(1e6) less a hair, so exp(width) never rounds above the 1e6 weight ratio.
inline constexpr double kLogWeightWindow = 13.815510557964274 - 1e-9;
inline constexpr double kMaxWeightRatio = 1e6;

// Bounds on the log-sigma head output.
inline constexpr double kLogSigmaMin = -10.0;
inline constexpr double kLogSigmaMax = 10.0;

struct ModelConfig {
    std::size_t channels = 3;
    std::size_t image_side = 32;
    // Encoder width per level: {residual, coarse}.
    std::array<std::size_t, 2> hidden = {16, 4};
    std::size_t num_classes = 10;
    // Weight-classifier conv widths; the ladder ends in a single logit.
    std::array<std::size_t, 3> classifier_channels = {64, 64, 128};
    std::uint64_t init_seed = 0;

    // Flattened pixel count of a level's band.
    std::size_t band_dim(Level level) const;
    void validate() const;
};

struct Affine {
    Tensor weight;  // [in, out]
    Tensor bias;    // [out]
    Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
};

struct HeadOutput {
    Tensor mu;         // [B, kLatentDim]
    Tensor log_sigma;  // [B, kLatentDim], clamped
    Tensor sigma;      // exp(log_sigma)
};

// The auto-classifier-encoder network: per level, an ln-cosh encoder shared
// across classes, linear class-specific (mu, log sigma) heads and a
// class-specific tanh decoder; plus a 3-64-64-128-1 convolutional classifier
// producing one likelihood-weight logit per image.
class AceModel {
public:
    explicit AceModel(ModelConfig config);

    AceModel(const AceModel&) = delete;
    AceModel& operator=(const AceModel&) = delete;
    AceModel(AceModel&&) = default;
    AceModel& operator=(AceModel&&) = default;

    const ModelConfig& config() const { return config_; }

    // band [B, band_dim] -> hidden [B, hidden] = batchnorm(lncosh(affine(band)))
    Tensor encode(Level level, const Tensor& band, Mode mode);
    HeadOutput sampler_heads(Level level, const Tensor& hidden, std::size_t cls) const;
    // z [B, kLatentDim] -> band [B, band_dim]. The output layer is affine.
    Tensor decode(Level level, const Tensor& z, std::size_t cls, Mode mode);
    // images [B, C, S, S] -> logits [B]
    Tensor classifier_logits(const Tensor& images, Mode mode);

    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }

    // Sets every mu / log-sigma head weight and bias to zero, so that every
    // observation maps onto the prior (0, 1).
    void zero_sampler_heads();

    // Batch-norm running statistics and the model geometry.
    std::vector<TensorRecord> buffer_records() const;
    void load_buffers(const std::vector<TensorRecord>& records);

private:
    struct LevelNet {
        Affine encoder;
        BatchNorm encoder_bn;
        std::vector<Affine> mu;
        std::vector<Affine> log_sigma;
        std::vector<Affine> decoder_hidden;
        std::vector<BatchNorm> decoder_bn;
        std::vector<Affine> decoder_out;
    };
    struct ConvBlock {
        Tensor kernels;  // [out, in, 3, 3]
        Tensor bias;     // [out]
        BatchNorm bn;
    };

    void check_class(std::size_t cls) const;
    Affine make_affine(const std::string& prefix, std::size_t in, std::size_t out, bool uniform);
    BatchNorm make_bn(const std::string& prefix, std::size_t features);
    std::vector<std::pair<std::string, BatchNorm*>> batch_norms();
    std::vector<std::pair<std::string, const BatchNorm*>> batch_norms() const;

    ModelConfig config_;
    ParameterSet params_;
    std::array<LevelNet, 2> levels_;
    std::array<ConvBlock, 3> conv_;
    Affine classifier_out_;
    std::uint32_t init_stream_ = 0;
};

// Eval-mode decode of latents at both levels through class `cls`, followed by
// pyramid reconstruction: z [B, 2] per level -> images [B, C, S, S].
Tensor decode_images(AceModel& model, const Tensor& z_residual, const Tensor& z_coarse, std::size_t cls);

// ---------------------------------------------------------------------------
// Observation weights

// Clamps logits into a window of width kLogWeightWindow below its top. The
// top is the largest logit, or, when `hardcoded` is given, the largest logit
// plus the window width: the hard-coded observation sits at the top and every
// other observation at the floor. Gradients follow the selected entries; the
// window edges depend on the argmax logit.
Tensor windowed_logits(const Tensor& logits, std::optional<std::size_t> hardcoded);

// W = B * softmax(windowed_logits(logits)).
Tensor observation_weights(const Tensor& logits, std::optional<std::size_t> hardcoded);

// Classifier forward followed by observation_weights.
Tensor classifier_weights(AceModel& model, const Tensor& images,
                          std::optional<std::size_t> hardcoded, Mode mode);

// Throws std::invalid_argument unless sum(W) = B within 1e-6 B and
// max(W)/min(W) <= 1e6.
void validate_weights(std::span<const double> weights);

// First index attaining the maximum weight; the hard-coded observation when
// present.
std::size_t dominant_index(std::span<const double> weights, std::optional<std::size_t> hardcoded);

// ---------------------------------------------------------------------------
// Checkpoints

Checkpoint make_checkpoint(const AceModel& model, const AdamState* optimizer, int run_number);
// Rebuilds geometry from the stored metadata and loads every parameter and
// running statistic.
AceModel model_from_checkpoint(const Checkpoint& ckpt);
int checkpoint_run_number(const Checkpoint& ckpt);

}  // namespace ace
