#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ace/adam.hpp"
#include "ace/checkpoint.hpp"
#include "ace/dataio.hpp"
#include "ace/model.hpp"
#include "ace/registry.hpp"

namespace ace {

struct TrainConfig {
    std::size_t batch_size = 1000;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    // 0-based indices in the initial dataset order.
    std::vector<std::size_t> hardcoded = {8, 1020, 2016};
    int run_number = 1;
    AdamConfig adam;
    // Checkpoint every K epochs through TrainHooks::on_checkpoint; 0 disables.
    std::size_t checkpoint_every = 0;
    ModelConfig model;

    // Throws std::invalid_argument unless batch_size divides n, batch_size >= 2,
    // and the hard-coded indices are distinct, below n and in distinct
    // minibatches.
    void validate(std::size_t n) const;
    // Hard-coded index inside minibatch `batch`, relative to its first row.
    std::optional<std::size_t> hardcoded_in(std::size_t batch) const;
};

struct EpochMetrics {
    int run = 1;
    std::size_t epoch = 0;
    std::array<double, 2> reconstruction{};  // unweighted sums over the epoch
    std::array<double, 2> generative{};
    double objective = 0.0;                  // sum of weighted minibatch objectives
    std::vector<std::size_t> dominant;       // one observation per minibatch

    static std::string csv_header();
    std::string csv_line() const;
};

struct TrainHooks {
    std::function<void(const EpochMetrics&)> on_epoch;
    // Called after epoch `epochs_done` when it is a multiple of checkpoint_every.
    std::function<void(std::size_t epochs_done, const AceModel&, const AdamState&)> on_checkpoint;
};

struct TrainResult {
    AceModel model;
    AdamState optimizer;
    DriftRegistry registry;
    std::vector<EpochMetrics> metrics;
    // Per observation, the generative error at the registry targets before
    // the first update of a run >= 2; empty in run 1.
    std::vector<double> initial_generative_error;
};

// One run of the protocol. Run 1 starts from a fresh model and trains
// against the prior; run k >= 2 resumes the model and optimizer of run k-1
// from `resume` and trains against `targets`, which must cover every
// observation. Minibatches slice the dataset in its initial order; each uses
// the class of its hard-coded or maximum-weight observation throughout.
// Latent draws are keyed by (seed, epoch, observation, level, dimension).
// Throws NumericError with epoch/batch coordinates on a non-finite loss.
TrainResult train_run(const TrainConfig& config, const dataio::Dataset& data,
                      const DriftRegistry* targets = nullptr, const Checkpoint* resume = nullptr,
                      const TrainHooks& hooks = {});

// Eval-mode head outputs for every observation under its own class label.
DriftRegistry extract_drifts(AceModel& model, const dataio::Dataset& data);

// Sum over levels and dimensions of the generative error between each
// observation's eval-mode heads (own class) and its registry row.
std::vector<double> generative_error_at(AceModel& model, const dataio::Dataset& data,
                                        const DriftRegistry& registry);

// Eval-mode reconstructions with z = mu under each observation's own class,
// [N, C, S, S].
Tensor reconstruct_observations(AceModel& model, const dataio::Dataset& data);

// Per-pixel mean squared error of reconstruct_observations, per observation.
std::vector<double> reconstruction_report(AceModel& model, const dataio::Dataset& data);

double median(std::vector<double> values);

}  // namespace ace
