#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ldlif/network.hpp"
#include "ldlif/neuron.hpp"

namespace ldlif {

struct LabeledSample {
    SpikeTrain input;
    int label = 0;
};

using Dataset = std::vector<LabeledSample>;

struct TrainConfig {
    int epochs = 30;
    std::size_t batch_size = 16;
    double lr_weights = 0.5;
    double lr_beta = 0.05;
    std::uint64_t seed = 1;
    SurrogateConfig surrogate{};
    /// Logits are logit_scale * (spike count / T).
    double logit_scale = 8.0;
    /// Initial weight range multiplier (see init_params).
    double init_gain = 3.0;
    /// Treat the reset term v_pre * s as a constant in the backward pass.
    bool detach_reset = true;
    /// Replace the Heaviside spike with a sigmoid of the surrogate width in the
    /// forward pass. Gradients are then exact derivatives of the loss, which
    /// is what the finite-difference checks rely on.
    bool smooth_forward = false;

    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> betas;
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochMetrics> history;
    double final_accuracy = 0.0;
};

struct Gradients {
    double loss = 0.0;
    int prediction = 0;
    std::vector<WeightMatrix> weights;
    /// Kernel gradients for conv layers, empty for dense.
    std::vector<std::vector<double>> kernels;
    /// d loss / d beta per layer (zero for v-LIF layers).
    std::vector<double> beta;
};

/// Cross-entropy of the spike-count readout for one sample, forward only.
double sample_loss(const NetworkSpec& spec, const NetworkParams& params, const LabeledSample& sample,
                   const TrainConfig& cfg);

/// Loss and full BPTT gradients for one sample.
Gradients loss_and_gradients(const NetworkSpec& spec, const NetworkParams& params,
                             const LabeledSample& sample, const TrainConfig& cfg);

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Minibatch SGD over `data` with BPTT gradients. Throws TrainingError when the
/// loss stops being finite.
TrainResult bptt_train(const NetworkSpec& spec, const Dataset& data, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

/// Same, continuing from `initial` instead of a fresh initialisation.
TrainResult bptt_train(const NetworkSpec& spec, NetworkParams initial, const Dataset& data,
                       const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Index of the largest count; ties go to the lowest index.
int argmax_count(const std::vector<int>& counts);

}  // namespace ldlif
