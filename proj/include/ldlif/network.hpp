#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ldlif/neuron.hpp"

namespace ldlif {

enum class LayerType { Dense, Conv };

/// Small 2-D convolution, lowered to a dense matrix with shared entries so the
/// same dense code paths (training, quantisation, macro tiling) serve it.
/// Inputs and outputs are flattened channel-major: (c * H + y) * W + x.
struct ConvGeometry {
    int in_channels = 1;
    int in_height = 1;
    int in_width = 1;
    int out_channels = 1;
    int kernel = 3;
    int stride = 1;
    int padding = 0;

    void validate() const;
    int out_height() const noexcept { return (in_height + 2 * padding - kernel) / stride + 1; }
    int out_width() const noexcept { return (in_width + 2 * padding - kernel) / stride + 1; }
    std::size_t in_dim() const noexcept;
    std::size_t out_dim() const noexcept;
    std::size_t kernel_size() const noexcept;
};

/// Dense-matrix view of a convolution. Each structural connection records
/// which kernel parameter it shares.
struct ConvLowering {
    struct Tap {
        std::size_t out;
        std::size_t in;
        std::size_t kernel_index;
    };
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Tap> taps;

    WeightMatrix expand(const std::vector<double>& kernel) const;
    /// Sums dense-matrix gradients back onto the shared kernel parameters.
    std::vector<double> fold(const WeightMatrix& dense_grad, std::size_t kernel_size) const;
};

ConvLowering lower_conv(const ConvGeometry& g);

struct LayerSpec {
    LayerType type = LayerType::Dense;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    NeuronParams neuron = LdLifParams{};
    std::optional<ConvGeometry> conv;

    static LayerSpec dense(std::size_t in, std::size_t out, NeuronParams neuron);
    static LayerSpec convolution(const ConvGeometry& g, NeuronParams neuron);
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::size_t timesteps = 1;

    void validate() const;
    std::size_t input_dim() const { return layers.front().in_dim; }
    std::size_t output_dim() const { return layers.back().out_dim; }
    /// FNV-1a over a canonical description of the topology and neuron types.
    std::uint64_t hash() const;
};

/// Number of synapses each input of the layer drives.
std::vector<std::size_t> fan_out(const LayerSpec& layer);

struct LayerParams {
    /// Effective dense weights (out x in). For conv layers this is derived from `kernel`.
    WeightMatrix weights;
    std::vector<double> kernel;
    NeuronParams neuron;
};

struct NetworkParams {
    std::vector<LayerParams> layers;

    std::vector<double> betas() const;
};

/// Uniform(-a, a) weights with a = gain * sqrt(3 / fan_in); beta and theta from the spec.
NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed, double gain = 1.0);

/// Rebuilds conv layers' dense weights from their kernels.
void sync_conv_weights(const NetworkSpec& spec, NetworkParams& params);

}  // namespace ldlif
