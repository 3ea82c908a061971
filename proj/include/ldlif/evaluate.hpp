#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ldlif/macro.hpp"
#include "ldlif/network.hpp"
#include "ldlif/quant.hpp"
#include "ldlif/train.hpp"

namespace ldlif {

enum class EvalMode { Float, Quantized, Macro };

EvalMode parse_eval_mode(const std::string& s);
const char* to_string(EvalMode m) noexcept;

/// Hardware-side settings shared by the quantised and macro paths.
struct QuantSettings {
    int bits = 4;
    ScalerConfig scaler{};
    FixedPointFormat vmem{10, 4};
    MacroConfig macro{};
};

/// A network frozen for integer inference. The VMEM LSB of layer l is
/// weights[l].scale * 2^scaler.shift, so beta and theta are expressed in
/// that unit inside `constants`.
struct QuantizedNetwork {
    std::vector<QuantizedWeights> weights;
    std::vector<MacroLayerConstants> constants;
    QuantSettings settings;
};

/// Post-training quantisation. Every layer must be LD-LIF.
QuantizedNetwork quantize_network(const NetworkSpec& spec, const NetworkParams& params,
                                  const QuantSettings& settings);

/// Assembles per-layer constants for already-quantised weights.
QuantizedNetwork assemble_quantized(std::vector<QuantizedWeights> weights, const std::vector<double>& beta,
                                    const std::vector<double>& theta, const QuantSettings& settings);

/// Per-layer input and output spike trains of one inference.
struct NetworkTrace {
    std::vector<SpikeTrain> layer_inputs;
    std::vector<SpikeTrain> layer_outputs;
};

struct SampleOutput {
    std::vector<int> counts;
    int prediction = 0;
    NetworkTrace trace;
    /// Macro traces per layer, only when requested in macro mode.
    std::vector<std::vector<LaneTrace>> macro_traces;
};

SampleOutput infer_float(const NetworkSpec& spec, const NetworkParams& params, const SpikeTrain& input);
SampleOutput infer_quantized(const NetworkSpec& spec, const QuantizedNetwork& qnet, const SpikeTrain& input);
SampleOutput infer_macro(const NetworkSpec& spec, const QuantizedNetwork& qnet, const SpikeTrain& input,
                         bool keep_macro_traces = false);

struct SampleRates {
    int label = 0;
    /// rate[layer][t]: fraction of the layer's neurons spiking at step t.
    std::vector<std::vector<double>> rate;
};

struct SpikeRateStats {
    std::vector<SampleRates> samples;
};

/// Throws StateError when a trace holds no layer outputs.
SpikeRateStats spike_rate_stats(const std::vector<NetworkTrace>& traces, const std::vector<int>& labels);

struct EvalOptions {
    bool keep_traces = false;
    /// 0 means: use worker_threads().
    unsigned threads = 0;
};

struct EvalResult {
    EvalMode mode = EvalMode::Float;
    double accuracy = 0.0;
    std::vector<int> predictions;
    std::vector<SpikeTrain> output_spikes;
    std::vector<NetworkTrace> traces;
    SpikeRateStats stats;
};

/// Float mode uses `params`; quantised and macro modes quantise `params`
/// with `settings` first.
EvalResult evaluate(const NetworkSpec& spec, const NetworkParams& params, const Dataset& data, EvalMode mode,
                    const QuantSettings& settings = {}, const EvalOptions& opts = {});

/// Evaluate an already-quantised network (quantised or macro mode).
EvalResult evaluate(const NetworkSpec& spec, const QuantizedNetwork& qnet, const Dataset& data, EvalMode mode,
                    const EvalOptions& opts = {});

/// Hardware threads, capped by the LDLF_THREADS environment variable.
unsigned worker_threads();

}  // namespace ldlif
