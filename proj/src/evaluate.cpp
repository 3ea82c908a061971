#include "ldlif/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "ldlif/error.hpp"
#include "ldlif/fixed_lif.hpp"

namespace ldlif {

EvalMode parse_eval_mode(const std::string& s) {
    if (s == "float") return EvalMode::Float;
    if (s == "quantized") return EvalMode::Quantized;
    if (s == "macro") return EvalMode::Macro;
    throw ParameterError("unknown evaluation mode '" + s + "'");
}

const char* to_string(EvalMode m) noexcept {
    switch (m) {
        case EvalMode::Float: return "float";
        case EvalMode::Quantized: return "quantized";
        case EvalMode::Macro: return "macro";
    }
    return "?";
}

unsigned worker_threads() {
    unsigned n = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LDLF_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

QuantizedNetwork quantize_network(const NetworkSpec& spec, const NetworkParams& params,
                                  const QuantSettings& settings) {
    spec.validate();
    settings.scaler.validate();
    settings.vmem.validate();
    settings.macro.validate();
    if (params.layers.size() != spec.layers.size()) throw ShapeError("parameter and spec layer counts differ");
    std::vector<QuantizedWeights> weights;
    std::vector<double> beta, theta;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const auto* ld = std::get_if<LdLifParams>(&params.layers[l].neuron);
        if (!ld) throw ParameterError("integer inference supports LD-LIF layers only (layer " + std::to_string(l) + ")");
        weights.push_back(quantize_weights(params.layers[l].weights, settings.bits));
        beta.push_back(ld->beta);
        theta.push_back(ld->theta);
    }
    return assemble_quantized(std::move(weights), beta, theta, settings);
}

QuantizedNetwork assemble_quantized(std::vector<QuantizedWeights> weights, const std::vector<double>& beta,
                                    const std::vector<double>& theta, const QuantSettings& settings) {
    if (beta.size() != weights.size() || theta.size() != weights.size())
        throw ShapeError("one beta and theta per layer required");
    QuantizedNetwork q;
    q.settings = settings;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].bits != settings.bits)
            throw ParameterError("layer " + std::to_string(l) + " weights use " + std::to_string(weights[l].bits) +
                                 " bits, settings ask for " + std::to_string(settings.bits));
        const double lsb = weights[l].scale * std::ldexp(1.0, settings.scaler.shift);
        q.constants.push_back(MacroLayerConstants::from_real(beta[l], theta[l], lsb, settings.vmem));
    }
    q.weights = std::move(weights);
    return q;
}

namespace {

SampleOutput finish(SampleOutput out) {
    const SpikeTrain& last = out.trace.layer_outputs.back();
    const std::size_t width = last.empty() ? 0 : last.front().size();
    out.counts.assign(width, 0);
    for (const auto& s : last)
        for (std::size_t k = 0; k < s.size(); ++k) out.counts[k] += s[k];
    out.prediction = out.counts.empty() ? 0 : argmax_count(out.counts);
    return out;
}

void check_quantized(const NetworkSpec& spec, const QuantizedNetwork& qnet) {
    if (qnet.weights.size() != spec.layers.size() || qnet.constants.size() != spec.layers.size())
        throw ShapeError("quantised network does not match spec");
    for (const auto& w : qnet.weights)
        if (w.bits != qnet.settings.bits) throw ParameterError("layer weights quantised at a different bit width");
}

}  // namespace

SampleOutput infer_float(const NetworkSpec& spec, const NetworkParams& params, const SpikeTrain& input) {
    SampleOutput out;
    SpikeTrain x = input;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        LayerOutput lo = layer_forward(params.layers[l].weights, params.layers[l].neuron, x);
        out.trace.layer_inputs.push_back(std::move(x));
        x = lo.spikes;
        out.trace.layer_outputs.push_back(std::move(lo.spikes));
    }
    return finish(std::move(out));
}

SampleOutput infer_quantized(const NetworkSpec& spec, const QuantizedNetwork& qnet, const SpikeTrain& input) {
    check_quantized(spec, qnet);
    SampleOutput out;
    SpikeTrain x = input;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        SpikeTrain y = fixed_layer_forward(qnet.weights[l], x, qnet.constants[l], qnet.settings.scaler,
                                           qnet.settings.vmem);
        out.trace.layer_inputs.push_back(std::move(x));
        x = y;
        out.trace.layer_outputs.push_back(std::move(y));
    }
    return finish(std::move(out));
}

SampleOutput infer_macro(const NetworkSpec& spec, const QuantizedNetwork& qnet, const SpikeTrain& input,
                         bool keep_macro_traces) {
    check_quantized(spec, qnet);
    MacroConfig cfg = qnet.settings.macro;
    if (cfg.weight_bits != qnet.settings.bits)
        throw ParameterError("macro weight_bits " + std::to_string(cfg.weight_bits) +
                             " differs from quantisation bits " + std::to_string(qnet.settings.bits));
    FixedPointFormat fmt = qnet.settings.vmem;
    if (fmt.total_bits != cfg.vmem_bits) throw ParameterError("VMEM format width differs from macro vmem_bits");

    SampleOutput out;
    SpikeTrain x = input;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        MacroLayerResult r = run_layer_on_macro(cfg, qnet.weights[l], x, qnet.constants[l], qnet.settings.scaler,
                                                fmt, std::nullopt, keep_macro_traces);
        out.trace.layer_inputs.push_back(std::move(x));
        x = r.spikes;
        out.trace.layer_outputs.push_back(std::move(r.spikes));
        if (keep_macro_traces) out.macro_traces.push_back(std::move(r.traces));
    }
    return finish(std::move(out));
}

SpikeRateStats spike_rate_stats(const std::vector<NetworkTrace>& traces, const std::vector<int>& labels) {
    if (traces.size() != labels.size()) throw ShapeError("one label per trace required");
    SpikeRateStats stats;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& tr = traces[i];
        if (tr.layer_outputs.empty()) throw StateError("spike traces were not retained");
        SampleRates sr{labels[i], {}};
        for (const auto& layer : tr.layer_outputs) {
            std::vector<double> rates;
            rates.reserve(layer.size());
            for (const auto& s : layer) {
                std::size_t fired = 0;
                for (auto b : s) fired += b ? 1 : 0;
                rates.push_back(s.empty() ? 0.0 : static_cast<double>(fired) / static_cast<double>(s.size()));
            }
            sr.rate.push_back(std::move(rates));
        }
        stats.samples.push_back(std::move(sr));
    }
    return stats;
}

namespace {

template <typename Infer>
EvalResult run_eval(const Dataset& data, EvalMode mode, const EvalOptions& opts, Infer&& infer) {
    if (data.empty()) throw ParameterError("accuracy is undefined for an empty dataset");
    std::vector<SampleOutput> outputs(data.size());
    const unsigned threads =
        std::min<unsigned>(opts.threads ? opts.threads : worker_threads(), static_cast<unsigned>(data.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i; !failed && (i = next++) < data.size();) {
            try {
                outputs[i] = infer(data[i].input);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    EvalResult r;
    r.mode = mode;
    std::size_t correct = 0;
    std::vector<int> labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
        r.predictions.push_back(outputs[i].prediction);
        if (outputs[i].prediction == data[i].label) ++correct;
        r.output_spikes.push_back(outputs[i].trace.layer_outputs.back());
        labels.push_back(data[i].label);
        if (opts.keep_traces) r.traces.push_back(std::move(outputs[i].trace));
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    if (opts.keep_traces) r.stats = spike_rate_stats(r.traces, labels);
    return r;
}

}  // namespace

EvalResult evaluate(const NetworkSpec& spec, const QuantizedNetwork& qnet, const Dataset& data, EvalMode mode,
                    const EvalOptions& opts) {
    spec.validate();
    check_quantized(spec, qnet);
    switch (mode) {
        case EvalMode::Quantized:
            return run_eval(data, mode, opts, [&](const SpikeTrain& in) { return infer_quantized(spec, qnet, in); });
        case EvalMode::Macro:
            if (qnet.settings.macro.weight_bits != qnet.settings.bits)
                throw ParameterError("macro weight_bits differs from quantisation bits");
            return run_eval(data, mode, opts, [&](const SpikeTrain& in) { return infer_macro(spec, qnet, in); });
        case EvalMode::Float: break;
    }
    throw ParameterError("float evaluation needs real-valued parameters");
}

EvalResult evaluate(const NetworkSpec& spec, const NetworkParams& params, const Dataset& data, EvalMode mode,
                    const QuantSettings& settings, const EvalOptions& opts) {
    spec.validate();
    if (mode == EvalMode::Float)
        return run_eval(data, mode, opts, [&](const SpikeTrain& in) { return infer_float(spec, params, in); });
    if (mode == EvalMode::Macro && settings.macro.weight_bits != settings.bits)
        throw ParameterError("macro weight_bits differs from quantisation bits");
    return evaluate(spec, quantize_network(spec, params, settings), data, mode, opts);
}

}  // namespace ldlif
