#include "ldlif/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ldlif/error.hpp"

namespace ldlif {

using nlohmann::json;

RunMode parse_run_mode(const std::string& s) {
    if (s == "train") return RunMode::Train;
    if (s == "eval") return RunMode::Eval;
    if (s == "macro-sim") return RunMode::MacroSim;
    if (s == "cost") return RunMode::Cost;
    throw ParameterError("unknown mode '" + s + "'");
}

const char* to_string(RunMode m) noexcept {
    switch (m) {
        case RunMode::Train: return "train";
        case RunMode::Eval: return "eval";
        case RunMode::MacroSim: return "macro-sim";
        case RunMode::Cost: return "cost";
    }
    return "?";
}

namespace {

// Object reader that rejects keys it was not told about.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw FormatError(path_ + " must be an object");
    }

    void allow(std::initializer_list<const char*> keys) {
        for (const char* k : keys) allowed_.insert(k);
        for (const auto& [k, _] : j_.items())
            if (!allowed_.count(k)) throw FormatError("unknown key '" + path_ + "." + k + "'");
    }

    bool has(const char* key) const { return j_.contains(key); }
    Section sub(const char* key) const { return {j_.at(key), path_ + "." + key}; }
    const json& raw(const char* key) const { return j_.at(key); }

    template <typename T>
    T get(const char* key, T fallback) const {
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw FormatError(path_ + "." + key + " has the wrong type");
        }
    }

    template <typename T>
    T require(const char* key) const {
        if (!j_.contains(key)) throw ParameterError("missing required key '" + path_ + "." + key + "'");
        return get<T>(key, T{});
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> allowed_;
};

NeuronParams parse_neuron(const Section& s) {
    const auto kind = s.get<std::string>("neuron", "ld-lif");
    if (kind == "ld-lif") {
        LdLifParams p;
        p.beta = s.get("beta", 0.2);
        p.theta = s.get("theta", 1.0);
        p.beta_learnable = s.get("beta_learnable", true);
        p.validate();
        return p;
    }
    if (kind == "v-lif") return VLifParams::make(s.get("tau_m", 2.0), s.get("dt", 1.0), s.get("theta", 1.0));
    throw ParameterError("unknown neuron type '" + kind + "'");
}

NetworkSpec parse_network(const Section& s) {
    NetworkSpec spec;
    spec.timesteps = s.require<std::size_t>("timesteps");
    const json& layers = s.raw("layers");
    if (!layers.is_array()) throw FormatError("network.layers must be an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Section l(layers[i], "network.layers[" + std::to_string(i) + "]");
        const auto type = l.get<std::string>("type", "dense");
        if (type == "dense") {
            l.allow({"type", "in", "out", "neuron", "beta", "theta", "beta_learnable", "tau_m", "dt"});
            spec.layers.push_back(
                LayerSpec::dense(l.require<std::size_t>("in"), l.require<std::size_t>("out"), parse_neuron(l)));
        } else if (type == "conv") {
            l.allow({"type", "in_channels", "in_height", "in_width", "out_channels", "kernel", "stride", "padding",
                     "neuron", "beta", "theta", "beta_learnable", "tau_m", "dt"});
            ConvGeometry g;
            g.in_channels = l.require<int>("in_channels");
            g.in_height = l.require<int>("in_height");
            g.in_width = l.require<int>("in_width");
            g.out_channels = l.require<int>("out_channels");
            g.kernel = l.require<int>("kernel");
            g.stride = l.get("stride", 1);
            g.padding = l.get("padding", 0);
            spec.layers.push_back(LayerSpec::convolution(g, parse_neuron(l)));
        } else {
            throw ParameterError("unknown layer type '" + type + "'");
        }
    }
    spec.validate();
    return spec;
}

DatasetSource parse_dataset(const Section& s, std::uint64_t seed) {
    DatasetSource d;
    if (s.has("synthetic")) {
        Section syn = s.sub("synthetic");
        syn.allow({"classes", "width", "timesteps", "rate_high", "rate_low", "train_samples", "test_samples", "seed"});
        SyntheticParams p;
        p.classes = syn.get("classes", p.classes);
        p.width = syn.get("width", p.width);
        p.timesteps = syn.get("timesteps", p.timesteps);
        p.rate_high = syn.get("rate_high", p.rate_high);
        p.rate_low = syn.get("rate_low", p.rate_low);
        p.samples = syn.get("train_samples", p.samples);
        p.seed = syn.get("seed", seed);
        p.validate();
        d.synthetic = p;
        d.synthetic_test_samples = syn.get("test_samples", d.synthetic_test_samples);
    }
    if (s.has("train_file")) d.train_file = s.get<std::string>("train_file", "");
    if (s.has("test_file")) d.test_file = s.get<std::string>("test_file", "");
    if (d.synthetic && (d.train_file || d.test_file))
        throw ParameterError("dataset must be either synthetic or file based, not both");
    return d;
}

SurrogateKind parse_surrogate(const std::string& s) {
    if (s == "rectangular") return SurrogateKind::Rectangular;
    if (s == "arctan") return SurrogateKind::Arctan;
    if (s == "sigmoid") return SurrogateKind::Sigmoid;
    throw ParameterError("unknown surrogate '" + s + "'");
}

Rounding parse_rounding(const std::string& s) {
    if (s == "truncate") return Rounding::Truncate;
    if (s == "round-half-up") return Rounding::RoundHalfUp;
    throw ParameterError("unknown rounding '" + s + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what());
    }
    Section top(root, "config");
    top.allow({"mode", "seed", "output_dir", "network", "dataset", "train", "eval", "checkpoint", "quant", "scaler",
               "macro", "cost"});

    RunConfig c;
    c.mode = parse_run_mode(top.require<std::string>("mode"));
    c.seed = seed_override.value_or(top.get<std::uint64_t>("seed", c.seed));
    c.output_dir = top.get<std::string>("output_dir", c.output_dir.string());
    c.train.seed = c.seed;

    if (top.has("network")) {
        Section n = top.sub("network");
        n.allow({"timesteps", "layers"});
        c.network = parse_network(n);
    }
    if (top.has("dataset")) {
        Section d = top.sub("dataset");
        d.allow({"synthetic", "train_file", "test_file"});
        c.dataset = parse_dataset(d, c.seed);
    }
    if (top.has("train")) {
        Section t = top.sub("train");
        t.allow({"epochs", "batch_size", "lr_weights", "lr_beta", "logit_scale", "init_gain", "detach_reset",
                 "surrogate"});
        c.train.epochs = t.get("epochs", c.train.epochs);
        c.train.batch_size = t.get("batch_size", c.train.batch_size);
        c.train.lr_weights = t.get("lr_weights", c.train.lr_weights);
        c.train.lr_beta = t.get("lr_beta", c.train.lr_beta);
        c.train.logit_scale = t.get("logit_scale", c.train.logit_scale);
        c.train.init_gain = t.get("init_gain", c.train.init_gain);
        c.train.detach_reset = t.get("detach_reset", c.train.detach_reset);
        if (t.has("surrogate")) {
            Section s = t.sub("surrogate");
            s.allow({"kind", "width"});
            c.train.surrogate.kind = parse_surrogate(s.get<std::string>("kind", "arctan"));
            c.train.surrogate.width = s.get("width", c.train.surrogate.width);
        }
        c.train.validate();
    }
    if (top.has("eval")) {
        Section e = top.sub("eval");
        e.allow({"mode"});
        c.eval_mode = parse_eval_mode(e.get<std::string>("mode", "float"));
        if (c.eval_mode == EvalMode::Macro) throw ParameterError("use mode=macro-sim for macro evaluation");
    }
    if (top.has("checkpoint")) c.checkpoint = top.get<std::string>("checkpoint", "");
    if (top.has("quant")) {
        Section q = top.sub("quant");
        q.allow({"bits", "frac_bits"});
        c.quant.bits = q.get("bits", c.quant.bits);
        c.quant.vmem.frac_bits = q.get("frac_bits", c.quant.vmem.frac_bits);
    }
    c.quant.macro.weight_bits = c.quant.bits;
    if (top.has("scaler")) {
        Section s = top.sub("scaler");
        s.allow({"shift", "rounding", "saturate"});
        c.quant.scaler.shift = s.get("shift", c.quant.scaler.shift);
        c.quant.scaler.rounding = parse_rounding(s.get<std::string>("rounding", "round-half-up"));
        c.quant.scaler.saturate = s.get("saturate", c.quant.scaler.saturate);
    }
    if (top.has("macro")) {
        Section m = top.sub("macro");
        m.allow({"lanes", "rows", "weight_bits", "vmem_bits", "dump_trace", "trace_samples"});
        c.quant.macro.lanes = m.get("lanes", c.quant.macro.lanes);
        c.quant.macro.rows = m.get("rows", c.quant.macro.rows);
        c.quant.macro.weight_bits = m.get("weight_bits", c.quant.macro.weight_bits);
        c.quant.macro.vmem_bits = m.get("vmem_bits", c.quant.macro.vmem_bits);
        c.dump_trace = m.get("dump_trace", c.dump_trace);
        c.trace_samples = m.get("trace_samples", c.trace_samples);
    }
    c.quant.vmem.total_bits = c.quant.macro.vmem_bits;
    if (top.has("cost")) {
        Section k = top.sub("cost");
        k.allow({"neurons", "sop_count", "parallel_cycle_ns", "parallel_cycles_per_update", "serial_freq_mhz",
                 "serial_cycles_per_neuron", "sop_energy_pj", "ops_per_sop"});
        c.cost_neurons = k.get("neurons", c.cost_neurons);
        c.cost_sops = k.get("sop_count", c.cost_sops);
        c.cost.parallel_cycle_ns = k.get("parallel_cycle_ns", c.cost.parallel_cycle_ns);
        c.cost.parallel_cycles_per_update = k.get("parallel_cycles_per_update", c.cost.parallel_cycles_per_update);
        c.cost.serial_freq_mhz = k.get("serial_freq_mhz", c.cost.serial_freq_mhz);
        c.cost.serial_cycles_per_neuron = k.get("serial_cycles_per_neuron", c.cost.serial_cycles_per_neuron);
        c.cost.sop_energy_pj = k.get("sop_energy_pj", c.cost.sop_energy_pj);
        c.cost.ops_per_sop = k.get("ops_per_sop", c.cost.ops_per_sop);
    }
    c.validate();
    return c;
}

void RunConfig::validate() const {
    cost.validate();
    if (cost_neurons < 1) throw ParameterError("cost.neurons must be positive");
    quant.scaler.validate();
    quant.vmem.validate();
    quant.macro.validate();
    if (quant.bits < 2 || quant.bits > 8) throw ParameterError("quant.bits must be in [2, 8]");
    if (mode == RunMode::Cost) return;

    if (!network) throw ParameterError("mode " + std::string(to_string(mode)) + " requires a network");
    if (!dataset) throw ParameterError("mode " + std::string(to_string(mode)) + " requires a dataset");
    const bool needs_train_data = mode == RunMode::Train;
    if (dataset->synthetic) {
        if (dataset->synthetic->width != network->input_dim())
            throw ParameterError("synthetic width does not match network input");
        if (dataset->synthetic->timesteps != network->timesteps)
            throw ParameterError("synthetic timesteps do not match network timesteps");
        if (static_cast<std::size_t>(dataset->synthetic->classes) > network->output_dim())
            throw ParameterError("network has fewer outputs than classes");
    } else {
        if (needs_train_data && !dataset->train_file) throw ParameterError("training needs dataset.train_file");
        if (!needs_train_data && !dataset->test_file) throw ParameterError("evaluation needs dataset.test_file");
        for (const auto& f : {dataset->train_file, dataset->test_file})
            if (f && !std::filesystem::exists(*f)) throw ParameterError("dataset file not found: " + f->string());
    }
    if (mode == RunMode::Eval || mode == RunMode::MacroSim) {
        if (!checkpoint) throw ParameterError("mode " + std::string(to_string(mode)) + " requires a checkpoint");
        if (!std::filesystem::exists(*checkpoint))
            throw ParameterError("checkpoint not found: " + checkpoint->string());
    }
    if (mode == RunMode::MacroSim && quant.macro.weight_bits != quant.bits)
        throw ParameterError("macro.weight_bits must equal quant.bits");
}

RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str(), seed_override);
}

}  // namespace ldlif
