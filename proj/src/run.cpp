#include "ldlif/run.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ldlif/checkpoint.hpp"
#include "ldlif/error.hpp"
#include "ldlif/events.hpp"

namespace ldlif {

using nlohmann::ordered_json;

namespace {

struct Splits {
    Dataset train;
    Dataset test;
};

Splits load_data(const RunConfig& c, bool need_train) {
    Splits s;
    const DatasetSource& d = *c.dataset;
    if (d.synthetic) {
        if (need_train) s.train = gen_synthetic(*d.synthetic);
        SyntheticParams test = *d.synthetic;
        test.seed = d.synthetic->seed + 0x5bd1e995ULL;  // disjoint stream for held-out data
        test.samples = d.synthetic_test_samples;
        s.test = gen_synthetic(test);
        return s;
    }
    if (need_train) s.train = load_dataset(*d.train_file);
    if (d.test_file) s.test = load_dataset(*d.test_file);
    return s;
}

std::string predictions_csv(const Dataset& data, const std::vector<int>& predictions) {
    std::ostringstream os;
    os << "sample,label,prediction\n";
    for (std::size_t i = 0; i < data.size(); ++i) os << i << ',' << data[i].label << ',' << predictions[i] << '\n';
    return os.str();
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void add_eval_artifacts(Artifacts& out, const RunConfig& c, const NetworkSpec& spec, const Dataset& test,
                        const EvalResult& r) {
    out["predictions.csv"] = predictions_csv(test, r.predictions);
    out["spike_rates.csv"] = spike_rates_csv(r.stats);
    std::uint64_t sops = 0;
    for (const auto& tr : r.traces) sops += count_sops(spec, tr);
    out["cost_report.json"] = to_json(cost_report(c.cost_neurons, sops, c.cost)) + "\n";
    ordered_json j;
    j["mode"] = to_string(r.mode);
    j["samples"] = test.size();
    j["accuracy"] = r.accuracy;
    j["total_sops"] = sops;
    out["eval.json"] = dump(j);
}

Artifacts run_train(const RunConfig& c) {
    const NetworkSpec& spec = *c.network;
    const Splits data = load_data(c, true);
    Artifacts out;
    std::ostringstream metrics;
    TrainResult tr = bptt_train(spec, data.train, c.train, [&](const EpochMetrics& m) {
        ordered_json j;
        j["epoch"] = m.epoch;
        j["loss"] = m.loss;
        j["train_accuracy"] = m.accuracy;
        j["beta"] = m.betas;
        metrics << j.dump() << '\n';
    });
    out["metrics.jsonl"] = metrics.str();

    std::ostringstream ck;
    write_checkpoint(ck, Checkpoint::from_params(spec, tr.params, c.quant.bits));
    out["checkpoint.ldck"] = ck.str();

    ordered_json summary;
    summary["epochs"] = c.train.epochs;
    summary["train_accuracy"] = tr.final_accuracy;
    summary["beta"] = tr.params.betas();
    if (!data.test.empty()) {
        summary["test_accuracy_float"] = evaluate(spec, tr.params, data.test, EvalMode::Float).accuracy;
        bool all_ld = true;
        for (const auto& l : spec.layers) all_ld = all_ld && std::holds_alternative<LdLifParams>(l.neuron);
        if (all_ld)
            summary["test_accuracy_quantized"] =
                evaluate(spec, tr.params, data.test, EvalMode::Quantized, c.quant).accuracy;
    }
    out["summary.json"] = dump(summary);
    return out;
}

Artifacts run_eval(const RunConfig& c, EvalMode mode) {
    const NetworkSpec& spec = *c.network;
    const Splits data = load_data(c, false);
    const Checkpoint ck = load_checkpoint(*c.checkpoint);
    ck.check_spec(spec);
    EvalOptions opts;
    opts.keep_traces = true;

    Artifacts out;
    EvalResult r;
    if (mode == EvalMode::Float) {
        r = evaluate(spec, ck.to_params(spec), data.test, mode, c.quant, opts);
    } else {
        const QuantizedNetwork qnet = ck.to_quantized(spec, c.quant);
        r = evaluate(spec, qnet, data.test, mode, opts);
        if (mode == EvalMode::Macro && c.dump_trace) {
            for (std::size_t i = 0; i < std::min(c.trace_samples, data.test.size()); ++i) {
                const SampleOutput so = infer_macro(spec, qnet, data.test[i].input, true);
                for (std::size_t l = 0; l < so.macro_traces.size(); ++l) {
                    std::ostringstream csv;
                    write_trace_csv(csv, so.macro_traces[l]);
                    out["macro_trace_sample" + std::to_string(i) + "_layer" + std::to_string(l) + ".csv"] = csv.str();
                }
            }
        }
    }
    add_eval_artifacts(out, c, spec, data.test, r);
    return out;
}

}  // namespace

std::string spike_rates_csv(const SpikeRateStats& stats) {
    std::ostringstream os;
    os << "layer,t,rate,label\n" << std::setprecision(17);
    std::set<int> seen;
    for (const auto& sample : stats.samples) {
        if (!seen.insert(sample.label).second) continue;
        for (std::size_t l = 0; l < sample.rate.size(); ++l)
            for (std::size_t t = 0; t < sample.rate[l].size(); ++t)
                os << l << ',' << t << ',' << sample.rate[l][t] << ',' << sample.label << '\n';
    }
    return os.str();
}

Artifacts execute(const RunConfig& c) {
    c.validate();
    switch (c.mode) {
        case RunMode::Train: return run_train(c);
        case RunMode::Eval: return run_eval(c, c.eval_mode);
        case RunMode::MacroSim: return run_eval(c, EvalMode::Macro);
        case RunMode::Cost: {
            Artifacts out;
            out["cost_report.json"] = to_json(cost_report(c.cost_neurons, c.cost_sops, c.cost)) + "\n";
            return out;
        }
    }
    throw ParameterError("unhandled mode");
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : artifacts) {
        std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw FormatError("failed writing " + (dir / name).string());
    }
}

namespace {

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
    if (dynamic_cast<const ShapeError*>(&e)) return "shape";
    if (dynamic_cast<const FormatError*>(&e)) return "format";
    if (dynamic_cast<const ValidationError*>(&e)) return "validation";
    if (dynamic_cast<const StateError*>(&e)) return "state";
    if (dynamic_cast<const ContractError*>(&e)) return "contract";
    if (dynamic_cast<const TrainingError*>(&e)) return "training";
    return "internal";
}

}  // namespace

int run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& out,
        std::ostream& err) {
    try {
        RunConfig c = load_run_config(config_path, overrides.seed);
        if (overrides.output_dir) c.output_dir = *overrides.output_dir;
        const Artifacts artifacts = execute(c);
        write_artifacts(c.output_dir, artifacts);
        for (const auto& [name, _] : artifacts) out << (c.output_dir / name).string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        ordered_json j;
        j["error"] = error_kind(e);
        j["message"] = e.what();
        if (const auto* te = dynamic_cast<const TrainingError*>(&e)) j["epoch"] = te->epoch();
        err << j.dump() << '\n';
        return 1;
    }
}

}  // namespace ldlif
