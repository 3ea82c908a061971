#include "ldlif/cost.hpp"

#include <json.hpp>

#include "ldlif/error.hpp"

namespace ldlif {

void CostParams::validate() const {
    if (!(parallel_cycle_ns > 0.0) || parallel_cycles_per_update < 1 || !(serial_freq_mhz > 0.0) ||
        serial_cycles_per_neuron < 1 || !(sop_energy_pj > 0.0) || ops_per_sop < 1)
        throw ParameterError("cost parameters must all be positive");
}

double parallel_latency(const CostParams& p) {
    return static_cast<double>(p.parallel_cycles_per_update) * p.parallel_cycle_ns;
}

double serial_latency(std::int64_t n_neurons, const CostParams& p) {
    if (n_neurons < 1) throw ParameterError("serial latency needs at least one neuron");
    return static_cast<double>(n_neurons) * p.serial_cycles_per_neuron * (1000.0 / p.serial_freq_mhz);
}

EnergyReport energy_report(std::uint64_t sop_count, const CostParams& p) {
    // ops per pJ is numerically TOPS/W (1e12 ops / 1e12 pJ per J).
    const double tops_per_watt = p.ops_per_sop / p.sop_energy_pj;
    return {sop_count, static_cast<double>(sop_count) * p.sop_energy_pj, tops_per_watt};
}

CostReport cost_report(std::int64_t n_neurons, std::uint64_t sop_count, const CostParams& p) {
    p.validate();
    CostReport r;
    r.params = p;
    r.neurons = n_neurons;
    r.parallel_latency_ns = parallel_latency(p);
    r.serial_latency_ns = serial_latency(n_neurons, p);
    r.latency_ratio = r.serial_latency_ns / r.parallel_latency_ns;
    const EnergyReport e = energy_report(sop_count, p);
    r.total_sops = e.sop_count;
    r.total_energy_pj = e.total_energy_pj;
    r.tops_per_watt = e.tops_per_watt;
    return r;
}

std::uint64_t count_sops(const NetworkSpec& spec, const NetworkTrace& trace) {
    if (trace.layer_inputs.size() != spec.layers.size())
        throw StateError("evaluation trace was not retained for every layer");
    std::uint64_t sops = 0;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const auto fan = fan_out(spec.layers[l]);
        for (const auto& s : trace.layer_inputs[l]) {
            if (s.size() != fan.size()) throw ShapeError("trace width does not match layer input");
            for (std::size_t i = 0; i < s.size(); ++i)
                if (s[i]) sops += fan[i];
        }
    }
    return sops;
}

std::string to_json(const CostReport& r) {
    nlohmann::ordered_json j;
    j["neurons"] = r.neurons;
    j["parallel_latency_ns"] = r.parallel_latency_ns;
    j["serial_latency_ns"] = r.serial_latency_ns;
    j["latency_ratio"] = r.latency_ratio;
    j["total_sops"] = r.total_sops;
    j["total_energy_pj"] = r.total_energy_pj;
    j["tops_per_watt"] = r.tops_per_watt;
    j["parallel_cycle_ns"] = r.params.parallel_cycle_ns;
    j["parallel_cycles_per_update"] = r.params.parallel_cycles_per_update;
    j["serial_freq_mhz"] = r.params.serial_freq_mhz;
    j["serial_cycles_per_neuron"] = r.params.serial_cycles_per_neuron;
    j["sop_energy_pj"] = r.params.sop_energy_pj;
    j["ops_per_sop"] = r.params.ops_per_sop;
    return j.dump(2);
}

}  // namespace ldlif
