#pragma once

#include <cstdint>
#include <string>

#include "ldlif/evaluate.hpp"
#include "ldlif/network.hpp"

namespace ldlif {

/// Latency and energy constants. Defaults: 7 ns per parallel adder cycle,
/// 3 cycles per update, a 200 MHz serial baseline spending 4 cycles per
/// neuron, and 0.09 pJ per synaptic operation.
struct CostParams {
    double parallel_cycle_ns = 7.0;
    int parallel_cycles_per_update = 3;
    double serial_freq_mhz = 200.0;
    int serial_cycles_per_neuron = 4;
    double sop_energy_pj = 0.09;
    int ops_per_sop = 2;

    void validate() const;
};

struct CostReport {
    std::int64_t neurons = 0;
    double parallel_latency_ns = 0.0;
    double serial_latency_ns = 0.0;
    double latency_ratio = 0.0;
    std::uint64_t total_sops = 0;
    double total_energy_pj = 0.0;
    double tops_per_watt = 0.0;
    CostParams params;
};

/// Time for every lane to finish one update; independent of lane count.
double parallel_latency(const CostParams& p);
double serial_latency(std::int64_t n_neurons, const CostParams& p);

struct EnergyReport {
    std::uint64_t sop_count = 0;
    double total_energy_pj = 0.0;
    double tops_per_watt = 0.0;
};

EnergyReport energy_report(std::uint64_t sop_count, const CostParams& p);

/// Full report: latencies for `n_neurons` lanes and energy for `sop_count` SOPs.
CostReport cost_report(std::int64_t n_neurons, std::uint64_t sop_count, const CostParams& p);

/// One SOP = one input spike reaching one synapse. Throws StateError when the
/// trace holds no layer inputs.
std::uint64_t count_sops(const NetworkSpec& spec, const NetworkTrace& trace);

/// Flat JSON object; times in ns, energy in pJ.
std::string to_json(const CostReport& r);

}  // namespace ldlif
