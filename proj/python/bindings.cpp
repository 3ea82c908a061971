#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ldlif/cost.hpp"
#include "ldlif/error.hpp"
#include "ldlif/evaluate.hpp"
#include "ldlif/macro.hpp"
#include "ldlif/neuron.hpp"
#include "ldlif/quant.hpp"
#include "ldlif/synthetic.hpp"

namespace py = pybind11;
using namespace ldlif;

namespace {

WeightMatrix to_matrix(const std::vector<std::vector<double>>& rows) { return WeightMatrix::from_rows(rows); }

std::vector<std::vector<int>> q_rows(const QuantizedWeights& q) {
    std::vector<std::vector<int>> out(q.rows, std::vector<int>(q.cols));
    for (std::size_t r = 0; r < q.rows; ++r)
        for (std::size_t c = 0; c < q.cols; ++c) out[r][c] = q(r, c);
    return out;
}

}  // namespace

PYBIND11_MODULE(_ldlif, m) {
    m.doc() = "Linear-decay LIF neurons, fixed-point helpers, the CIM macro model and the cost model.";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

    m.def("exact_decay", &exact_decay, py::arg("v0"), py::arg("t"), py::arg("tau_m"));

    m.def(
        "v_lif_step",
        [](const std::vector<double>& v, double tau_m, double dt, double theta, const std::vector<double>& current) {
            StepResult r = v_lif_step(v, VLifParams::make(tau_m, dt, theta), current);
            return py::make_tuple(r.v, std::vector<int>(r.spikes.begin(), r.spikes.end()));
        },
        py::arg("v"), py::arg("tau_m"), py::arg("dt"), py::arg("theta"), py::arg("current"),
        "One forward-Euler LIF step; returns (v, spikes).");

    m.def(
        "ld_lif_step",
        [](const std::vector<double>& v, double beta, double theta, const std::vector<double>& current) {
            LdLifParams p{beta, theta, true};
            p.validate();
            StepResult r = ld_lif_step(v, p, current);
            return py::make_tuple(r.v, std::vector<int>(r.spikes.begin(), r.spikes.end()));
        },
        py::arg("v"), py::arg("beta"), py::arg("theta"), py::arg("current"),
        "One linear-decay LIF step; returns (v, spikes).");

    m.def(
        "synaptic_current",
        [](const std::vector<std::vector<double>>& w, const std::vector<std::uint8_t>& s) {
            return synaptic_current(to_matrix(w), s);
        },
        py::arg("w"), py::arg("s"));

    m.def(
        "surrogate_grad",
        [](double v_pre, double theta, const std::string& kind, double width) {
            SurrogateConfig cfg{SurrogateKind::Rectangular, width};
            if (kind == "arctan") cfg.kind = SurrogateKind::Arctan;
            else if (kind == "sigmoid") cfg.kind = SurrogateKind::Sigmoid;
            else if (kind != "rectangular") throw ParameterError("unknown surrogate '" + kind + "'");
            return surrogate_grad(v_pre, theta, cfg);
        },
        py::arg("v_pre"), py::arg("theta"), py::arg("kind") = "arctan", py::arg("width") = 1.0);

    m.def(
        "quantize_weights",
        [](const std::vector<std::vector<double>>& w, int bits) {
            const QuantizedWeights q = quantize_weights(to_matrix(w), bits);
            return py::make_tuple(q_rows(q), q.scale);
        },
        py::arg("w"), py::arg("bits"), "Symmetric per-tensor quantisation; returns (q, scale).");

    m.def(
        "to_fixed", [](double x, int total_bits, int frac_bits) {
            FixedPointFormat f{total_bits, frac_bits};
            f.validate();
            return to_fixed(x, f);
        },
        py::arg("x"), py::arg("total_bits") = 10, py::arg("frac_bits") = 4);

    m.def(
        "scale_mac",
        [](std::int64_t mac, int shift, bool round_half_up, bool saturate, int vmem_bits) {
            ScalerConfig cfg{shift, round_half_up ? Rounding::RoundHalfUp : Rounding::Truncate, saturate};
            cfg.validate();
            return scale_mac(mac, cfg, FixedPointFormat{vmem_bits, 0});
        },
        py::arg("mac"), py::arg("shift") = 2, py::arg("round_half_up") = true, py::arg("saturate") = true,
        py::arg("vmem_bits") = 10);

    m.def("gate_multiply", &gate_multiply, py::arg("weight"), py::arg("in_bit"), py::arg("weight_bits") = 4);

    m.def(
        "mac_block",
        [](const std::vector<std::uint8_t>& inputs, const std::vector<std::int8_t>& weights) {
            MacroConfig cfg;
            cfg.rows = std::max<int>(cfg.rows, static_cast<int>(inputs.size()));
            return mac_block(MacStimulus{inputs, weights}, cfg);
        },
        py::arg("inputs"), py::arg("weights"));

    m.def(
        "vmem_update_3cycle",
        [](std::int64_t v_init, std::int64_t mac, std::int64_t dcy, std::int64_t th, int vmem_bits) {
            const VmemUpdate u = vmem_update_3cycle(VmemCellState{v_init, 0, VmemCopy::A}, mac,
                                                    MacroLayerConstants::make(dcy, th, vmem_bits),
                                                    FixedPointFormat{vmem_bits, 0});
            py::dict d;
            d["v_init"] = u.trace.v_init;
            d["v_mid"] = u.trace.v_mid;
            d["v_mid_prime"] = u.trace.v_mid_prime;
            d["v_final"] = u.trace.v_final;
            d["spike"] = u.spike;
            d["wrapped"] = u.trace.any_wrap();
            return d;
        },
        py::arg("v_init"), py::arg("mac"), py::arg("dcy"), py::arg("th"), py::arg("vmem_bits") = 10,
        "Three-cycle VMEM update of one lane starting in copy A.");

    m.def("parallel_latency_ns", [](double cycle_ns, int cycles) {
        CostParams p;
        p.parallel_cycle_ns = cycle_ns;
        p.parallel_cycles_per_update = cycles;
        return parallel_latency(p);
    }, py::arg("cycle_ns") = 7.0, py::arg("cycles") = 3);

    m.def("serial_latency_ns", [](std::int64_t n, double freq_mhz, int cycles_per_neuron) {
        CostParams p;
        p.serial_freq_mhz = freq_mhz;
        p.serial_cycles_per_neuron = cycles_per_neuron;
        return serial_latency(n, p);
    }, py::arg("n_neurons"), py::arg("freq_mhz") = 200.0, py::arg("cycles_per_neuron") = 4);

    m.def("cost_report_json", [](std::int64_t neurons, std::uint64_t sops, double sop_energy_pj, int ops_per_sop) {
        CostParams p;
        p.sop_energy_pj = sop_energy_pj;
        p.ops_per_sop = ops_per_sop;
        return to_json(cost_report(neurons, sops, p));
    }, py::arg("neurons") = 32, py::arg("sop_count") = 0, py::arg("sop_energy_pj") = 0.09, py::arg("ops_per_sop") = 2);

    m.def(
        "gen_synthetic",
        [](int classes, std::size_t width, std::size_t steps, std::size_t samples, double rate_high, double rate_low,
           std::uint64_t seed) {
            SyntheticParams p{classes, width, steps, rate_high, rate_low, samples, seed};
            py::list out;
            for (const auto& s : gen_synthetic(p)) {
                std::vector<std::vector<int>> train;
                for (const auto& row : s.input) train.emplace_back(row.begin(), row.end());
                out.append(py::make_tuple(train, s.label));
            }
            return out;
        },
        py::arg("classes"), py::arg("width"), py::arg("steps"), py::arg("samples"), py::arg("rate_high") = 0.3,
        py::arg("rate_low") = 0.05, py::arg("seed") = 1, "Returns a list of (spike_train, label).");
}
