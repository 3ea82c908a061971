"""Linear-decay LIF neurons, the SRAM CIM macro model and its cost model."""

from ._ldlif import (
    ContractError,
    ParameterError,
    ShapeError,
    cost_report_json,
    exact_decay,
    gate_multiply,
    gen_synthetic,
    ld_lif_step,
    mac_block,
    parallel_latency_ns,
    quantize_weights,
    scale_mac,
    serial_latency_ns,
    surrogate_grad,
    synaptic_current,
    to_fixed,
    v_lif_step,
    vmem_update_3cycle,
)

__all__ = [
    "ContractError",
    "ParameterError",
    "ShapeError",
    "cost_report_json",
    "exact_decay",
    "gate_multiply",
    "gen_synthetic",
    "ld_lif_step",
    "mac_block",
    "parallel_latency_ns",
    "quantize_weights",
    "scale_mac",
    "serial_latency_ns",
    "surrogate_grad",
    "synaptic_current",
    "to_fixed",
    "v_lif_step",
    "vmem_update_3cycle",
]
