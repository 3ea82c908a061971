#pragma once

// Cycle-level model of the SRAM compute-in-memory macro.
//
// The macro has `lanes` MAC blocks, each a `rows` x weight_bits SRAM column
// gated by one input bit per row and reduced by an adder tree. The summed MAC
// is aligned to the membrane word by the scaler, then each lane's VMEM cell
// updates its potential in three adder cycles:
//
//   cycle 1  V_mid  = V_init + MAC            -> written to the idle copy
//   cycle 2  V'_mid = V_mid + (-(DCY + TH))   -> written back to the other copy
//            spike  = sign bit of V'_mid is 0
//   cycle 3  V_final = spike ? 0 : V'_mid + TH
//
// All adds wrap at vmem_bits (ripple full-adder chain). The scaler is the only
// saturating stage.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ldlif/neuron.hpp"
#include "ldlif/quant.hpp"

namespace ldlif {

struct MacroConfig {
    int lanes = 32;
    int rows = 256;
    int weight_bits = 4;
    int vmem_bits = 10;

    void validate() const;
    MacRange mac_range() const noexcept { return MacRange::for_rows(rows, weight_bits); }
};

/// Per-layer constant operands held next to the VMEM lanes.
struct MacroLayerConstants {
    std::int64_t dcy = 0;
    std::int64_t th = 0;
    /// -(dcy + th), wrapped to vmem_bits. This is the MUX3 operand used in cycle 2.
    std::int64_t dcy_plus_th = 0;

    static MacroLayerConstants make(std::int64_t dcy, std::int64_t th, int vmem_bits);
    /// Quantises a real-valued beta/theta onto a VMEM grid whose LSB is `lsb`.
    static MacroLayerConstants from_real(double beta, double theta, double lsb,
                                         const FixedPointFormat& fmt);
};

enum class VmemCopy : std::uint8_t { A, B };

inline VmemCopy other(VmemCopy c) noexcept { return c == VmemCopy::A ? VmemCopy::B : VmemCopy::A; }

struct VmemCellState {
    std::int64_t word_a = 0;
    std::int64_t word_b = 0;
    VmemCopy active = VmemCopy::A;

    std::int64_t live() const noexcept { return read(active); }
    std::int64_t read(VmemCopy c) const noexcept { return c == VmemCopy::A ? word_a : word_b; }
    void write(VmemCopy c, std::int64_t w) noexcept { (c == VmemCopy::A ? word_a : word_b) = w; }
};

/// Operand driven onto the adder's B port (Reset means the spiking circuit
/// drives the write bit lines with zero instead of the adder).
enum class MuxSelect : std::uint8_t { Mac = 0, NegDcyTh = 1, Th = 2, Reset = 3 };

struct CycleRecord {
    MuxSelect select = MuxSelect::Mac;
    std::int64_t adder_a = 0;
    std::int64_t adder_b = 0;
    std::int64_t sum = 0;
    VmemCopy written = VmemCopy::A;
    /// The unbounded sum did not fit in vmem_bits.
    bool wrapped = false;
};

struct VmemCellTrace {
    std::int64_t v_init = 0;
    std::int64_t v_mid = 0;
    std::int64_t v_mid_prime = 0;
    std::int64_t v_final = 0;
    bool spike = false;
    std::array<CycleRecord, 3> cycles{};

    bool any_wrap() const noexcept;
};

struct LaneMask {
    std::vector<std::uint8_t> enabled;

    static LaneMask all(std::size_t lanes) { return {std::vector<std::uint8_t>(lanes, 1)}; }
    static LaneMask first(std::size_t lanes, std::size_t active);
};

/// Inputs of one MAC block: one bit and one weight per row.
struct MacStimulus {
    std::vector<std::uint8_t> input_bits;
    std::vector<std::int8_t> weight_column;
};

/// 1-bit x weight_bits product built from per-bit NOR gating of the inverted
/// weight bit and inverted input bit.
int gate_multiply(int weight, bool in_bit, int weight_bits = 4);

/// Adder-tree reduction of the gated products. Exact: no intermediate truncation.
std::int64_t mac_block(const MacStimulus& stim, const MacroConfig& cfg = {});

struct VmemUpdate {
    VmemCellState state;
    bool spike = false;
    VmemCellTrace trace;
};

/// One timestep of one VMEM cell. `mac` is already in VMEM units (scaler output).
VmemUpdate vmem_update_3cycle(const VmemCellState& state, std::int64_t mac,
                              const MacroLayerConstants& k, const FixedPointFormat& fmt);

/// Re-executes a trace on a lone adder; returns the final word it produces.
std::int64_t replay_trace(const VmemCellTrace& trace, int vmem_bits);

struct MacroStep {
    std::vector<VmemCellState> lanes;
    SpikeVector spikes;
    /// nullopt for lanes disabled by the mask.
    std::vector<std::optional<VmemCellTrace>> traces;
};

/// All lanes update together. Disabled lanes keep their state and emit no spike.
MacroStep macro_timestep(const MacroConfig& cfg, std::vector<VmemCellState> lanes,
                         std::span<const MacStimulus> stimuli, const MacroLayerConstants& k,
                         const ScalerConfig& scaler, const FixedPointFormat& fmt,
                         const LaneMask& mask);

/// Same as macro_timestep but starting from exact per-lane MAC sums, which
/// may span several row tiles. `range` bounds the accumulated sums.
MacroStep macro_timestep_from_sums(const MacroConfig& cfg, std::vector<VmemCellState> lanes,
                                   std::span<const std::int64_t> mac_sums,
                                   const MacroLayerConstants& k, const ScalerConfig& scaler,
                                   const FixedPointFormat& fmt, const LaneMask& mask,
                                   MacRange range);

/// Lane/row group sizes used to map a layer onto macro tiles.
struct Tiling {
    int lanes_per_group = 32;
    int rows_per_group = 256;

    static Tiling from(const MacroConfig& cfg) { return {cfg.lanes, cfg.rows}; }
};

struct LaneTrace {
    std::size_t timestep = 0;
    std::size_t lane = 0;  // output neuron index within the layer
    VmemCellTrace trace;
};

struct MacroLayerResult {
    SpikeTrain spikes;
    std::vector<LaneTrace> traces;
};

/// Runs a quantised LD-LIF layer on the macro. Outputs are split into lane
/// groups and inputs into row groups; row-group partial sums are added as
/// exact integers before one scaler pass.
MacroLayerResult run_layer_on_macro(const MacroConfig& cfg, const QuantizedWeights& weights,
                                    const SpikeTrain& input, const MacroLayerConstants& k,
                                    const ScalerConfig& scaler, const FixedPointFormat& fmt,
                                    std::optional<Tiling> tiling = std::nullopt,
                                    bool keep_traces = false);

/// CSV: timestep,lane,cycle,mux_select,adder_a,adder_b,sum,spike (raw words).
void write_trace_csv(std::ostream& os, std::span<const LaneTrace> traces);

}  // namespace ldlif
