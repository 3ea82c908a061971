#include "ldlif/macro.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ldlif/error.hpp"

namespace ldlif {

void MacroConfig::validate() const {
    if (lanes < 1) throw ParameterError("macro needs at least one lane");
    if (rows < 1) throw ParameterError("macro needs at least one row");
    if (weight_bits < 2 || weight_bits > 8) throw ParameterError("macro weight_bits must be in [2, 8]");
    if (vmem_bits < weight_bits || vmem_bits > 32)
        throw ParameterError("vmem_bits must be in [weight_bits, 32]");
}

MacroLayerConstants MacroLayerConstants::make(std::int64_t dcy, std::int64_t th, int vmem_bits) {
    return {dcy, th, wrap_to_bits(-(dcy + th), vmem_bits)};
}

MacroLayerConstants MacroLayerConstants::from_real(double beta, double theta, double lsb,
                                                   const FixedPointFormat& fmt) {
    if (!(lsb > 0.0)) throw ParameterError("VMEM lsb must be positive");
    const auto dcy = saturate_to(static_cast<std::int64_t>(std::llround(beta / lsb)), fmt);
    const auto th = saturate_to(static_cast<std::int64_t>(std::llround(theta / lsb)), fmt);
    if (th <= 0) throw ParameterError("threshold rounds to zero on the VMEM grid");
    return make(dcy, th, fmt.total_bits);
}

bool VmemCellTrace::any_wrap() const noexcept {
    return std::any_of(cycles.begin(), cycles.end(), [](const CycleRecord& c) { return c.wrapped; });
}

LaneMask LaneMask::first(std::size_t lanes, std::size_t active) {
    LaneMask m{std::vector<std::uint8_t>(lanes, 0)};
    std::fill_n(m.enabled.begin(), std::min(lanes, active), std::uint8_t{1});
    return m;
}

int gate_multiply(int weight, bool in_bit, int weight_bits) {
    const int lo = -(1 << (weight_bits - 1));
    const int hi = (1 << (weight_bits - 1)) - 1;
    if (weight < lo || weight > hi)
        throw ContractError("weight " + std::to_string(weight) + " outside signed " +
                            std::to_string(weight_bits) + "-bit range");
    const unsigned stored = static_cast<unsigned>(weight) & ((1U << weight_bits) - 1);
    const bool inb = !in_bit;
    unsigned product = 0;
    for (int b = 0; b < weight_bits; ++b) {
        const bool wb = !((stored >> b) & 1U);
        const bool nor = !(wb || inb);
        product |= static_cast<unsigned>(nor) << b;
    }
    // Sign-extend the weight_bits-wide product.
    return static_cast<int>(wrap_to_bits(product, weight_bits));
}

std::int64_t mac_block(const MacStimulus& stim, const MacroConfig& cfg) {
    if (stim.input_bits.size() != stim.weight_column.size())
        throw ShapeError("MAC stimulus has mismatched input and weight lengths");
    if (stim.input_bits.size() > static_cast<std::size_t>(cfg.rows))
        throw ShapeError("MAC stimulus is taller than the block");

    std::vector<std::int64_t> level(stim.input_bits.size());
    for (std::size_t r = 0; r < level.size(); ++r)
        level[r] = gate_multiply(stim.weight_column[r], stim.input_bits[r] != 0, cfg.weight_bits);
    while (level.size() > 1) {
        std::vector<std::int64_t> next((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next[i / 2] = level[i] + level[i + 1];
        if (level.size() % 2) next.back() = level.back();
        level = std::move(next);
    }
    return level.empty() ? 0 : level.front();
}

namespace {

CycleRecord adder_cycle(MuxSelect sel, std::int64_t a, std::int64_t b, VmemCopy dest, int bits) {
    const std::int64_t exact = a + b;
    const std::int64_t sum = wrap_to_bits(exact, bits);
    return {sel, a, b, sum, dest, sum != exact};
}

}  // namespace

VmemUpdate vmem_update_3cycle(const VmemCellState& state, std::int64_t mac,
                              const MacroLayerConstants& k, const FixedPointFormat& fmt) {
    const int bits = fmt.total_bits;
    VmemUpdate out{state, false, {}};
    auto& tr = out.trace;
    VmemCellState& s = out.state;

    const VmemCopy home = state.active;
    const VmemCopy away = other(home);

    tr.v_init = s.read(home);
    tr.cycles[0] = adder_cycle(MuxSelect::Mac, tr.v_init, mac, away, bits);
    tr.v_mid = tr.cycles[0].sum;
    s.write(away, tr.v_mid);

    tr.cycles[1] = adder_cycle(MuxSelect::NegDcyTh, s.read(away), k.dcy_plus_th, home, bits);
    tr.v_mid_prime = tr.cycles[1].sum;
    s.write(home, tr.v_mid_prime);
    tr.spike = !sign_bit(tr.v_mid_prime, bits);

    if (tr.spike) {
        tr.cycles[2] = {MuxSelect::Reset, tr.v_mid_prime, 0, 0, away, false};
        tr.v_final = 0;
    } else {
        tr.cycles[2] = adder_cycle(MuxSelect::Th, s.read(home), k.th, away, bits);
        tr.v_final = tr.cycles[2].sum;
    }
    s.write(away, tr.v_final);
    s.active = away;
    out.spike = tr.spike;
    return out;
}

std::int64_t replay_trace(const VmemCellTrace& trace, int vmem_bits) {
    std::int64_t acc = trace.v_init;
    for (const auto& c : trace.cycles)
        acc = c.select == MuxSelect::Reset ? 0 : wrap_to_bits(acc + c.adder_b, vmem_bits);
    return acc;
}

MacroStep macro_timestep_from_sums(const MacroConfig& cfg, std::vector<VmemCellState> lanes,
                                   std::span<const std::int64_t> mac_sums,
                                   const MacroLayerConstants& k, const ScalerConfig& scaler,
                                   const FixedPointFormat& fmt, const LaneMask& mask,
                                   MacRange range) {
    const auto n = static_cast<std::size_t>(cfg.lanes);
    if (lanes.size() != n || mac_sums.size() != n || mask.enabled.size() != n)
        throw ShapeError("macro_timestep expects one state, MAC sum and mask bit per lane");
    if (fmt.total_bits != cfg.vmem_bits) throw ParameterError("VMEM format width differs from macro config");

    MacroStep step{std::move(lanes), SpikeVector(n, 0), std::vector<std::optional<VmemCellTrace>>(n)};
    for (std::size_t lane = 0; lane < n; ++lane) {
        if (!mask.enabled[lane]) continue;
        const std::int64_t mac = scale_mac(mac_sums[lane], scaler, fmt, range);
        VmemUpdate u = vmem_update_3cycle(step.lanes[lane], mac, k, fmt);
        step.lanes[lane] = u.state;
        step.spikes[lane] = u.spike ? 1 : 0;
        step.traces[lane] = std::move(u.trace);
    }
    return step;
}

MacroStep macro_timestep(const MacroConfig& cfg, std::vector<VmemCellState> lanes,
                         std::span<const MacStimulus> stimuli, const MacroLayerConstants& k,
                         const ScalerConfig& scaler, const FixedPointFormat& fmt,
                         const LaneMask& mask) {
    if (stimuli.size() != static_cast<std::size_t>(cfg.lanes))
        throw ShapeError("macro_timestep expects one stimulus per lane");
    std::vector<std::int64_t> sums(stimuli.size(), 0);
    for (std::size_t lane = 0; lane < stimuli.size(); ++lane)
        if (lane < mask.enabled.size() && mask.enabled[lane]) sums[lane] = mac_block(stimuli[lane], cfg);
    return macro_timestep_from_sums(cfg, std::move(lanes), sums, k, scaler, fmt, mask, cfg.mac_range());
}

MacroLayerResult run_layer_on_macro(const MacroConfig& cfg, const QuantizedWeights& weights,
                                    const SpikeTrain& input, const MacroLayerConstants& k,
                                    const ScalerConfig& scaler, const FixedPointFormat& fmt,
                                    std::optional<Tiling> tiling, bool keep_traces) {
    cfg.validate();
    scaler.validate();
    if (weights.bits != cfg.weight_bits)
        throw ParameterError("weights quantised at " + std::to_string(weights.bits) +
                             " bits but the macro stores " + std::to_string(cfg.weight_bits));
    const Tiling tile = tiling.value_or(Tiling::from(cfg));
    if (tile.lanes_per_group < 1 || tile.lanes_per_group > cfg.lanes || tile.rows_per_group < 1 ||
        tile.rows_per_group > cfg.rows)
        throw ParameterError("tiling exceeds the macro's lanes or rows");

    const std::size_t outputs = weights.rows;
    const std::size_t inputs = weights.cols;
    const auto group_lanes = static_cast<std::size_t>(tile.lanes_per_group);
    const auto group_rows = static_cast<std::size_t>(tile.rows_per_group);
    const std::size_t lane_groups = (outputs + group_lanes - 1) / group_lanes;
    const std::size_t row_groups = std::max<std::size_t>(1, (inputs + group_rows - 1) / group_rows);
    const MacRange range = MacRange::for_rows(static_cast<std::int64_t>(group_rows * row_groups),
                                              cfg.weight_bits);

    // Physical lanes beyond the group size stay disabled.
    std::vector<std::vector<VmemCellState>> states(
        lane_groups, std::vector<VmemCellState>(static_cast<std::size_t>(cfg.lanes)));
    std::vector<LaneMask> masks;
    for (std::size_t g = 0; g < lane_groups; ++g)
        masks.push_back(LaneMask::first(static_cast<std::size_t>(cfg.lanes),
                                        std::min(group_lanes, outputs - g * group_lanes)));

    MacroLayerResult result;
    result.spikes.reserve(input.size());
    MacStimulus stim;
    for (std::size_t t = 0; t < input.size(); ++t) {
        if (input[t].size() != inputs) throw ShapeError("input spike vector width differs from weight columns");
        SpikeVector out(outputs, 0);
        for (std::size_t g = 0; g < lane_groups; ++g) {
            std::vector<std::int64_t> sums(static_cast<std::size_t>(cfg.lanes), 0);
            for (std::size_t lane = 0; lane < group_lanes; ++lane) {
                const std::size_t neuron = g * group_lanes + lane;
                if (neuron >= outputs) break;
                for (std::size_t rg = 0; rg < row_groups; ++rg) {
                    const std::size_t r0 = rg * group_rows;
                    const std::size_t r1 = std::min(inputs, r0 + group_rows);
                    stim.input_bits.assign(input[t].begin() + r0, input[t].begin() + r1);
                    stim.weight_column.assign(weights.q.begin() + neuron * inputs + r0,
                                              weights.q.begin() + neuron * inputs + r1);
                    sums[lane] += mac_block(stim, cfg);
                }
            }
            MacroStep step = macro_timestep_from_sums(cfg, std::move(states[g]), sums, k, scaler,
                                                      fmt, masks[g], range);
            states[g] = std::move(step.lanes);
            for (std::size_t lane = 0; lane < group_lanes; ++lane) {
                const std::size_t neuron = g * group_lanes + lane;
                if (neuron >= outputs) break;
                out[neuron] = step.spikes[lane];
                if (keep_traces && step.traces[lane])
                    result.traces.push_back({t, neuron, *step.traces[lane]});
            }
        }
        result.spikes.push_back(std::move(out));
    }
    return result;
}

void write_trace_csv(std::ostream& os, std::span<const LaneTrace> traces) {
    os << "timestep,lane,cycle,mux_select,adder_a,adder_b,sum,spike\n";
    for (const auto& lt : traces) {
        for (std::size_t c = 0; c < lt.trace.cycles.size(); ++c) {
            const auto& rec = lt.trace.cycles[c];
            os << lt.timestep << ',' << lt.lane << ',' << (c + 1) << ','
               << static_cast<int>(rec.select) << ',' << rec.adder_a << ',' << rec.adder_b << ','
               << rec.sum << ',' << (lt.trace.spike ? 1 : 0) << '\n';
        }
    }
}

}  // namespace ldlif
