#pragma once

// Straight-line integer LD-LIF: the functional model the macro must match
// bit for bit. No ping-pong, no cycle schedule; one wrapped sum per decision.

#include <cstdint>

#include "ldlif/macro.hpp"
#include "ldlif/quant.hpp"

namespace ldlif {

struct FixedStep {
    std::int64_t v = 0;
    bool spike = false;
};

/// v + mac - dcy compared against th through the sign of the wrapped
/// difference; spiking lanes reset to zero.
FixedStep fixed_ld_lif_step(std::int64_t v, std::int64_t mac, const MacroLayerConstants& k, int vmem_bits);

/// Exact integer dot product of one weight row with a binary input.
std::int64_t integer_mac(const QuantizedWeights& w, std::size_t row, const SpikeVector& s);

/// Integer layer over a whole spike train: exact MAC, one scaler pass, fixed_ld_lif_step.
SpikeTrain fixed_layer_forward(const QuantizedWeights& w, const SpikeTrain& input,
                               const MacroLayerConstants& k, const ScalerConfig& scaler,
                               const FixedPointFormat& fmt);

}  // namespace ldlif
