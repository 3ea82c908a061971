#include "ldlif/fixed_lif.hpp"

#include "ldlif/error.hpp"

namespace ldlif {

FixedStep fixed_ld_lif_step(std::int64_t v, std::int64_t mac, const MacroLayerConstants& k, int vmem_bits) {
    const std::int64_t decayed = v + mac - k.dcy;
    const bool spike = wrap_to_bits(decayed - k.th, vmem_bits) >= 0;
    return {spike ? 0 : wrap_to_bits(decayed, vmem_bits), spike};
}

std::int64_t integer_mac(const QuantizedWeights& w, std::size_t row, const SpikeVector& s) {
    std::int64_t acc = 0;
    for (std::size_t c = 0; c < w.cols; ++c)
        if (s[c]) acc += w(row, c);
    return acc;
}

SpikeTrain fixed_layer_forward(const QuantizedWeights& w, const SpikeTrain& input,
                               const MacroLayerConstants& k, const ScalerConfig& scaler,
                               const FixedPointFormat& fmt) {
    const MacRange range = MacRange::for_rows(static_cast<std::int64_t>(w.cols), w.bits);
    std::vector<std::int64_t> v(w.rows, 0);
    SpikeTrain out;
    out.reserve(input.size());
    for (const auto& s : input) {
        if (s.size() != w.cols) throw ShapeError("input spike vector width differs from weight columns");
        SpikeVector spikes(w.rows, 0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            const std::int64_t mac = scale_mac(integer_mac(w, r, s), scaler, fmt, range);
            const FixedStep step = fixed_ld_lif_step(v[r], mac, k, fmt.total_bits);
            v[r] = step.v;
            spikes[r] = step.spike ? 1 : 0;
        }
        out.push_back(std::move(spikes));
    }
    return out;
}

}  // namespace ldlif
