#include "ldlif/synthetic.hpp"

#include "ldlif/error.hpp"
#include "ldlif/random.hpp"

namespace ldlif {

void SyntheticParams::validate() const {
    if (classes < 1) throw ParameterError("need at least one class");
    if (width < static_cast<std::size_t>(classes)) throw ParameterError("width must be at least the class count");
    if (!(rate_low >= 0.0 && rate_high <= 1.0 && rate_low < rate_high))
        throw ParameterError("rates must satisfy 0 <= rate_low < rate_high <= 1");
}

Dataset gen_synthetic(const SyntheticParams& p) {
    p.validate();
    Rng rng(p.seed);
    const std::size_t group = p.width / static_cast<std::size_t>(p.classes);
    Dataset data;
    data.reserve(p.samples);
    for (std::size_t i = 0; i < p.samples; ++i) {
        LabeledSample s;
        s.label = static_cast<int>(i % static_cast<std::size_t>(p.classes));
        const std::size_t lo = static_cast<std::size_t>(s.label) * group;
        const std::size_t hi = lo + group;
        s.input.assign(p.timesteps, SpikeVector(p.width, 0));
        for (auto& row : s.input)
            for (std::size_t n = 0; n < p.width; ++n)
                row[n] = bernoulli(rng, (n >= lo && n < hi) ? p.rate_high : p.rate_low) ? 1 : 0;
        data.push_back(std::move(s));
    }
    return data;
}

}  // namespace ldlif
