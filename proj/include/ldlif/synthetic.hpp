#pragma once

#include <cstdint>

#include "ldlif/train.hpp"

namespace ldlif {

/// Poisson-coded pattern classification. Class c owns the neurons
/// [c * width / classes, (c + 1) * width / classes), which fire with
/// probability rate_high per step; every other neuron fires with rate_low.
struct SyntheticParams {
    int classes = 4;
    std::size_t width = 64;
    std::size_t timesteps = 50;
    double rate_high = 0.3;
    double rate_low = 0.05;
    std::size_t samples = 400;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Labels cycle 0, 1, ..., classes-1 so every prefix is near balanced.
Dataset gen_synthetic(const SyntheticParams& p);

}  // namespace ldlif
