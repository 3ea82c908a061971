#pragma once

// Checkpoint layout (little-endian):
//   char[4] "LDCK" | u32 version (=1) | u64 spec hash | u32 layer count
//   per layer: quantised weight blob (see write_quantized) | f64 beta | f64 theta
//   optional trailer: char[4] "FLTW" then, per layer, rows*cols f64 weights row-major.
//
// The trailer carries the unquantised weights so float-mode evaluation can
// run from the same file. beta is written as 0 for v-LIF layers.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ldlif/evaluate.hpp"
#include "ldlif/network.hpp"
#include "ldlif/quant.hpp"

namespace ldlif {

struct Checkpoint {
    std::uint64_t spec_hash = 0;
    std::vector<QuantizedWeights> weights;
    std::vector<double> beta;
    std::vector<double> theta;
    std::optional<std::vector<WeightMatrix>> float_weights;

    static Checkpoint from_params(const NetworkSpec& spec, const NetworkParams& params, int bits,
                                  bool keep_float = true);

    /// Throws ParameterError when the checkpoint was written for another topology.
    void check_spec(const NetworkSpec& spec) const;
    /// Needs the float trailer.
    NetworkParams to_params(const NetworkSpec& spec) const;
    QuantizedNetwork to_quantized(const NetworkSpec& spec, const QuantSettings& settings) const;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ck);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ldlif
