#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ldlif/neuron.hpp"

namespace ldlif {

/// Signed two's-complement fixed-point word.
struct FixedPointFormat {
    int total_bits = 10;
    int frac_bits = 4;

    void validate() const;
    std::int64_t min_raw() const noexcept { return -(std::int64_t{1} << (total_bits - 1)); }
    std::int64_t max_raw() const noexcept { return (std::int64_t{1} << (total_bits - 1)) - 1; }
    double ulp() const noexcept;
};

std::int64_t to_fixed(double x, const FixedPointFormat& fmt);
double from_fixed(std::int64_t raw, const FixedPointFormat& fmt);

/// Reduce `raw` modulo 2^bits into the signed range, as a ripple adder would.
std::int64_t wrap_to_bits(std::int64_t raw, int bits) noexcept;
std::int64_t saturate_to(std::int64_t raw, const FixedPointFormat& fmt) noexcept;
/// Two's-complement sign bit of `raw` interpreted at `bits` width.
bool sign_bit(std::int64_t raw, int bits) noexcept;

/// Per-layer symmetric quantisation: w ~= q * scale.
struct QuantizedWeights {
    std::size_t rows = 0;
    std::size_t cols = 0;
    int bits = 4;
    double scale = 1.0;
    std::vector<std::int8_t> q;  // row-major

    std::int8_t operator()(std::size_t r, std::size_t c) const { return q[r * cols + c]; }
    WeightMatrix dequantize() const;
    void validate() const;
};

QuantizedWeights quantize_weights(const WeightMatrix& w, int bits);

/// Flat little-endian layout: u32 bits, u32 rows, u32 cols, f64 scale, then
/// rows*cols signed bytes row-major.
void write_quantized(std::ostream& os, const QuantizedWeights& qw);
QuantizedWeights read_quantized(std::istream& is);

enum class Rounding { Truncate, RoundHalfUp };

struct ScalerConfig {
    int shift = 2;
    Rounding rounding = Rounding::RoundHalfUp;
    bool saturate = true;

    void validate() const;
};

/// Closed range an exact MAC sum can take.
struct MacRange {
    std::int64_t lo;
    std::int64_t hi;

    /// Range of `rows` signed `weight_bits` weights gated by binary inputs.
    static MacRange for_rows(std::int64_t rows, int weight_bits = 4) noexcept;
    bool contains(std::int64_t x) const noexcept { return x >= lo && x <= hi; }
};

/// Arithmetic right shift with the configured rounding, then saturate or wrap
/// into `fmt`. The default range is one 256-row block of 4-bit weights.
std::int64_t scale_mac(std::int64_t mac_raw, const ScalerConfig& cfg, const FixedPointFormat& fmt,
                       MacRange range = MacRange::for_rows(256, 4));

}  // namespace ldlif
