#include "ldlif/quant.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "ldlif/binary_io.hpp"
#include "ldlif/error.hpp"

namespace ldlif {

void FixedPointFormat::validate() const {
    if (total_bits < 1 || total_bits > 32) throw ParameterError("total_bits must be in [1, 32]");
    if (frac_bits < 0 || frac_bits >= total_bits)
        throw ParameterError("frac_bits must be in [0, total_bits)");
}

double FixedPointFormat::ulp() const noexcept { return std::ldexp(1.0, -frac_bits); }

std::int64_t saturate_to(std::int64_t raw, const FixedPointFormat& fmt) noexcept {
    return std::clamp(raw, fmt.min_raw(), fmt.max_raw());
}

std::int64_t to_fixed(double x, const FixedPointFormat& fmt) {
    if (std::isnan(x)) return 0;
    const double scaled = std::round(std::ldexp(x, fmt.frac_bits));
    if (scaled <= static_cast<double>(fmt.min_raw())) return fmt.min_raw();
    if (scaled >= static_cast<double>(fmt.max_raw())) return fmt.max_raw();
    return static_cast<std::int64_t>(scaled);
}

double from_fixed(std::int64_t raw, const FixedPointFormat& fmt) {
    return std::ldexp(static_cast<double>(raw), -fmt.frac_bits);
}

std::int64_t wrap_to_bits(std::int64_t raw, int bits) noexcept {
    const auto mask = (std::uint64_t{1} << bits) - 1;
    auto u = static_cast<std::uint64_t>(raw) & mask;
    if (u & (std::uint64_t{1} << (bits - 1))) u |= ~mask;
    return static_cast<std::int64_t>(u);
}

bool sign_bit(std::int64_t raw, int bits) noexcept {
    return (static_cast<std::uint64_t>(raw) >> (bits - 1)) & 1U;
}

WeightMatrix QuantizedWeights::dequantize() const {
    WeightMatrix w(rows, cols);
    for (std::size_t i = 0; i < q.size(); ++i) w.data()[i] = q[i] * scale;
    return w;
}

void QuantizedWeights::validate() const {
    if (bits < 2 || bits > 8) throw ParameterError("weight bits must be in [2, 8]");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("weight scale must be positive");
    if (q.size() != rows * cols) throw ShapeError("quantized weight count does not match shape");
    const int lo = -(1 << (bits - 1));
    const int hi = (1 << (bits - 1)) - 1;
    for (auto v : q)
        if (v < lo || v > hi) throw ValidationError("quantized weight outside signed range");
}

QuantizedWeights quantize_weights(const WeightMatrix& w, int bits) {
    if (bits < 2 || bits > 8) throw ParameterError("weight bits must be in [2, 8]");
    const int hi = (1 << (bits - 1)) - 1;
    const int lo = -(1 << (bits - 1));
    double max_abs = 0.0;
    for (double x : w.data()) max_abs = std::max(max_abs, std::abs(x));

    QuantizedWeights out;
    out.rows = w.rows();
    out.cols = w.cols();
    out.bits = bits;
    out.scale = max_abs > 0.0 ? max_abs / hi : 1.0;
    out.q.resize(w.data().size());
    for (std::size_t i = 0; i < out.q.size(); ++i) {
        const double r = std::round(w.data()[i] / out.scale);
        out.q[i] = static_cast<std::int8_t>(std::clamp(r, double(lo), double(hi)));
    }
    return out;
}

void write_quantized(std::ostream& os, const QuantizedWeights& qw) {
    qw.validate();
    bin::put_u32(os, static_cast<std::uint32_t>(qw.bits));
    bin::put_u32(os, static_cast<std::uint32_t>(qw.rows));
    bin::put_u32(os, static_cast<std::uint32_t>(qw.cols));
    bin::put_f64(os, qw.scale);
    os.write(reinterpret_cast<const char*>(qw.q.data()), static_cast<std::streamsize>(qw.q.size()));
    if (!os) throw FormatError("failed writing quantized weights");
}

QuantizedWeights read_quantized(std::istream& is) {
    QuantizedWeights qw;
    qw.bits = static_cast<int>(bin::get_u32(is));
    qw.rows = bin::get_u32(is);
    qw.cols = bin::get_u32(is);
    qw.scale = bin::get_f64(is);
    if (qw.rows * qw.cols > (std::size_t{1} << 32)) throw FormatError("weight blob too large");
    qw.q.resize(qw.rows * qw.cols);
    is.read(reinterpret_cast<char*>(qw.q.data()), static_cast<std::streamsize>(qw.q.size()));
    if (!is) throw FormatError("truncated quantized weight blob");
    qw.validate();
    return qw;
}

void ScalerConfig::validate() const {
    if (shift < 0 || shift > 12) throw ParameterError("scaler shift must be in [0, 12]");
}

MacRange MacRange::for_rows(std::int64_t rows, int weight_bits) noexcept {
    const std::int64_t wmin = -(std::int64_t{1} << (weight_bits - 1));
    const std::int64_t wmax = (std::int64_t{1} << (weight_bits - 1)) - 1;
    return {wmin * rows, wmax * rows};
}

std::int64_t scale_mac(std::int64_t mac_raw, const ScalerConfig& cfg, const FixedPointFormat& fmt,
                       MacRange range) {
    if (!range.contains(mac_raw))
        throw ContractError("MAC sum " + std::to_string(mac_raw) + " outside [" +
                            std::to_string(range.lo) + ", " + std::to_string(range.hi) + "]");
    std::int64_t shifted = mac_raw;
    if (cfg.shift > 0) {
        if (cfg.rounding == Rounding::RoundHalfUp) shifted += std::int64_t{1} << (cfg.shift - 1);
        shifted >>= cfg.shift;  // arithmetic: floor division by 2^shift
    }
    return cfg.saturate ? saturate_to(shifted, fmt) : wrap_to_bits(shifted, fmt.total_bits);
}

}  // namespace ldlif
