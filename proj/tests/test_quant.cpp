#include <cmath>
#include <limits>
#include <sstream>

#include <doctest.h>

#include "ldlif/error.hpp"
#include "ldlif/quant.hpp"
#include "ldlif/random.hpp"

using namespace ldlif;

namespace {

// Brute force: the integer in range nearest to w / scale, ties away from zero.
int nearest_level(double w, double scale, int bits) {
    const int lo = -(1 << (bits - 1)), hi = (1 << (bits - 1)) - 1;
    int best = lo;
    double best_err = std::numeric_limits<double>::infinity();
    for (int q = lo; q <= hi; ++q) {
        const double err = std::abs(w / scale - q);
        if (err < best_err - 1e-12 || (std::abs(err - best_err) <= 1e-12 && std::abs(q) > std::abs(best))) {
            best = q;
            best_err = err;
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("quant") {

TEST_CASE("quantize_weights examples") {
    auto q = quantize_weights(WeightMatrix::from_rows({{0, 0}}), 4);
    CHECK(q.scale == 1.0);
    CHECK(q.q == std::vector<std::int8_t>{0, 0});

    q = quantize_weights(WeightMatrix::from_rows({{7.0, -8.0}}), 4);
    CHECK(q.scale == doctest::Approx(8.0 / 7.0));
    CHECK(q.q == std::vector<std::int8_t>{6, -7});

    q = quantize_weights(WeightMatrix::from_rows({{1.0, -1.0}}), 3);
    CHECK(q.scale == doctest::Approx(1.0 / 3.0));
    CHECK(q.q == std::vector<std::int8_t>{3, -3});

    CHECK_THROWS_AS(quantize_weights(WeightMatrix(1, 1), 1), ParameterError);
    CHECK_THROWS_AS(quantize_weights(WeightMatrix(1, 1), 9), ParameterError);
}

TEST_CASE("quantisation matches brute force and respects the error bound") {
    Rng rng(17);
    for (int bits : {2, 3, 4, 8}) {
        WeightMatrix w(9, 11);
        for (auto& x : w.data()) x = uniform(rng, -2.0, 1.5);
        const auto q = quantize_weights(w, bits);
        CHECK_NOTHROW(q.validate());
        const auto back = q.dequantize();
        for (std::size_t i = 0; i < w.data().size(); ++i) {
            CHECK(q.q[i] == nearest_level(w.data()[i], q.scale, bits));
            CHECK(std::abs(back.data()[i] - w.data()[i]) <= q.scale / 2 + 1e-12);
        }
    }
}

TEST_CASE("quantized blob round trip and layout") {
    const auto q = quantize_weights(WeightMatrix::from_rows({{0.5, -1.0, 0.25}, {1.0, 0.0, -0.75}}), 4);
    std::stringstream ss;
    write_quantized(ss, q);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == 4 + 4 + 4 + 8 + 6);
    CHECK(static_cast<unsigned char>(bytes[0]) == 4);
    CHECK(static_cast<unsigned char>(bytes[4]) == 2);
    CHECK(static_cast<unsigned char>(bytes[8]) == 3);
    CHECK(static_cast<std::int8_t>(bytes[20 + 1]) == -7);

    const auto back = read_quantized(ss);
    CHECK(back.bits == q.bits);
    CHECK(back.rows == q.rows);
    CHECK(back.cols == q.cols);
    CHECK(back.scale == q.scale);
    CHECK(back.q == q.q);

    std::stringstream truncated(bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(read_quantized(truncated), FormatError);

    std::string bad = bytes;
    bad[20] = 9;  // outside the 4-bit range
    std::stringstream corrupt(bad);
    CHECK_THROWS_AS(read_quantized(corrupt), ValidationError);
}

TEST_CASE("to_fixed examples") {
    const FixedPointFormat f{10, 4};
    CHECK(to_fixed(0.0, f) == 0);
    CHECK(to_fixed(0.5, f) == 8);
    CHECK(to_fixed(from_fixed(f.max_raw(), f) + f.ulp(), f) == f.max_raw());
    CHECK(to_fixed(from_fixed(f.min_raw(), f) - f.ulp(), f) == f.min_raw());
    CHECK(to_fixed(1e300, f) == f.max_raw());
    CHECK(to_fixed(-1e300, f) == f.min_raw());
    CHECK(to_fixed(std::nan(""), f) == 0);
    for (std::int64_t raw = f.min_raw(); raw <= f.max_raw(); ++raw) CHECK(to_fixed(from_fixed(raw, f), f) == raw);
}

TEST_CASE("to_fixed is monotone") {
    const FixedPointFormat f{8, 3};
    std::int64_t prev = to_fixed(-40.0, f);
    for (double x = -40.0; x <= 40.0; x += 0.01) {
        const auto cur = to_fixed(x, f);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("format validation") {
    CHECK_THROWS_AS((FixedPointFormat{0, 0}.validate()), ParameterError);
    CHECK_THROWS_AS((FixedPointFormat{33, 0}.validate()), ParameterError);
    CHECK_THROWS_AS((FixedPointFormat{10, 10}.validate()), ParameterError);
    CHECK_THROWS_AS((FixedPointFormat{10, -1}.validate()), ParameterError);
    CHECK_NOTHROW((FixedPointFormat{32, 31}.validate()));
    CHECK(FixedPointFormat{10, 4}.min_raw() == -512);
    CHECK(FixedPointFormat{10, 4}.max_raw() == 511);
}

TEST_CASE("wrap and sign helpers") {
    CHECK(wrap_to_bits(600, 10) == -424);
    CHECK(wrap_to_bits(-513, 10) == 511);
    CHECK(wrap_to_bits(511, 10) == 511);
    CHECK(wrap_to_bits(1024, 10) == 0);
    for (std::int64_t x = -3000; x <= 3000; ++x) {
        const auto w = wrap_to_bits(x, 10);
        CHECK(w >= -512);
        CHECK(w <= 511);
        CHECK(((x - w) % 1024) == 0);
        CHECK(sign_bit(w, 10) == (w < 0));
    }
}

TEST_CASE("scale_mac examples") {
    const FixedPointFormat f10{10, 4};
    CHECK(scale_mac(0, ScalerConfig{2, Rounding::RoundHalfUp, true}, f10) == 0);
    CHECK(scale_mac(-2048, ScalerConfig{2, Rounding::RoundHalfUp, true}, f10) == -512);
    CHECK(scale_mac(1792, ScalerConfig{1, Rounding::RoundHalfUp, true}, f10) == 511);
    CHECK_THROWS_AS(scale_mac(1793, ScalerConfig{}, f10), ContractError);
    CHECK_THROWS_AS(scale_mac(-2049, ScalerConfig{}, f10), ContractError);
    CHECK_NOTHROW(scale_mac(-4096, ScalerConfig{}, f10, MacRange::for_rows(512)));
}

TEST_CASE("scale_mac rounding modes") {
    const FixedPointFormat f{16, 0};
    const ScalerConfig half{2, Rounding::RoundHalfUp, true};
    const ScalerConfig trunc{2, Rounding::Truncate, true};
    CHECK(scale_mac(6, half, f) == 2);    // 1.5 rounds up
    CHECK(scale_mac(-6, half, f) == -1);  // -1.5 rounds up
    CHECK(scale_mac(5, half, f) == 1);
    CHECK(scale_mac(7, trunc, f) == 1);
    CHECK(scale_mac(-5, trunc, f) == -2);  // arithmetic shift floors
    for (std::int64_t x = -2048; x <= 1792; ++x) {
        CHECK(scale_mac(x, half, f) == static_cast<std::int64_t>(std::floor(x / 4.0 + 0.5)));
        CHECK(scale_mac(x, trunc, f) == static_cast<std::int64_t>(std::floor(x / 4.0)));
    }
}

TEST_CASE("scale_mac identity and wrap") {
    const FixedPointFormat f12{12, 0};
    const ScalerConfig ident{0, Rounding::Truncate, false};
    for (std::int64_t x = -2048; x <= 1792; ++x) CHECK(scale_mac(x, ident, f12) == x);
    const FixedPointFormat f10{10, 0};
    CHECK(scale_mac(1000, ident, f10) == wrap_to_bits(1000, 10));
    CHECK(scale_mac(1000, ScalerConfig{0, Rounding::Truncate, true}, f10) == 511);
    CHECK_THROWS_AS((ScalerConfig{13}.validate()), ParameterError);
    CHECK_THROWS_AS((ScalerConfig{-1}.validate()), ParameterError);
}

TEST_CASE("MAC range soundness") {
    const MacRange r = MacRange::for_rows(256, 4);
    CHECK(r.lo == -2048);
    CHECK(r.hi == 1792);

    // Exhaustive over 3 rows: every weight column and input pattern.
    const MacRange r3 = MacRange::for_rows(3, 4);
    for (int w0 = -8; w0 < 8; ++w0)
        for (int w1 = -8; w1 < 8; ++w1)
            for (int w2 = -8; w2 < 8; ++w2)
                for (int s = 0; s < 8; ++s) {
                    const int sum = (s & 1 ? w0 : 0) + (s & 2 ? w1 : 0) + (s & 4 ? w2 : 0);
                    CHECK(r3.contains(sum));
                }

    Rng rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        std::int64_t sum = 0;
        for (int row = 0; row < 256; ++row)
            if (rng() & 1) sum += static_cast<int>(rng() % 16) - 8;
        CHECK(r.contains(sum));
    }
}

}  // TEST_SUITE
