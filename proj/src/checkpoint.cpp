#include "ldlif/checkpoint.hpp"

#include <fstream>
#include <string>

#include "ldlif/binary_io.hpp"
#include "ldlif/error.hpp"

namespace ldlif {

namespace {
constexpr char kCheckpointMagic[5] = "LDCK";
constexpr char kFloatMagic[5] = "FLTW";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

Checkpoint Checkpoint::from_params(const NetworkSpec& spec, const NetworkParams& params, int bits,
                                   bool keep_float) {
    spec.validate();
    if (params.layers.size() != spec.layers.size()) throw ShapeError("parameter and spec layer counts differ");
    Checkpoint ck;
    ck.spec_hash = spec.hash();
    std::vector<WeightMatrix> fw;
    for (const auto& l : params.layers) {
        ck.weights.push_back(quantize_weights(l.weights, bits));
        const auto* ld = std::get_if<LdLifParams>(&l.neuron);
        ck.beta.push_back(ld ? ld->beta : 0.0);
        ck.theta.push_back(threshold_of(l.neuron));
        if (keep_float) fw.push_back(l.weights);
    }
    if (keep_float) ck.float_weights = std::move(fw);
    return ck;
}

void Checkpoint::check_spec(const NetworkSpec& spec) const {
    if (spec_hash != spec.hash()) throw ParameterError("checkpoint was written for a different network");
    if (weights.size() != spec.layers.size()) throw FormatError("checkpoint layer count differs from network");
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (weights[l].rows != spec.layers[l].out_dim || weights[l].cols != spec.layers[l].in_dim)
            throw FormatError("checkpoint layer " + std::to_string(l) + " has the wrong shape");
}

NetworkParams Checkpoint::to_params(const NetworkSpec& spec) const {
    check_spec(spec);
    if (!float_weights) throw StateError("checkpoint carries no float weights");
    NetworkParams p;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        LayerParams lp;
        lp.weights = (*float_weights)[l];
        lp.neuron = spec.layers[l].neuron;
        std::visit([&](auto& n) { n.theta = theta[l]; }, lp.neuron);
        if (auto* ld = std::get_if<LdLifParams>(&lp.neuron)) ld->beta = beta[l];
        p.layers.push_back(std::move(lp));
    }
    return p;
}

QuantizedNetwork Checkpoint::to_quantized(const NetworkSpec& spec, const QuantSettings& settings) const {
    check_spec(spec);
    for (std::size_t l = 0; l < spec.layers.size(); ++l)
        if (!std::holds_alternative<LdLifParams>(spec.layers[l].neuron))
            throw ParameterError("integer inference supports LD-LIF layers only (layer " + std::to_string(l) + ")");
    return assemble_quantized(weights, beta, theta, settings);
}

void write_checkpoint(std::ostream& os, const Checkpoint& ck) {
    bin::put_magic(os, kCheckpointMagic);
    bin::put_u32(os, kCheckpointVersion);
    bin::put_u64(os, ck.spec_hash);
    bin::put_u32(os, static_cast<std::uint32_t>(ck.weights.size()));
    for (std::size_t l = 0; l < ck.weights.size(); ++l) {
        write_quantized(os, ck.weights[l]);
        bin::put_f64(os, ck.beta[l]);
        bin::put_f64(os, ck.theta[l]);
    }
    if (ck.float_weights) {
        bin::put_magic(os, kFloatMagic);
        for (const auto& w : *ck.float_weights)
            for (double x : w.data()) bin::put_f64(os, x);
    }
    if (!os) throw FormatError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& is) {
    if (!bin::check_magic(is, kCheckpointMagic)) throw FormatError("bad magic: not an LDCK checkpoint");
    const std::uint32_t version = bin::get_u32(is);
    if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ck;
    ck.spec_hash = bin::get_u64(is);
    const std::uint32_t layers = bin::get_u32(is);
    for (std::uint32_t l = 0; l < layers; ++l) {
        ck.weights.push_back(read_quantized(is));
        ck.beta.push_back(bin::get_f64(is));
        ck.theta.push_back(bin::get_f64(is));
    }
    if (is.peek() == std::char_traits<char>::eof()) return ck;
    if (!bin::check_magic(is, kFloatMagic)) throw FormatError("unknown checkpoint trailer");
    std::vector<WeightMatrix> fw;
    for (const auto& q : ck.weights) {
        WeightMatrix w(q.rows, q.cols);
        for (double& x : w.data()) x = bin::get_f64(is);
        fw.push_back(std::move(w));
    }
    ck.float_weights = std::move(fw);
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot create " + path.string());
    write_checkpoint(os, ck);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    return read_checkpoint(is);
}

}  // namespace ldlif
