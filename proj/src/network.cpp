#include "ldlif/network.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "ldlif/error.hpp"
#include "ldlif/random.hpp"

namespace ldlif {

void ConvGeometry::validate() const {
    if (in_channels < 1 || in_height < 1 || in_width < 1 || out_channels < 1)
        throw ParameterError("conv dimensions must be positive");
    if (kernel < 1 || stride < 1 || padding < 0) throw ParameterError("conv kernel/stride/padding invalid");
    if (out_height() < 1 || out_width() < 1) throw ParameterError("conv kernel larger than padded input");
}

std::size_t ConvGeometry::in_dim() const noexcept {
    return static_cast<std::size_t>(in_channels) * in_height * in_width;
}

std::size_t ConvGeometry::out_dim() const noexcept {
    return static_cast<std::size_t>(out_channels) * out_height() * out_width();
}

std::size_t ConvGeometry::kernel_size() const noexcept {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
}

ConvLowering lower_conv(const ConvGeometry& g) {
    g.validate();
    ConvLowering low;
    low.rows = g.out_dim();
    low.cols = g.in_dim();
    const int oh = g.out_height();
    const int ow = g.out_width();
    for (int oc = 0; oc < g.out_channels; ++oc)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const auto out = static_cast<std::size_t>((oc * oh + oy) * ow + ox);
                for (int ic = 0; ic < g.in_channels; ++ic)
                    for (int ky = 0; ky < g.kernel; ++ky)
                        for (int kx = 0; kx < g.kernel; ++kx) {
                            const int iy = oy * g.stride - g.padding + ky;
                            const int ix = ox * g.stride - g.padding + kx;
                            if (iy < 0 || iy >= g.in_height || ix < 0 || ix >= g.in_width) continue;
                            const auto in = static_cast<std::size_t>((ic * g.in_height + iy) * g.in_width + ix);
                            const auto k = static_cast<std::size_t>(((oc * g.in_channels + ic) * g.kernel + ky) * g.kernel + kx);
                            low.taps.push_back({out, in, k});
                        }
            }
    return low;
}

WeightMatrix ConvLowering::expand(const std::vector<double>& kernel) const {
    WeightMatrix w(rows, cols);
    for (const auto& tap : taps) w(tap.out, tap.in) = kernel[tap.kernel_index];
    return w;
}

std::vector<double> ConvLowering::fold(const WeightMatrix& dense_grad, std::size_t kernel_size) const {
    std::vector<double> g(kernel_size, 0.0);
    for (const auto& tap : taps) g[tap.kernel_index] += dense_grad(tap.out, tap.in);
    return g;
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out, NeuronParams neuron) {
    return {LayerType::Dense, in, out, neuron, std::nullopt};
}

LayerSpec LayerSpec::convolution(const ConvGeometry& g, NeuronParams neuron) {
    g.validate();
    return {LayerType::Conv, g.in_dim(), g.out_dim(), neuron, g};
}

void NetworkSpec::validate() const {
    if (layers.empty()) throw ParameterError("network has no layers");
    if (timesteps < 1) throw ParameterError("network needs at least one timestep");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.in_dim == 0 || l.out_dim == 0) throw ParameterError("layer " + std::to_string(i) + " has zero width");
        if (i > 0 && layers[i - 1].out_dim != l.in_dim)
            throw ShapeError("layer " + std::to_string(i) + " input width does not match previous output");
        if (l.type == LayerType::Conv) {
            if (!l.conv) throw ParameterError("conv layer " + std::to_string(i) + " lacks geometry");
            l.conv->validate();
            if (l.conv->in_dim() != l.in_dim || l.conv->out_dim() != l.out_dim)
                throw ShapeError("conv layer " + std::to_string(i) + " geometry disagrees with its widths");
        }
        std::visit([](const auto& p) { p.validate(); }, l.neuron);
    }
}

std::uint64_t NetworkSpec::hash() const {
    std::ostringstream os;
    os << "T" << timesteps;
    for (const auto& l : layers) {
        os << '|' << (l.type == LayerType::Dense ? "dense" : "conv") << ':' << l.in_dim << 'x' << l.out_dim
           << ':' << (std::holds_alternative<LdLifParams>(l.neuron) ? "ld" : "v");
        if (l.conv) {
            const auto& g = *l.conv;
            os << ':' << g.in_channels << ',' << g.in_height << ',' << g.in_width << ',' << g.out_channels
               << ',' << g.kernel << ',' << g.stride << ',' << g.padding;
        }
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::size_t> fan_out(const LayerSpec& layer) {
    if (layer.type == LayerType::Dense) return std::vector<std::size_t>(layer.in_dim, layer.out_dim);
    std::vector<std::size_t> f(layer.in_dim, 0);
    for (const auto& tap : lower_conv(*layer.conv).taps) ++f[tap.in];
    return f;
}

std::vector<double> NetworkParams::betas() const {
    std::vector<double> b;
    for (const auto& l : layers)
        b.push_back(std::holds_alternative<LdLifParams>(l.neuron) ? std::get<LdLifParams>(l.neuron).beta : 0.0);
    return b;
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed, double gain) {
    spec.validate();
    Rng rng(seed);
    NetworkParams p;
    for (const auto& l : spec.layers) {
        LayerParams lp;
        lp.neuron = l.neuron;
        if (l.type == LayerType::Conv) {
            const auto& g = *l.conv;
            const double fan_in = static_cast<double>(g.in_channels) * g.kernel * g.kernel;
            const double a = gain * std::sqrt(3.0 / fan_in);
            lp.kernel.resize(g.kernel_size());
            for (auto& k : lp.kernel) k = uniform(rng, -a, a);
            lp.weights = lower_conv(g).expand(lp.kernel);
        } else {
            const double a = gain * std::sqrt(3.0 / static_cast<double>(l.in_dim));
            lp.weights = WeightMatrix(l.out_dim, l.in_dim);
            for (auto& w : lp.weights.data()) w = uniform(rng, -a, a);
        }
        p.layers.push_back(std::move(lp));
    }
    return p;
}

void sync_conv_weights(const NetworkSpec& spec, NetworkParams& params) {
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
        if (spec.layers[i].type == LayerType::Conv)
            params.layers[i].weights = lower_conv(*spec.layers[i].conv).expand(params.layers[i].kernel);
}

}  // namespace ldlif
