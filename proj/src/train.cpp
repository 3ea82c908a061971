#include "ldlif/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ldlif/error.hpp"
#include "ldlif/random.hpp"

namespace ldlif {

void TrainConfig::validate() const {
    if (epochs < 0) throw ParameterError("epochs must be non-negative");
    if (batch_size < 1) throw ParameterError("batch size must be positive");
    if (!(lr_weights >= 0.0) || !(lr_beta >= 0.0)) throw ParameterError("learning rates must be non-negative");
    if (!(surrogate.width > 0.0)) throw ParameterError("surrogate width must be positive");
    if (!(logit_scale > 0.0)) throw ParameterError("logit scale must be positive");
}

int argmax_count(const std::vector<int>& counts) {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace {

// Everything the backward pass needs from one layer's forward pass.
struct LayerTape {
    std::vector<Vector> x;      // input activations per step
    std::vector<Vector> v_pre;  // potential before threshold/reset
    std::vector<Vector> s;      // spike activations (0/1, or sigmoid in smooth mode)
};

struct ForwardPass {
    std::vector<LayerTape> layers;
    Vector counts;  // output spike counts summed over time
};

void matvec_into(const WeightMatrix& w, const Vector& x, Vector& out) {
    std::vector<std::size_t> active;
    for (std::size_t c = 0; c < x.size(); ++c)
        if (x[c] != 0.0) active.push_back(c);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto row = w.row(r);
        double acc = 0.0;
        for (auto c : active) acc += row[c] * x[c];
        out[r] = acc;
    }
}

ForwardPass run_forward(const NetworkSpec& spec, const NetworkParams& params, const SpikeTrain& input,
                        const TrainConfig& cfg) {
    const std::size_t T = input.size();
    ForwardPass fp;
    fp.layers.resize(spec.layers.size());

    std::vector<Vector> x(T);
    for (std::size_t t = 0; t < T; ++t) {
        if (input[t].size() != spec.input_dim()) throw ShapeError("sample width does not match network input");
        x[t].assign(input[t].begin(), input[t].end());
    }

    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const auto& lp = params.layers[l];
        const std::size_t n = spec.layers[l].out_dim;
        const double theta = threshold_of(lp.neuron);
        LayerTape& tape = fp.layers[l];
        tape.x = std::move(x);
        tape.v_pre.assign(T, Vector(n));
        tape.s.assign(T, Vector(n));
        Vector v(n, 0.0), current(n);
        for (std::size_t t = 0; t < T; ++t) {
            matvec_into(lp.weights, tape.x[t], current);
            auto& pre = tape.v_pre[t];
            if (const auto* ld = std::get_if<LdLifParams>(&lp.neuron)) {
                for (std::size_t i = 0; i < n; ++i) pre[i] = (v[i] - ld->beta) + current[i];
            } else {
                const auto& vp = std::get<VLifParams>(lp.neuron);
                const double alpha = vp.alpha(), gain = vp.gain();
                for (std::size_t i = 0; i < n; ++i) pre[i] = alpha * v[i] + gain * current[i];
            }
            auto& s = tape.s[t];
            for (std::size_t i = 0; i < n; ++i) {
                if (cfg.smooth_forward) {
                    s[i] = sigmoid_spike(pre[i], theta, cfg.surrogate.width);
                    v[i] = pre[i] * (1.0 - s[i]);
                } else {
                    s[i] = pre[i] >= theta ? 1.0 : 0.0;
                    v[i] = s[i] != 0.0 ? 0.0 : pre[i];
                }
            }
        }
        x = tape.s;
    }
    fp.counts.assign(spec.output_dim(), 0.0);
    for (const auto& s : fp.layers.back().s)
        for (std::size_t k = 0; k < s.size(); ++k) fp.counts[k] += s[k];
    return fp;
}

struct Readout {
    double loss;
    Vector probs;
};

Readout cross_entropy(const Vector& counts, int label, double T, double logit_scale) {
    if (label < 0 || static_cast<std::size_t>(label) >= counts.size())
        throw ParameterError("label " + std::to_string(label) + " outside output width");
    Vector z(counts.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = logit_scale * counts[k] / T;
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double zk : z) denom += std::exp(zk - zmax);
    Readout r{0.0, Vector(z.size())};
    for (std::size_t k = 0; k < z.size(); ++k) r.probs[k] = std::exp(z[k] - zmax) / denom;
    r.loss = -(z[static_cast<std::size_t>(label)] - zmax - std::log(denom));
    return r;
}

int predict(const Vector& counts) {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Gradients zero_gradients(const NetworkSpec& spec) {
    Gradients g;
    for (const auto& l : spec.layers) {
        g.weights.emplace_back(l.out_dim, l.in_dim);
        g.kernels.emplace_back(l.type == LayerType::Conv ? l.conv->kernel_size() : 0, 0.0);
        g.beta.push_back(0.0);
    }
    return g;
}

}  // namespace

double sample_loss(const NetworkSpec& spec, const NetworkParams& params, const LabeledSample& sample,
                   const TrainConfig& cfg) {
    const ForwardPass fp = run_forward(spec, params, sample.input, cfg);
    return cross_entropy(fp.counts, sample.label, static_cast<double>(sample.input.size()), cfg.logit_scale).loss;
}

Gradients loss_and_gradients(const NetworkSpec& spec, const NetworkParams& params,
                             const LabeledSample& sample, const TrainConfig& cfg) {
    const std::size_t T = sample.input.size();
    if (T == 0) throw ParameterError("cannot train on an empty spike train");
    const ForwardPass fp = run_forward(spec, params, sample.input, cfg);
    const Readout ro = cross_entropy(fp.counts, sample.label, static_cast<double>(T), cfg.logit_scale);

    Gradients g = zero_gradients(spec);
    g.loss = ro.loss;
    g.prediction = predict(fp.counts);

    // d loss / d s_t for the layer currently being processed, top layer first.
    std::vector<Vector> grad_s(T, Vector(spec.output_dim()));
    for (std::size_t k = 0; k < spec.output_dim(); ++k) {
        const double y = static_cast<std::size_t>(sample.label) == k ? 1.0 : 0.0;
        const double dc = cfg.logit_scale / static_cast<double>(T) * (ro.probs[k] - y);
        for (auto& gs : grad_s) gs[k] = dc;
    }

    for (std::size_t li = spec.layers.size(); li-- > 0;) {
        const auto& lp = params.layers[li];
        const auto& tape = fp.layers[li];
        const std::size_t n = spec.layers[li].out_dim;
        const std::size_t in = spec.layers[li].in_dim;
        const double theta = threshold_of(lp.neuron);
        const auto* ld = std::get_if<LdLifParams>(&lp.neuron);
        const double carry_gain = ld ? 1.0 : std::get<VLifParams>(lp.neuron).alpha();
        const double input_gain = ld ? 1.0 : std::get<VLifParams>(lp.neuron).gain();
        const bool need_input_grad = li > 0;

        SurrogateConfig surrogate = cfg.surrogate;
        if (cfg.smooth_forward) surrogate.kind = SurrogateKind::Sigmoid;

        std::vector<Vector> grad_x(need_input_grad ? T : 0, Vector(in, 0.0));
        Vector grad_v(n, 0.0);  // d loss / d v_t flowing back from step t+1
        Vector grad_current(n);
        auto& gw = g.weights[li];
        for (std::size_t t = T; t-- > 0;) {
            const auto& pre = tape.v_pre[t];
            const auto& s = tape.s[t];
            double beta_acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ds = surrogate_grad(pre[i], theta, surrogate);
                double through_spike = grad_s[t][i];
                if (!cfg.detach_reset) through_spike -= grad_v[i] * pre[i];
                const double grad_pre = grad_v[i] * (1.0 - s[i]) + through_spike * ds;
                beta_acc -= grad_pre;
                grad_current[i] = input_gain * grad_pre;
                grad_v[i] = carry_gain * grad_pre;
            }
            if (ld) g.beta[li] += beta_acc;

            const auto& x = tape.x[t];
            for (std::size_t c = 0; c < in; ++c) {
                if (x[c] == 0.0) continue;
                for (std::size_t r = 0; r < n; ++r) gw(r, c) += grad_current[r] * x[c];
            }
            if (need_input_grad) {
                auto& gx = grad_x[t];
                for (std::size_t r = 0; r < n; ++r) {
                    if (grad_current[r] == 0.0) continue;
                    const auto row = lp.weights.row(r);
                    for (std::size_t c = 0; c < in; ++c) gx[c] += row[c] * grad_current[r];
                }
            }
        }
        if (spec.layers[li].type == LayerType::Conv)
            g.kernels[li] = lower_conv(*spec.layers[li].conv).fold(gw, spec.layers[li].conv->kernel_size());
        if (need_input_grad) grad_s = std::move(grad_x);
    }
    return g;
}

TrainResult bptt_train(const NetworkSpec& spec, const Dataset& data, const TrainConfig& cfg,
                       const EpochCallback& on_epoch) {
    spec.validate();
    return bptt_train(spec, init_params(spec, cfg.seed, cfg.init_gain), data, cfg, on_epoch);
}

TrainResult bptt_train(const NetworkSpec& spec, NetworkParams params, const Dataset& data,
                       const TrainConfig& cfg, const EpochCallback& on_epoch) {
    spec.validate();
    cfg.validate();
    if (data.empty()) throw ParameterError("training set is empty");

    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            Gradients acc = zero_gradients(spec);
            for (std::size_t b = start; b < stop; ++b) {
                const LabeledSample& sample = data[order[b]];
                Gradients g = loss_and_gradients(spec, params, sample, cfg);
                if (!std::isfinite(g.loss))
                    throw TrainingError("non-finite loss in epoch " + std::to_string(epoch), epoch);
                loss_sum += g.loss;
                if (g.prediction == sample.label) ++correct;
                for (std::size_t l = 0; l < spec.layers.size(); ++l) {
                    auto& dst = acc.weights[l].data();
                    const auto& src = g.weights[l].data();
                    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
                    for (std::size_t i = 0; i < acc.kernels[l].size(); ++i) acc.kernels[l][i] += g.kernels[l][i];
                    acc.beta[l] += g.beta[l];
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (std::size_t l = 0; l < spec.layers.size(); ++l) {
                auto& lp = params.layers[l];
                if (spec.layers[l].type == LayerType::Conv) {
                    for (std::size_t i = 0; i < lp.kernel.size(); ++i)
                        lp.kernel[i] -= cfg.lr_weights * acc.kernels[l][i] * inv;
                } else {
                    auto& w = lp.weights.data();
                    const auto& gw = acc.weights[l].data();
                    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.lr_weights * gw[i] * inv;
                }
                if (auto* ld = std::get_if<LdLifParams>(&lp.neuron); ld && ld->beta_learnable)
                    ld->beta -= cfg.lr_beta * acc.beta[l] * inv;
            }
            sync_conv_weights(spec, params);
        }
        EpochMetrics m{epoch, loss_sum / static_cast<double>(data.size()),
                       static_cast<double>(correct) / static_cast<double>(data.size()), params.betas()};
        if (!std::isfinite(m.loss)) throw TrainingError("non-finite loss in epoch " + std::to_string(epoch), epoch);
        if (on_epoch) on_epoch(m);
        result.history.push_back(std::move(m));
    }

    std::size_t correct = 0;
    TrainConfig hard = cfg;
    hard.smooth_forward = false;
    for (const auto& sample : data) {
        const ForwardPass fp = run_forward(spec, params, sample.input, hard);
        if (predict(fp.counts) == sample.label) ++correct;
    }
    result.final_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    result.params = std::move(params);
    return result;
}

}  // namespace ldlif
