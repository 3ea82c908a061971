#include "ldlif/neuron.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include "ldlif/error.hpp"

namespace ldlif {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw ShapeError(std::string(what) + ": length " + std::to_string(a) + " vs " +
                         std::to_string(b));
}

}  // namespace

VLifParams VLifParams::make(double tau_m, double dt, double theta) {
    VLifParams p{tau_m, dt, theta};
    p.validate();
    return p;
}

void VLifParams::validate() const {
    if (!(tau_m > 0.0)) throw ParameterError("v-LIF tau_m must be positive");
    if (!(dt > 0.0) || dt > tau_m) throw ParameterError("v-LIF dt must lie in (0, tau_m]");
    if (!(theta > 0.0)) throw ParameterError("v-LIF theta must be positive");
}

void LdLifParams::validate() const {
    if (!(theta > 0.0)) throw ParameterError("LD-LIF theta must be positive");
    if (!std::isfinite(beta)) throw ParameterError("LD-LIF beta must be finite");
}

double threshold_of(const NeuronParams& p) noexcept {
    return std::visit([](const auto& q) { return q.theta; }, p);
}

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw ShapeError("weight data does not match rows x cols");
}

WeightMatrix WeightMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    WeightMatrix w(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require_same_length(rows[r].size(), cols, "ragged weight rows");
        for (std::size_t c = 0; c < cols; ++c) w(r, c) = rows[r][c];
    }
    return w;
}

double exact_decay(double v0, double t, double tau_m) {
    if (!(tau_m > 0.0)) throw ParameterError("tau_m must be positive");
    if (t < 0.0) throw ParameterError("decay time must be non-negative");
    return v0 * std::exp(-t / tau_m);
}

StepResult v_lif_step(std::span<const double> v, const VLifParams& params,
                      std::span<const double> current) {
    require_same_length(v.size(), current.size(), "v_lif_step");
    const double alpha = params.alpha();
    const double gain = params.gain();
    StepResult out{Vector(v.size()), SpikeVector(v.size(), 0)};
    for (std::size_t n = 0; n < v.size(); ++n) {
        const double pre = alpha * v[n] + gain * current[n];
        if (pre >= params.theta) {
            out.spikes[n] = 1;
            out.v[n] = 0.0;
        } else {
            out.v[n] = pre;
        }
    }
    return out;
}

StepResult ld_lif_step(std::span<const double> v, const LdLifParams& params,
                       std::span<const double> current) {
    require_same_length(v.size(), current.size(), "ld_lif_step");
    StepResult out{Vector(v.size()), SpikeVector(v.size(), 0)};
    for (std::size_t n = 0; n < v.size(); ++n) {
        const double pre = (v[n] - params.beta) + current[n];
        if (pre >= params.theta) {
            out.spikes[n] = 1;
            out.v[n] = 0.0;
        } else {
            out.v[n] = pre;
        }
    }
    return out;
}

Vector synaptic_current(const WeightMatrix& w, std::span<const std::uint8_t> s) {
    require_same_length(w.cols(), s.size(), "synaptic_current");
    Vector out(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto row = w.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < s.size(); ++c)
            if (s[c]) acc += row[c];
        out[r] = acc;
    }
    return out;
}

LayerOutput layer_forward(const WeightMatrix& w, const NeuronParams& params,
                          const SpikeTrain& input, bool keep_membrane) {
    LayerOutput out;
    out.spikes.reserve(input.size());
    Vector v(w.rows(), 0.0);
    for (const auto& s : input) {
        const Vector current = synaptic_current(w, s);
        StepResult step = std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, LdLifParams>)
                    return ld_lif_step(v, p, current);
                else
                    return v_lif_step(v, p, current);
            },
            params);
        v = std::move(step.v);
        out.spikes.push_back(std::move(step.spikes));
        if (keep_membrane) out.membrane.push_back(v);
    }
    return out;
}

double sigmoid_spike(double v_pre, double theta, double width) {
    return 1.0 / (1.0 + std::exp(-(v_pre - theta) / width));
}

double surrogate_grad(double v_pre, double theta, const SurrogateConfig& cfg) {
    const double x = v_pre - theta;
    switch (cfg.kind) {
        case SurrogateKind::Rectangular:
            return std::abs(x) < 0.5 * cfg.width ? 1.0 / cfg.width : 0.0;
        case SurrogateKind::Arctan: {
            const double u = std::numbers::pi * x / cfg.width;
            return 1.0 / (cfg.width * (1.0 + u * u));
        }
        case SurrogateKind::Sigmoid: {
            const double s = sigmoid_spike(v_pre, theta, cfg.width);
            return s * (1.0 - s) / cfg.width;
        }
    }
    return 0.0;
}

}  // namespace ldlif
