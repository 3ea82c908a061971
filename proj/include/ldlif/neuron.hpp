#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace ldlif {

using Vector = std::vector<double>;
using SpikeVector = std::vector<std::uint8_t>;
/// Indexed [timestep][neuron].
using SpikeTrain = std::vector<SpikeVector>;

/// Exponential-leak neuron discretised with forward Euler.
struct VLifParams {
    double tau_m = 2.0;
    double dt = 1.0;
    double theta = 1.0;

    /// Validates tau_m > 0 and 0 < dt <= tau_m.
    static VLifParams make(double tau_m, double dt, double theta);
    void validate() const;
    /// Per-step decay factor 1 - dt / tau_m.
    double alpha() const noexcept { return 1.0 - dt / tau_m; }
    double gain() const noexcept { return dt / tau_m; }
};

/// Linear-decay neuron: a constant beta is subtracted every step.
/// beta is shared by every neuron in a layer and may be negative.
struct LdLifParams {
    double beta = 0.2;
    double theta = 1.0;
    bool beta_learnable = true;

    void validate() const;
};

using NeuronParams = std::variant<LdLifParams, VLifParams>;

double threshold_of(const NeuronParams& p) noexcept;

/// Dense matrix, rows are output neurons and columns input neurons.
class WeightMatrix {
public:
    WeightMatrix() = default;
    WeightMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    static WeightMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class SurrogateKind { Rectangular, Arctan, Sigmoid };

struct SurrogateConfig {
    SurrogateKind kind = SurrogateKind::Arctan;
    double width = 1.0;
};

struct StepResult {
    Vector v;
    SpikeVector spikes;
};

/// v0 * exp(-t / tau_m): the closed-form leak with no input.
double exact_decay(double v0, double t, double tau_m);

/// One forward-Euler step. `current` is the raw summed synaptic input; the
/// dt / tau_m gain is applied here. Spikes when the updated potential >= theta,
/// and spiking neurons reset to zero.
StepResult v_lif_step(std::span<const double> v, const VLifParams& params,
                      std::span<const double> current);

/// One linear-decay step: v - beta + current, then threshold (>=) and reset to zero.
StepResult ld_lif_step(std::span<const double> v, const LdLifParams& params,
                       std::span<const double> current);

/// w * s for a binary s, computed as a masked row sum.
Vector synaptic_current(const WeightMatrix& w, std::span<const std::uint8_t> s);

struct LayerOutput {
    SpikeTrain spikes;
    /// Stored potential after each step (post reset). Empty unless requested.
    std::vector<Vector> membrane;
};

/// Runs a layer over every timestep of `input`, starting from v = 0.
LayerOutput layer_forward(const WeightMatrix& w, const NeuronParams& params,
                          const SpikeTrain& input, bool keep_membrane = false);

/// Pseudo-derivative of the Heaviside spike function, evaluated at v_pre.
/// Every kind peaks at v_pre == theta and integrates to one.
double surrogate_grad(double v_pre, double theta, const SurrogateConfig& cfg);

/// Smooth spike function whose derivative is the Sigmoid surrogate.
double sigmoid_spike(double v_pre, double theta, double width);

}  // namespace ldlif
