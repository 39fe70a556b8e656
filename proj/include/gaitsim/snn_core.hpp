#pragma once

// Conductance-driven leaky integrate-and-fire neurons stepped with a fixed
// forward Euler step, and the six-neuron output layer fed by pooled frames.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gaitsim/event_core.hpp"
#include "gaitsim/legs.hpp"

namespace gaitsim {

struct NeuronParams {
    double tau_v = 4.0;        // s, membrane time constant
    double tau_ge = 1.2;       // s, excitatory conductance time constant
    double v_rest = -65.0;     // mV
    double v_exc = -30.0;      // mV, excitatory reversal potential
    double v_thresh = -52.0;   // mV
    double refractory = 2.0;   // s
    double dt = 0.04;          // s, one frame per step

    // Throws ConfigError on non-positive time constants or v_rest not below
    // both v_thresh and v_exc.
    void validate() const;
};

struct NeuronState {
    double v = -65.0;
    double g_e = 0.0;
    double refractory_until = -1.0;  // s; the neuron is refractory while now < refractory_until

    static NeuronState at_rest(const NeuronParams& p) { return {p.v_rest, 0.0, -1.0}; }
    bool refractory(double now) const { return now < refractory_until; }
};

// One real-valued weight grid per output neuron, all the size of the pooled
// input frame.
class WeightMap {
public:
    WeightMap() = default;
    WeightMap(std::size_t neurons, std::size_t width, std::size_t height);

    std::size_t neurons() const { return neurons_; }
    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t cells() const { return width_ * height_; }

    std::span<const double> row(std::size_t neuron) const
    {
        return {values_.data() + neuron * cells(), cells()};
    }
    std::span<double> row(std::size_t neuron) { return {values_.data() + neuron * cells(), cells()}; }
    std::span<const double> values() const { return values_; }

    double& at(std::size_t neuron, std::size_t x, std::size_t y) { return values_[neuron * cells() + y * width_ + x]; }
    double at(std::size_t neuron, std::size_t x, std::size_t y) const
    {
        return values_[neuron * cells() + y * width_ + x];
    }

    friend bool operator==(const WeightMap&, const WeightMap&) = default;

private:
    std::size_t neurons_ = 0;
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> values_;
};

// Text format: "<neurons> <width> <height>" then, per neuron, `height` rows of
// `width` values written with 17 significant digits (exact round-trip).
void write_weights(std::ostream& out, const WeightMap& weights);
WeightMap read_weights(std::istream& in);

// g_e += sum of the neuron's weights at the frame's set bits. Inputs reaching
// a refractory neuron are discarded by the caller (step_network).
NeuronState inject(NeuronState state, std::span<const double> weights, const BinaryFrame& frame);

struct NeuronStep {
    NeuronState state;
    bool spiked = false;
};

NeuronStep step_neuron(const NeuronState& state, const NeuronParams& params, double now);

using NetworkState = std::array<NeuronState, kLegCount>;

struct NetworkStep {
    NetworkState states;
    LegSet spikes;
};

NetworkStep step_network(const NetworkState& states, const WeightMap& weights, const BinaryFrame& frame,
                         const NeuronParams& params, double now);

NetworkState network_at_rest(const NeuronParams& params);

// Drives a fresh network with one pooled frame per step. The raster holds one
// entry per step, including steps without spikes. When `potentials` is given
// it receives the membrane potential of every neuron after each step.
SpikeRaster run_network(std::span<const BinaryFrame> frames, const WeightMap& weights, const NeuronParams& params,
                        std::vector<std::array<double, kLegCount>>* potentials = nullptr);

// Raster export: one `time_s neuron` line per spike.
void write_raster(std::ostream& out, const SpikeRaster& raster);
SpikeRaster read_raster(std::istream& in, double dt);

} // namespace gaitsim
