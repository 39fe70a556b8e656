#include "gaitsim/snn_core.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace gaitsim {

void NeuronParams::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw ConfigError(std::string(name) + " must be positive");
        }
    };
    positive(tau_v, "tau_v");
    positive(tau_ge, "tau_ge");
    positive(dt, "dt");
    positive(refractory, "refractory");
    if (!(v_rest < v_thresh)) {
        throw ConfigError("v_rest must be below v_thresh");
    }
    if (!(v_rest < v_exc)) {
        throw ConfigError("v_rest must be below v_exc");
    }
}

WeightMap::WeightMap(std::size_t neurons, std::size_t width, std::size_t height)
    : neurons_(neurons), width_(width), height_(height), values_(neurons * width * height, 0.0)
{
}

void write_weights(std::ostream& out, const WeightMap& weights)
{
    out << weights.neurons() << ' ' << weights.width() << ' ' << weights.height() << '\n';
    char buf[40];
    for (std::size_t n = 0; n < weights.neurons(); ++n) {
        for (std::size_t y = 0; y < weights.height(); ++y) {
            for (std::size_t x = 0; x < weights.width(); ++x) {
                std::snprintf(buf, sizeof buf, "%.17g", weights.at(n, x, y));
                if (x) {
                    out << ' ';
                }
                out << buf;
            }
            out << '\n';
        }
    }
}

WeightMap read_weights(std::istream& in)
{
    std::size_t n = 0;
    std::size_t w = 0;
    std::size_t h = 0;
    if (!(in >> n >> w >> h) || n == 0 || w == 0 || h == 0) {
        throw DataError("weight file: malformed header");
    }
    WeightMap weights(n, w, h);
    std::string tok;
    for (std::size_t i = 0; i < n * w * h; ++i) {
        if (!(in >> tok)) {
            throw DataError("weight file: expected " + std::to_string(n * w * h) + " values, got " +
                            std::to_string(i));
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) {
            throw DataError("weight file: bad value '" + tok + "'");
        }
        weights.at(i / (w * h), i % w, (i / w) % h) = v;
    }
    if (in >> tok) {
        throw DataError("weight file: trailing data '" + tok + "'");
    }
    return weights;
}

NeuronState inject(NeuronState state, std::span<const double> weights, const BinaryFrame& frame)
{
    if (weights.size() != frame.size()) {
        throw DimensionError("weight row has " + std::to_string(weights.size()) + " cells, frame has " +
                             std::to_string(frame.size()));
    }
    const auto bits = frame.bits();
    double drive = 0.0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            drive += weights[i];
        }
    }
    state.g_e = std::max(0.0, state.g_e + drive);
    return state;
}

NeuronStep step_neuron(const NeuronState& state, const NeuronParams& params, double now)
{
    NeuronStep out{state, false};
    // Conductance decays in every step, refractory or not.
    out.state.g_e = std::max(0.0, state.g_e + (params.dt / params.tau_ge) * (-state.g_e));

    if (state.refractory(now)) {
        out.state.v = params.v_rest;
        return out;
    }
    const double leak = -(state.v - params.v_rest);
    const double excitation = -state.g_e * (state.v - params.v_exc);
    out.state.v = state.v + (params.dt / params.tau_v) * (leak + excitation);
    if (out.state.v >= params.v_thresh) {
        out.spiked = true;
        out.state.v = params.v_rest;
        out.state.refractory_until = now + params.refractory;
    }
    return out;
}

NetworkState network_at_rest(const NeuronParams& params)
{
    NetworkState s;
    s.fill(NeuronState::at_rest(params));
    return s;
}

NetworkStep step_network(const NetworkState& states, const WeightMap& weights, const BinaryFrame& frame,
                         const NeuronParams& params, double now)
{
    if (weights.neurons() != kLegCount) {
        throw DimensionError("network expects " + std::to_string(kLegCount) + " weight rows, got " +
                             std::to_string(weights.neurons()));
    }
    if (weights.width() != frame.width() || weights.height() != frame.height()) {
        throw DimensionError("weights are " + std::to_string(weights.width()) + "x" +
                             std::to_string(weights.height()) + " but the frame is " +
                             std::to_string(frame.width()) + "x" + std::to_string(frame.height()));
    }
    NetworkStep out;
    for (std::size_t n = 0; n < states.size(); ++n) {
        NeuronState s = states[n];
        if (!s.refractory(now)) {
            s = inject(s, weights.row(n), frame);
        }
        const NeuronStep r = step_neuron(s, params, now);
        out.states[n] = r.state;
        if (r.spiked) {
            out.spikes.insert(LegLabel(static_cast<int>(n) + 1));
        }
    }
    return out;
}

SpikeRaster run_network(std::span<const BinaryFrame> frames, const WeightMap& weights, const NeuronParams& params,
                        std::vector<std::array<double, kLegCount>>* potentials)
{
    SpikeRaster raster;
    raster.dt = params.dt;
    NetworkState states = network_at_rest(params);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const double now = static_cast<double>(k) * params.dt;
        NetworkStep r = step_network(states, weights, frames[k], params, now);
        states = r.states;
        raster.push(k, r.spikes);
        if (potentials) {
            std::array<double, kLegCount> v{};
            for (std::size_t n = 0; n < kLegCount; ++n) {
                v[n] = states[n].v;
            }
            potentials->push_back(v);
        }
    }
    return raster;
}

void write_raster(std::ostream& out, const SpikeRaster& raster)
{
    out << "# step time_s neuron\n";
    char buf[64];
    for (const RasterStep& s : raster.steps) {
        for (LegLabel l : s.spikes.labels()) {
            std::snprintf(buf, sizeof buf, "%zu %.6f %d\n", s.step, raster.time_of(s), l.value());
            out << buf;
        }
    }
}

SpikeRaster read_raster(std::istream& in, double dt)
{
    SpikeRaster raster;
    raster.dt = dt;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::size_t step = 0;
        double t = 0.0;
        int neuron = 0;
        if (!(ls >> step)) {
            continue;
        }
        if (!(ls >> t >> neuron)) {
            throw DataError("raster line " + std::to_string(line_no) + ": expected 'step time_s neuron'");
        }
        const LegLabel leg(neuron);
        if (!raster.steps.empty() && raster.steps.back().step == step) {
            raster.steps.back().spikes.insert(leg);
        } else {
            raster.push(step, LegSet{leg.value()});
        }
    }
    return raster;
}

} // namespace gaitsim
