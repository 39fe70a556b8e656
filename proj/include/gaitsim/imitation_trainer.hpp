#pragma once

// Geometry-supervised training of the six-neuron output layer: a Gaussian
// angle classifier labels each detected leg movement and the labelled
// neuron's weights are potentiated on active inputs and depressed elsewhere,
// with both rates decaying exponentially in simulated time.

#include <array>
#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitsim/event_core.hpp"
#include "gaitsim/legs.hpp"
#include "gaitsim/snn_core.hpp"
#include "gaitsim/synth_scene.hpp"

namespace gaitsim {

struct LegPrior {
    double mean = 0.0;    // rad, (-pi, pi]
    double sigma = 0.35;  // rad
    double weight = 1.0;  // relative prior mass
};

struct GaussianPriors {
    std::array<LegPrior, kLegCount> legs{};

    // Throws ConfigError on non-positive sigma or weight, or repeated means.
    void validate() const;
};

struct TrainSchedule {
    double omega = 0.05;     // potentiation scale
    double alpha = 0.01;     // 1/s
    double sigma_d = 0.0005; // depression scale
    double beta = 0.01;      // 1/s
    double w_max = 1.0;

    void validate() const;

    double potentiation(double t_sec) const;
    double depression(double t_sec) const;
};

// Kernel sizes of the pooling pipeline.
struct EstimatorConfig {
    std::size_t leg_kernel = 10;      // andpool producing the leg frame I10
    std::size_t body_and_kernel = 2;  // andpool denoising the body map
    std::size_t body_or_kernel = 10;  // orpool enhancing the body map
    std::size_t history = 11;         // frames OR-ed into the body map

    void validate() const;
    // Factor between the leg grid and the body-map grid.
    std::size_t mask_factor() const;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

// argmax over legs of weight * N(theta; mean, sigma) with wrapped angular
// distance; ties go to the lowest label.
LegLabel classify_angle(double theta, const GaussianPriors& priors);

struct LegEstimate {
    LegLabel label{1};
    double theta = 0.0;
    Point body{};  // centroid of the masked body map
    Point leg{};   // centroid of the leg frame
};

// Thrown when the body map is empty after masking out the leg.
class DegenerateSceneError : public DataError {
public:
    using DataError::DataError;
};

// Labels the moving leg. `history` holds raw frames oldest first, the current
// frame last; up to cfg.history of the most recent are used. Throws
// EmptyFrameError when the current leg frame is empty.
LegEstimate estimate_leg(std::span<const BinaryFrame> history, const GaussianPriors& priors,
                         const EstimatorConfig& cfg = {});

// Same as estimate_leg on pre-pooled inputs: `body_maps` are
// orpool(andpool(I0, and_k), or_k) of the recent frames, `leg_frame` is the
// current I10.
LegEstimate estimate_leg_pooled(std::span<const BinaryFrame> body_maps, const BinaryFrame& leg_frame,
                                const GaussianPriors& priors, const EstimatorConfig& cfg = {});

// Means point from the mid-sweep foot position to the body center.
GaussianPriors calibrate_priors(const HexapodGeometry& geom, double sigma = 0.35);

// Raw frames pooled once for the leg frame and the body map.
struct PreparedStream {
    std::vector<BinaryFrame> leg_frames;
    std::vector<BinaryFrame> body_maps;

    std::size_t size() const { return leg_frames.size(); }
};

PreparedStream prepare_stream(const FrameStream& raw, const EstimatorConfig& cfg, unsigned threads = 1);

struct TrainLogEntry {
    double t_sec = 0.0;
    std::optional<int> leg;  // empty when the frame was skipped
    double theta = 0.0;
    double p = 0.0;
    double m = 0.0;
    std::size_t popcount = 0;
    std::string note;  // reason for a skip
};

void write_train_log(std::ostream& out, std::span<const TrainLogEntry> log);

struct TrainerConfig {
    NeuronParams neuron{};
    TrainSchedule schedule{};
    GaussianPriors priors{};
    EstimatorConfig estimator{};
};

// Stateful trainer: weights, neuron states, the simulation clock and the
// body-map history persist across calls so the training video can be looped.
class ImitationTrainer {
public:
    ImitationTrainer(TrainerConfig cfg, std::size_t leg_width, std::size_t leg_height);

    // Processes one frame: steps the network on the leg frame with the current
    // weights, then updates the labelled neuron if the leg frame is nonempty.
    void step(const BinaryFrame& leg_frame, const BinaryFrame& body_map);

    // One pass over a prepared video.
    void run(const PreparedStream& video);

    const WeightMap& weights() const { return weights_; }
    const SpikeRaster& raster() const { return raster_; }
    const std::vector<TrainLogEntry>& log() const { return log_; }
    std::size_t steps_done() const { return step_; }
    std::size_t updates() const { return updates_; }
    std::size_t skipped() const { return skipped_; }
    double now() const { return static_cast<double>(step_) * cfg_.neuron.dt; }

private:
    TrainerConfig cfg_;
    WeightMap weights_;
    NetworkState states_;
    SpikeRaster raster_;
    std::vector<TrainLogEntry> log_;
    std::deque<BinaryFrame> history_;
    std::size_t step_ = 0;
    std::size_t updates_ = 0;
    std::size_t skipped_ = 0;
};

struct TrainResult {
    WeightMap weights;
    SpikeRaster raster;
    std::vector<TrainLogEntry> log;
};

// Trains from all-zero weights over `repeats` passes of the raw video.
TrainResult train(const FrameStream& raw, const TrainerConfig& cfg, std::size_t repeats, unsigned threads = 1);

// Frozen network on pooled leg frames: no estimator, no updates.
SpikeRaster run_frozen(const WeightMap& weights, std::span<const BinaryFrame> leg_frames, const NeuronParams& params);

} // namespace gaitsim
