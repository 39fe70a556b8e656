#pragma once

// Run configuration: one key=value file with a section per module. Every key
// is optional (defaults below); unknown sections or keys are rejected.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>

#include "gaitsim/energy.hpp"
#include "gaitsim/event_core.hpp"
#include "gaitsim/gait_engine.hpp"
#include "gaitsim/imitation_trainer.hpp"
#include "gaitsim/snn_core.hpp"
#include "gaitsim/synth_scene.hpp"

namespace gaitsim {

struct RunConfig {
    // [event_core]
    std::size_t sensor_width = 1280;
    std::size_t sensor_height = 800;
    std::size_t crop_width = 600;
    std::size_t crop_height = 600;
    std::optional<std::size_t> crop_x;  // centered when unset
    std::optional<std::size_t> crop_y;
    double window_ms = 40.0;
    EstimatorConfig estimator{};

    // [synth_scene]
    std::array<double, kLegCount> leg_angles_deg{-130.0, 180.0, 130.0, -50.0, 0.0, 50.0};
    double body_radius = 0.15;
    double leg_length = 0.22;
    double sweep_angle = 0.5235987755982988;
    // width/height/window_ms follow the crop and window
    RenderOptions render{25, 600, 600, 0.001, 7, 40.0, SceneStyle{}};
    GaitSchedule train_schedule = sequential_schedule();
    GaitSchedule test_schedule = tripod_schedule(4);

    // [snn_core]
    NeuronParams neuron{};

    // [imitation_trainer]
    TrainSchedule schedule{};
    std::size_t repeats = 10;
    double prior_sigma = 0.35;
    std::optional<GaussianPriors> explicit_priors;

    // [gait_engine]
    std::optional<double> period_s;            // default frames_per_cycle * dt
    std::optional<double> coincidence_window_s; // default period / 2

    // [energy]
    EnergyModel energy{};

    // [run]
    unsigned threads = 1;

    HexapodGeometry geometry() const;
    GaussianPriors priors() const;
    CropRegion crop() const;
    double period() const;
    LabelingOptions labeling() const;
    TrainerConfig trainer() const;

    // Cross-module checks; throws ConfigError.
    void validate() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// The shipped example config with every key at its default, annotated.
void write_default_config(std::ostream& out);

} // namespace gaitsim
