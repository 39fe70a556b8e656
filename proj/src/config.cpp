#include "gaitsim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

namespace gaitsim {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& v)
{
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(d)) {
        throw ConfigError("expected a number, got '" + v + "'");
    }
    return d;
}

std::size_t to_size(const std::string& v)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError("expected a non-negative integer, got '" + v + "'");
    }
    try {
        return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::exception&) {
        throw ConfigError("integer out of range: '" + v + "'");
    }
}

bool to_bool(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("expected true/false, got '" + v + "'");
}

std::array<double, kLegCount> to_six(const std::string& v)
{
    std::array<double, kLegCount> out{};
    std::istringstream in(v);
    std::string item;
    std::size_t n = 0;
    while (std::getline(in, item, ',')) {
        if (n == kLegCount) {
            throw ConfigError("expected six comma-separated values, got more");
        }
        out[n++] = to_double(trim(item));
    }
    if (n != kLegCount) {
        throw ConfigError("expected six comma-separated values, got " + std::to_string(n));
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

// section.key -> setter
const std::map<std::string, Setter>& key_table()
{
    static const std::map<std::string, Setter> table = {
        {"event_core.sensor_width", [](RunConfig& c, const std::string& v) { c.sensor_width = to_size(v); }},
        {"event_core.sensor_height", [](RunConfig& c, const std::string& v) { c.sensor_height = to_size(v); }},
        {"event_core.crop_width", [](RunConfig& c, const std::string& v) { c.crop_width = to_size(v); }},
        {"event_core.crop_height", [](RunConfig& c, const std::string& v) { c.crop_height = to_size(v); }},
        {"event_core.crop_x",
         [](RunConfig& c, const std::string& v) { c.crop_x = v == "center" ? std::nullopt : std::optional(to_size(v)); }},
        {"event_core.crop_y",
         [](RunConfig& c, const std::string& v) { c.crop_y = v == "center" ? std::nullopt : std::optional(to_size(v)); }},
        {"event_core.window_ms", [](RunConfig& c, const std::string& v) { c.window_ms = to_double(v); }},
        {"event_core.leg_kernel", [](RunConfig& c, const std::string& v) { c.estimator.leg_kernel = to_size(v); }},
        {"event_core.body_and_kernel",
         [](RunConfig& c, const std::string& v) { c.estimator.body_and_kernel = to_size(v); }},
        {"event_core.body_or_kernel", [](RunConfig& c, const std::string& v) { c.estimator.body_or_kernel = to_size(v); }},
        {"event_core.history_frames", [](RunConfig& c, const std::string& v) { c.estimator.history = to_size(v); }},

        {"synth_scene.leg_angles_deg", [](RunConfig& c, const std::string& v) { c.leg_angles_deg = to_six(v); }},
        {"synth_scene.body_radius", [](RunConfig& c, const std::string& v) { c.body_radius = to_double(v); }},
        {"synth_scene.leg_length", [](RunConfig& c, const std::string& v) { c.leg_length = to_double(v); }},
        {"synth_scene.sweep_angle_rad", [](RunConfig& c, const std::string& v) { c.sweep_angle = to_double(v); }},
        {"synth_scene.frames_per_cycle",
         [](RunConfig& c, const std::string& v) { c.render.frames_per_cycle = to_size(v); }},
        {"synth_scene.noise_density", [](RunConfig& c, const std::string& v) { c.render.noise_density = to_double(v); }},
        {"synth_scene.seed", [](RunConfig& c, const std::string& v) { c.render.seed = to_size(v); }},
        {"synth_scene.foot_width_px",
         [](RunConfig& c, const std::string& v) { c.render.style.foot_width_px = to_size(v); }},
        {"synth_scene.foot_height_px",
         [](RunConfig& c, const std::string& v) { c.render.style.foot_height_px = to_size(v); }},
        {"synth_scene.draw_shaft", [](RunConfig& c, const std::string& v) { c.render.style.draw_shaft = to_bool(v); }},
        {"synth_scene.body_flicker",
         [](RunConfig& c, const std::string& v) { c.render.style.body_flicker = to_double(v); }},
        {"synth_scene.body_block_spacing_px",
         [](RunConfig& c, const std::string& v) { c.render.style.body_block_spacing_px = to_size(v); }},
        {"synth_scene.train_schedule",
         [](RunConfig& c, const std::string& v) { c.train_schedule = parse_schedule_spec(v); }},
        {"synth_scene.test_schedule",
         [](RunConfig& c, const std::string& v) { c.test_schedule = parse_schedule_spec(v); }},

        {"snn_core.tau_v_s", [](RunConfig& c, const std::string& v) { c.neuron.tau_v = to_double(v); }},
        {"snn_core.tau_ge_s", [](RunConfig& c, const std::string& v) { c.neuron.tau_ge = to_double(v); }},
        {"snn_core.v_rest_mv", [](RunConfig& c, const std::string& v) { c.neuron.v_rest = to_double(v); }},
        {"snn_core.v_exc_mv", [](RunConfig& c, const std::string& v) { c.neuron.v_exc = to_double(v); }},
        {"snn_core.v_thresh_mv", [](RunConfig& c, const std::string& v) { c.neuron.v_thresh = to_double(v); }},
        {"snn_core.refractory_s", [](RunConfig& c, const std::string& v) { c.neuron.refractory = to_double(v); }},
        {"snn_core.dt_s", [](RunConfig& c, const std::string& v) { c.neuron.dt = to_double(v); }},

        {"imitation_trainer.omega", [](RunConfig& c, const std::string& v) { c.schedule.omega = to_double(v); }},
        {"imitation_trainer.alpha_per_s", [](RunConfig& c, const std::string& v) { c.schedule.alpha = to_double(v); }},
        {"imitation_trainer.sigma_d", [](RunConfig& c, const std::string& v) { c.schedule.sigma_d = to_double(v); }},
        {"imitation_trainer.beta_per_s", [](RunConfig& c, const std::string& v) { c.schedule.beta = to_double(v); }},
        {"imitation_trainer.w_max", [](RunConfig& c, const std::string& v) { c.schedule.w_max = to_double(v); }},
        {"imitation_trainer.repeats", [](RunConfig& c, const std::string& v) { c.repeats = to_size(v); }},
        {"imitation_trainer.prior_sigma_rad", [](RunConfig& c, const std::string& v) { c.prior_sigma = to_double(v); }},
        {"imitation_trainer.prior_means_rad",
         [](RunConfig& c, const std::string& v) {
             const auto means = to_six(v);
             GaussianPriors p = c.explicit_priors.value_or(GaussianPriors{});
             for (std::size_t i = 0; i < kLegCount; ++i) {
                 p.legs[i].mean = means[i];
             }
             c.explicit_priors = p;
         }},
        {"imitation_trainer.prior_sigmas_rad",
         [](RunConfig& c, const std::string& v) {
             const auto s = to_six(v);
             GaussianPriors p = c.explicit_priors.value_or(GaussianPriors{});
             for (std::size_t i = 0; i < kLegCount; ++i) {
                 p.legs[i].sigma = s[i];
             }
             c.explicit_priors = p;
         }},
        {"imitation_trainer.prior_weights",
         [](RunConfig& c, const std::string& v) {
             const auto w = to_six(v);
             GaussianPriors p = c.explicit_priors.value_or(GaussianPriors{});
             for (std::size_t i = 0; i < kLegCount; ++i) {
                 p.legs[i].weight = w[i];
             }
             c.explicit_priors = p;
         }},

        {"gait_engine.period_s", [](RunConfig& c, const std::string& v) { c.period_s = to_double(v); }},
        {"gait_engine.coincidence_window_s",
         [](RunConfig& c, const std::string& v) { c.coincidence_window_s = to_double(v); }},

        {"energy.energy_per_spike_j", [](RunConfig& c, const std::string& v) { c.energy.energy_per_spike = to_double(v); }},
        {"energy.andpool_energy_per_frame_j",
         [](RunConfig& c, const std::string& v) { c.energy.andpool_energy_per_frame = to_double(v); }},
        {"energy.gates", [](RunConfig& c, const std::string& v) { c.energy.gates = to_size(v); }},
        {"energy.technology", [](RunConfig& c, const std::string& v) { c.energy.technology = v; }},
        {"energy.reference_per_leg_j",
         [](RunConfig& c, const std::string& v) { c.energy.reference_per_leg = to_double(v); }},

        {"run.threads",
         [](RunConfig& c, const std::string& v) {
             const std::size_t n = to_size(v);
             if (n == 0 || n > 256) {
                 throw ConfigError("threads must lie in 1..256");
             }
             c.threads = static_cast<unsigned>(n);
         }},
    };
    return table;
}

constexpr const char* kDefaultConfig = R"(# gaitsim run configuration. Every key is optional; values shown are the
# defaults. Keys marked "assumed" are choices of this simulator,
# not values taken from the original experiment.

[event_core]
sensor_width = 1280
sensor_height = 800
crop_width = 600
crop_height = 600
crop_x = center              # assumed (crop placement unspecified)
crop_y = center              # assumed
window_ms = 40
leg_kernel = 10
body_and_kernel = 2
body_or_kernel = 10
history_frames = 11

[synth_scene]
leg_angles_deg = -130, 180, 130, -50, 0, 50   # assumed (synthetic scene)
body_radius = 0.15            # assumed
leg_length = 0.22             # assumed
sweep_angle_rad = 0.5235987755982988   # assumed (30 degrees)
frames_per_cycle = 25         # assumed (1 s per leg cycle)
noise_density = 0.001         # assumed
seed = 7                      # assumed
foot_width_px = 28            # assumed
foot_height_px = 18           # assumed
draw_shaft = true             # assumed
body_flicker = 0.1            # assumed
body_block_spacing_px = 4     # assumed
train_schedule = 1; 2; 3; 4; 5; 6
test_schedule = 1,3,5; 2,4,6; 1,3,5; 2,4,6; 1,3,5; 2,4,6; 1,3,5; 2,4,6

[snn_core]
tau_v_s = 4
tau_ge_s = 1.2
v_rest_mv = -65
v_exc_mv = -30
v_thresh_mv = -52             # assumed (threshold unspecified)
refractory_s = 2
dt_s = 0.04

[imitation_trainer]
omega = 0.05                  # assumed
alpha_per_s = 0.01            # assumed
sigma_d = 0.0005              # assumed
beta_per_s = 0.01             # assumed
w_max = 1.0                   # assumed
repeats = 10
prior_sigma_rad = 0.35        # assumed (priors calibrated from the scene)

[gait_engine]
# period_s = 1.0              # defaults to frames_per_cycle * dt_s
# coincidence_window_s = 0.5  # defaults to period_s / 2

[energy]
energy_per_spike_j = 1.7e-9
andpool_energy_per_frame_j = 2.5e-9
gates = 3600
reference_per_leg_j = 10e-9
technology = 14nm CMOS AND gates, 6 transistors each; neuromorphic spike cost

[run]
threads = 1
)";

} // namespace

HexapodGeometry RunConfig::geometry() const
{
    return make_geometry(leg_angles_deg, body_radius, leg_length, sweep_angle);
}

GaussianPriors RunConfig::priors() const
{
    if (explicit_priors) {
        return *explicit_priors;
    }
    return calibrate_priors(geometry(), prior_sigma);
}

CropRegion RunConfig::crop() const
{
    CropRegion c = centered_crop(sensor_width, sensor_height, crop_width, crop_height);
    if (crop_x) {
        c.x0 = *crop_x;
    }
    if (crop_y) {
        c.y0 = *crop_y;
    }
    return c;
}

double RunConfig::period() const
{
    return period_s.value_or(static_cast<double>(render.frames_per_cycle) * neuron.dt);
}

LabelingOptions RunConfig::labeling() const
{
    return {coincidence_window_s.value_or(period() / 2.0), neuron.refractory};
}

TrainerConfig RunConfig::trainer() const { return {neuron, schedule, priors(), estimator}; }

void RunConfig::validate() const
{
    neuron.validate();
    schedule.validate();
    estimator.validate();
    energy.validate();
    geometry().validate();
    priors().validate();
    train_schedule.validate();
    test_schedule.validate();
    (void)segments_from_schedule(train_schedule, render.frames_per_cycle);

    if (!(window_ms > 0.0)) {
        throw ConfigError("window_ms must be positive");
    }
    if (std::abs(neuron.dt * 1000.0 - window_ms) > 1e-9) {
        throw ConfigError("dt_s must equal one accumulation window (one frame per step)");
    }
    const CropRegion c = crop();
    if (c.x0 + c.width > sensor_width || c.y0 + c.height > sensor_height) {
        throw ConfigError("crop region exceeds the sensor");
    }
    const std::size_t body_tile = estimator.body_and_kernel * estimator.body_or_kernel;
    for (std::size_t k : {estimator.leg_kernel, body_tile}) {
        if (crop_width % k != 0 || crop_height % k != 0) {
            throw ConfigError("crop " + std::to_string(crop_width) + "x" + std::to_string(crop_height) +
                              " is not divisible by pooling tile " + std::to_string(k));
        }
    }
    if (render.frames_per_cycle < 2) {
        throw ConfigError("frames_per_cycle must be at least 2");
    }
    if (!(render.noise_density >= 0.0 && render.noise_density < 1.0)) {
        throw ConfigError("noise_density must lie in [0, 1)");
    }
    if (!(render.style.body_flicker >= 0.0 && render.style.body_flicker <= 1.0)) {
        throw ConfigError("body_flicker must lie in [0, 1]");
    }
    if (!(period() > 0.0) || !(labeling().coincidence_window > 0.0)) {
        throw ConfigError("gait period and coincidence window must be positive");
    }
}

RunConfig parse_config(std::istream& in)
{
    static const std::set<std::string> sections = {"event_core", "synth_scene", "snn_core",  "imitation_trainer",
                                                   "gait_engine", "energy",      "run"};
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fail = [&](const std::string& what) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
        };
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail("malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) {
                fail("unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail("expected key = value");
        }
        if (section.empty()) {
            fail("key outside of a section");
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = key_table();
        const auto it = table.find(key);
        if (it == table.end()) {
            fail("unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            fail("duplicate key '" + key + "'");
        }
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            fail(key + ": " + e.what());
        } catch (const DataError& e) {
            fail(key + ": " + e.what());
        }
    }
    cfg.render.width = cfg.crop_width;
    cfg.render.height = cfg.crop_height;
    cfg.render.window_ms = cfg.window_ms;
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    try {
        return parse_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_default_config(std::ostream& out) { out << kDefaultConfig; }

} // namespace gaitsim
