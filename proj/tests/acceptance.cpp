// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "gaitsim/commands.hpp"
#include "gaitsim/config.hpp"
#include "gaitsim/event_core.hpp"
#include "gaitsim/gait_engine.hpp"
#include "gaitsim/imitation_trainer.hpp"
#include "gaitsim/snn_core.hpp"
#include "gaitsim/synth_scene.hpp"

using namespace gaitsim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(fs::temp_directory_path() / ("gaitsim_accept_" + name + "_" + std::to_string(::getpid())))
    {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

RunConfig default_config()
{
    std::istringstream empty;
    return parse_config(empty);
}

RenderOptions render_options(const RunConfig& cfg, double noise, std::uint64_t seed)
{
    RenderOptions o = cfg.render;
    o.noise_density = noise;
    o.seed = seed;
    return o;
}

// Leg moving at each frame of a schedule in which one leg moves per step.
LegLabel leg_at(const GaitSchedule& schedule, std::size_t frame, std::size_t fpc)
{
    const std::size_t step = frame / fpc;
    for (const auto& e : schedule.entries) {
        if (e.step == step && e.legs.size() == 1) {
            return e.legs.labels().front();
        }
    }
    throw DataError("no single moving leg at frame " + std::to_string(frame));
}

BinaryFrame brute_pool(const BinaryFrame& in, std::size_t k, bool use_and)
{
    BinaryFrame out(in.width() / k, in.height() / k, in.scale() * k);
    for (std::size_t ty = 0; ty < out.height(); ++ty) {
        for (std::size_t tx = 0; tx < out.width(); ++tx) {
            bool all = true;
            bool any = false;
            for (std::size_t y = ty * k; y < (ty + 1) * k; ++y) {
                for (std::size_t x = tx * k; x < (tx + 1) * k; ++x) {
                    all = all && in.at(x, y);
                    any = any || in.at(x, y);
                }
            }
            out.set(tx, ty, use_and ? all : any);
        }
    }
    return out;
}

Outcome pooling_oracle()
{
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    const std::size_t ks[] = {2, 4, 8};
    std::size_t mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t k = ks[i % 3];
        std::uniform_int_distribution<std::size_t> tiles(1, 64 / k);
        const std::size_t w = tiles(rng) * k;
        const std::size_t h = tiles(rng) * k;
        std::bernoulli_distribution bit(std::uniform_real_distribution<double>(0.05, 0.95)(rng));
        BinaryFrame f(w, h);
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                f.set(x, y, bit(rng));
            }
        }
        const BinaryFrame a = andpool(f, k);
        const BinaryFrame o = orpool(f, k);
        mismatches += a == brute_pool(f, k, true) ? 0 : 1;
        mismatches += o == brute_pool(f, k, false) ? 0 : 1;
        mismatches += frame_not(a) == orpool(frame_not(f), k) ? 0 : 1;
        mismatches += frame_not(o) == andpool(frame_not(f), k) ? 0 : 1;
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 5.0,
            std::to_string(mismatches) + " mismatches over 200 frames, " + fmt("%.3f", elapsed) + " s"};
}

Outcome filter_reproduction()
{
    const RunConfig cfg = default_config();
    const HexapodGeometry geom = cfg.geometry();
    const GaitSchedule schedule = sequential_schedule();
    const RenderOptions opts = render_options(cfg, 0.001, cfg.render.seed);
    const FrameStream video = render_expert_sequence(geom, schedule, opts);
    const std::size_t k = cfg.estimator.leg_kernel;

    std::size_t outside = 0;
    std::size_t active = 0;
    std::size_t out_of_range = 0;
    std::map<std::size_t, std::size_t> histogram;
    for (std::size_t i = 0; i < video.size(); ++i) {
        const BinaryFrame pooled = andpool(video.frames[i], k);
        if (pooled.width() != 60 || pooled.height() != 60) {
            return {false, "pooled frame is " + std::to_string(pooled.width()) + "x" + std::to_string(pooled.height())};
        }
        const PixelBox box = leg_sweep_box(geom, leg_at(schedule, i, opts.frames_per_cycle), opts);
        const std::size_t n = popcount(pooled);
        for (std::size_t y = 0; y < pooled.height(); ++y) {
            for (std::size_t x = 0; x < pooled.width(); ++x) {
                if (pooled.at(x, y) && !(box.contains(x * k, y * k) && box.contains(x * k + k - 1, y * k + k - 1))) {
                    ++outside;
                }
            }
        }
        if (n > 0) {
            ++active;
            ++histogram[n];
            out_of_range += n > 5 ? 1 : 0;
        }
    }
    std::string hist;
    for (const auto& [bits, frames] : histogram) {
        hist += " " + std::to_string(bits) + ":" + std::to_string(frames);
    }
    return {outside == 0 && out_of_range == 0 && active > 0,
            std::to_string(outside) + " bits outside the moving leg, " + std::to_string(active) + "/" +
                std::to_string(video.size()) + " active frames, bits per active frame{" + hist + " }"};
}

Outcome neuron_numerics()
{
    const NeuronParams p;
    const int steps = static_cast<int>(std::lround(20.0 / p.dt));

    double worst_v = 0.0;
    for (double v0 : {-53.0, -80.0}) {
        NeuronState s{v0, 0.0, -1.0};
        for (int k = 1; k <= steps; ++k) {
            s = step_neuron(s, p, (k - 1) * p.dt).state;
            const double exact = p.v_rest + (v0 - p.v_rest) * std::exp(-k * p.dt / p.tau_v);
            worst_v = std::max(worst_v, std::abs(s.v - exact));
        }
    }
    const double v_tol = 0.01 * (p.v_thresh - p.v_rest);

    // Conductance alone: V held below threshold so the neuron never fires.
    const double g0 = 0.05;
    NeuronState s{p.v_rest, g0, -1.0};
    double worst_rel_tau = 0.0;
    double worst_abs = 0.0;
    bool spiked = false;
    for (int k = 1; k <= steps; ++k) {
        const NeuronStep st = step_neuron(s, p, (k - 1) * p.dt);
        spiked = spiked || st.spiked;
        s = st.state;
        const double t = k * p.dt;
        const double exact = g0 * std::exp(-t / p.tau_ge);
        worst_abs = std::max(worst_abs, std::abs(s.g_e - exact));
        if (t <= p.tau_ge + 1e-9) {
            worst_rel_tau = std::max(worst_rel_tau, std::abs(s.g_e - exact) / exact);
        }
    }
    const bool pass = worst_v < v_tol && worst_rel_tau <= 0.02 && worst_abs <= 0.02 * g0 && !spiked;
    return {pass, "V max error " + fmt("%.4f", worst_v) + " mV (limit " + fmt("%.2f", v_tol) + "), g_e error " +
                      fmt("%.2f", 100.0 * worst_rel_tau) + "% pointwise up to tau_ge, " +
                      fmt("%.2f", 100.0 * worst_abs / g0) + "% of g0 max over 20 s"};
}

Outcome training_convergence()
{
    const auto start = Clock::now();
    const RunConfig cfg = default_config();
    const GaitSchedule schedule = cfg.train_schedule;
    const std::size_t fpc = cfg.render.frames_per_cycle;
    const FrameStream train_video = render_expert_sequence(cfg.geometry(), schedule, cfg.render);
    // A further repetition rendered with fresh noise.
    const FrameStream held_out =
        render_expert_sequence(cfg.geometry(), schedule, render_options(cfg, cfg.render.noise_density, cfg.render.seed + 1));
    const PreparedStream prepared = prepare_stream(train_video, cfg.estimator, cfg.threads);
    const PreparedStream prepared_held = prepare_stream(held_out, cfg.estimator, cfg.threads);
    const LabelSequence expected = label_sequence(ground_truth_raster(schedule, fpc, cfg.neuron.dt), cfg.labeling());

    ImitationTrainer trainer(cfg.trainer(), prepared.leg_frames.front().width(), prepared.leg_frames.front().height());
    std::size_t converged = 0;
    std::string trace;
    for (std::size_t r = 1; r <= 10; ++r) {
        trainer.run(prepared);
        const SpikeRaster out = run_frozen(trainer.weights(), prepared_held.leg_frames, cfg.neuron);
        const double acc = sequence_accuracy(label_sequence(out, cfg.labeling()), expected);
        trace += " " + fmt("%.3f", acc);
        if (acc == 1.0) {
            converged = r;
            break;
        }
    }
    const double elapsed = seconds_since(start);
    const double rep_seconds = static_cast<double>(train_video.size()) * cfg.neuron.dt;
    if (converged == 0) {
        return {false, "no convergence in 10 repetitions, accuracy per repetition:" + trace};
    }
    return {elapsed < 30.0, "accuracy 1.0 after " + std::to_string(converged) + " repetition(s) = " +
                                fmt("%.1f", static_cast<double>(converged) * rep_seconds) + " simulated s, " +
                                fmt("%.2f", elapsed) + " s wall"};
}

Outcome tripod_generalization()
{
    const RunConfig cfg = default_config();
    TempDir dir("tripod");
    const ReproReport rep = cmd_repro(cfg, dir.path());
    const fs::path weights = dir.path() / files::kWeights;
    const std::uint64_t before = file_checksum(weights);
    const TestReport again = cmd_test(cfg, weights, dir.path() / files::kTestEvents, dir.path() / files::kTestSchedule,
                                      dir.path() / "retest");
    const bool unchanged = file_checksum(weights) == before && rep.weights_unchanged;
    const bool expected_is_spliced = again.expected.size() == 8 && is_tripod(again.expected);
    const bool pass = expected_is_spliced && again.tripod && again.accuracy == 1.0 && rep.tripod.tripod &&
                      rep.tripod.accuracy == 1.0 && unchanged;
    std::string observed;
    for (const LegSet s : again.observed) {
        observed += " {" + s.to_string() + "}";
    }
    return {pass, "observed" + observed + ", accuracy " + fmt("%.3f", again.accuracy) + ", is_tripod " +
                      (again.tripod ? "true" : "false") + ", weights checksum " + (unchanged ? "unchanged" : "CHANGED")};
}

// Geometric oracle: the leg whose sweep box holds every set tile.
std::optional<LegLabel> geometric_leg(const HexapodGeometry& geom, const RenderOptions& opts, const BinaryFrame& leg_frame)
{
    const std::size_t k = leg_frame.scale();
    std::optional<LegLabel> found;
    for (int l = 1; l <= kLegCount; ++l) {
        const PixelBox box = leg_sweep_box(geom, LegLabel(l), opts);
        bool all_inside = popcount(leg_frame) > 0;
        for (std::size_t y = 0; y < leg_frame.height() && all_inside; ++y) {
            for (std::size_t x = 0; x < leg_frame.width() && all_inside; ++x) {
                if (leg_frame.at(x, y)) {
                    all_inside = box.contains(x * k, y * k) && box.contains(x * k + k - 1, y * k + k - 1);
                }
            }
        }
        if (all_inside) {
            if (found) {
                return std::nullopt;  // ambiguous
            }
            found = LegLabel(l);
        }
    }
    return found;
}

struct EstimatorScore {
    std::size_t frames = 0;
    std::size_t correct = 0;
    std::size_t oracle_agrees_with_schedule = 0;
};

EstimatorScore score_estimator(const RunConfig& cfg, double noise)
{
    const GaitSchedule schedule = sequential_schedule();
    const RenderOptions opts = render_options(cfg, noise, cfg.render.seed);
    const HexapodGeometry geom = cfg.geometry();
    const FrameStream video = render_expert_sequence(geom, schedule, opts);
    const PreparedStream prepared = prepare_stream(video, cfg.estimator, cfg.threads);
    const TrainResult trained = train(video, cfg.trainer(), 1, cfg.threads);

    std::map<std::size_t, std::optional<int>> labels;
    for (const auto& e : trained.log) {
        labels[static_cast<std::size_t>(std::lround(e.t_sec / cfg.neuron.dt))] = e.leg;
    }
    EstimatorScore s;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        if (popcount(prepared.leg_frames[i]) == 0) {
            continue;
        }
        ++s.frames;
        const std::optional<LegLabel> oracle = geometric_leg(geom, opts, prepared.leg_frames[i]);
        if (oracle && *oracle == leg_at(schedule, i, opts.frames_per_cycle)) {
            ++s.oracle_agrees_with_schedule;
        }
        const auto it = labels.find(i);
        if (oracle && it != labels.end() && it->second && *it->second == oracle->value()) {
            ++s.correct;
        }
    }
    return s;
}

Outcome leg_estimator()
{
    const RunConfig cfg = default_config();
    const EstimatorScore clean = score_estimator(cfg, 0.0);
    const EstimatorScore noisy = score_estimator(cfg, 0.002);
    auto pct = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : 100.0 * static_cast<double>(a) / b; };
    const bool oracle_ok =
        clean.oracle_agrees_with_schedule == clean.frames && noisy.oracle_agrees_with_schedule == noisy.frames;
    const bool pass = clean.frames > 0 && noisy.frames > 0 && oracle_ok && clean.correct == clean.frames &&
                      pct(noisy.correct, noisy.frames) >= 95.0;
    return {pass, "noise-free " + fmt("%.1f", pct(clean.correct, clean.frames)) + "% of " +
                      std::to_string(clean.frames) + " frames, noise 0.002 " +
                      fmt("%.1f", pct(noisy.correct, noisy.frames)) + "% of " + std::to_string(noisy.frames) +
                      " frames, geometric oracle agrees with schedule: " + (oracle_ok ? "yes" : "no")};
}

Outcome schedule_properties()
{
    const RunConfig cfg = default_config();
    const TrainSchedule& sched = cfg.schedule;
    const double eps = 1e-6;

    bool decreasing = true;
    for (int k = 1; k <= 100'000 && decreasing; ++k) {
        const double t0 = (k - 1) * cfg.neuron.dt;
        const double t1 = k * cfg.neuron.dt;
        decreasing = sched.potentiation(t1) < sched.potentiation(t0) && sched.depression(t1) < sched.depression(t0);
    }

    const FrameStream video = render_expert_sequence(cfg.geometry(), cfg.train_schedule, cfg.render);
    const PreparedStream prepared = prepare_stream(video, cfg.estimator, cfg.threads);
    ImitationTrainer trainer(cfg.trainer(), prepared.leg_frames.front().width(), prepared.leg_frames.front().height());

    // Repetitions that start with p below eps must change no weight by eps or more.
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst = 0.0;
    std::size_t first_rep = 0;
    for (std::size_t r = 1; checked < 5 && r <= 400; ++r) {
        const bool frozen_regime = sched.potentiation(trainer.now()) < eps;
        const std::vector<double> before(trainer.weights().values().begin(), trainer.weights().values().end());
        trainer.run(prepared);
        if (!frozen_regime) {
            continue;
        }
        if (first_rep == 0) {
            first_rep = r;
        }
        ++checked;
        double change = 0.0;
        const auto after = trainer.weights().values();
        for (std::size_t i = 0; i < before.size(); ++i) {
            change = std::max(change, std::abs(after[i] - before[i]));
        }
        worst = std::max(worst, change);
        violations += change < eps ? 0 : 1;
    }
    const bool pass = decreasing && checked == 5 && violations == 0;
    return {pass, std::string("p and m strictly decreasing: ") + (decreasing ? "yes" : "no") + "; p < 1e-6 from repetition " +
                      std::to_string(first_rep) + ", largest single-weight change over the next " +
                      std::to_string(checked) + " repetitions " + fmt("%.3g", worst)};
}

Outcome energy_model()
{
    const RunConfig cfg = default_config();
    const EnergyModel& model = cfg.energy;

    // A single leg movement under the model's activity assumption: a few input
    // spikes within one active andpool frame.
    const EnergyReport leg = energy_estimate({3, 1, 1}, model);
    std::ostringstream text;
    write_energy_report(text, leg, model);
    const bool sums = leg.total == leg.spike_energy + leg.andpool_energy;

    // The written report carries full precision; its items must add up too.
    double spike = 0.0;
    double pool = 0.0;
    double total = 0.0;
    std::string line;
    std::istringstream in(text.str());
    while (std::getline(in, line)) {
        const auto eq = line.rfind("= ");
        if (line.rfind("input_spikes:", 0) == 0 && eq != std::string::npos) {
            spike = std::stod(line.substr(eq + 2));
        } else if (line.rfind("active_frames:", 0) == 0 && eq != std::string::npos) {
            pool = std::stod(line.substr(eq + 2));
        } else if (line.rfind("total:", 0) == 0) {
            total = std::stod(line.substr(6));
        }
    }
    const bool report_sums = total == spike + pool && total == leg.total;
    const bool in_band = leg.per_leg >= 5e-9 && leg.per_leg <= 20e-9;
    return {sums && report_sums && in_band,
            "per leg event " + fmt("%.2f", leg.per_leg * 1e9) + " nJ (spike " + fmt("%.2f", leg.spike_energy * 1e9) +
                " nJ + andpool " + fmt("%.2f", leg.andpool_energy * 1e9) + " nJ), itemization exact: " +
                (sums && report_sums ? "yes" : "no")};
}

// Per-leg energy measured on the synthetic tripod test run, for information.
std::string synthetic_energy_note()
{
    const RunConfig cfg = default_config();
    TempDir dir("energy");
    const ReproReport rep = cmd_repro(cfg, dir.path());
    return "synthetic test run: " + std::to_string(rep.energy.inputs.input_spikes) + " input spikes, " +
           std::to_string(rep.energy.inputs.active_frames) + " active frames, " +
           std::to_string(rep.energy.inputs.leg_events) + " leg events, " + fmt("%.1f", rep.energy.per_leg * 1e9) +
           " nJ per leg event";
}

Outcome determinism()
{
    const RunConfig cfg = default_config();
    TempDir a("det_a");
    TempDir b("det_b");
    cmd_repro(cfg, a.path());
    cmd_repro(cfg, b.path());
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto& entry : fs::directory_iterator(a.path())) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const fs::path name = entry.path().filename();
        ++compared;
        if (!fs::exists(b.path() / name) || read_file(entry.path()) != read_file(b.path() / name)) {
            differing.push_back(name.string());
        }
    }
    std::string detail = std::to_string(compared) + " output files compared";
    for (const auto& d : differing) {
        detail += ", differs: " + d;
    }
    return {differing.empty() && compared >= 10, detail};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"pooling oracle", pooling_oracle},
        {"filter reproduction", filter_reproduction},
        {"neuron numerics", neuron_numerics},
        {"training convergence", training_convergence},
        {"tripod generalization", tripod_generalization},
        {"leg estimator", leg_estimator},
        {"schedule properties", schedule_properties},
        {"energy model", energy_model},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
        std::fflush(stdout);
    }
    try {
        std::printf("info: %s\n", synthetic_energy_note().c_str());
    } catch (const std::exception& e) {
        std::printf("info: synthetic energy unavailable: %s\n", e.what());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
