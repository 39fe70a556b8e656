#include "gaitsim/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "gaitsim/imitation_trainer.hpp"
#include "gaitsim/synth_scene.hpp"

namespace gaitsim {

namespace {

FrameStream load_video(const RunConfig& cfg, const fs::path& events)
{
    std::optional<CropRegion> crop;
    if (cfg.crop_x || cfg.crop_y) {
        crop = cfg.crop();
    }
    return load_frames(events.string(), cfg.window_ms, cfg.crop_width, cfg.crop_height, crop);
}

LabelSequence expected_sequence(const RunConfig& cfg, const GaitSchedule& schedule, std::size_t frames_per_cycle)
{
    return label_sequence(ground_truth_raster(schedule, frames_per_cycle, cfg.neuron.dt), cfg.labeling());
}

std::string fmt(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string sequence_text(const LabelSequence& seq)
{
    std::string s;
    for (const LegSet& l : seq) {
        if (!s.empty()) {
            s += ' ';
        }
        s += '{' + l.to_string() + '}';
    }
    return s.empty() ? "(none)" : s;
}

} // namespace

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write '" + tmp.string() + "'");
        }
        body(out);
        out.flush();
        if (!out) {
            throw DataError("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t file_checksum(const fs::path& path)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : read_file(path)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void cmd_synth(const RunConfig& cfg, const fs::path& out)
{
    cfg.validate();
    fs::create_directories(out);
    const HexapodGeometry geom = cfg.geometry();
    const FrameStream train = render_expert_sequence(geom, cfg.train_schedule, cfg.render);
    const LegSegments segments = segments_from_schedule(cfg.train_schedule, cfg.render.frames_per_cycle);
    const FrameStream test = splice_segments(train, segments, cfg.test_schedule);

    const CropRegion crop = cfg.crop();
    write_file_atomic(out / files::kTrainEvents, [&](std::ostream& os) {
        write_event_file(os, frames_to_events(train, crop, cfg.sensor_width, cfg.sensor_height));
    });
    write_file_atomic(out / files::kTrainSchedule,
                      [&](std::ostream& os) { write_schedule(os, cfg.train_schedule, cfg.render.frames_per_cycle); });
    write_file_atomic(out / files::kTestEvents, [&](std::ostream& os) {
        write_event_file(os, frames_to_events(test, crop, cfg.sensor_width, cfg.sensor_height));
    });
    write_file_atomic(out / files::kTestSchedule,
                      [&](std::ostream& os) { write_schedule(os, cfg.test_schedule, cfg.render.frames_per_cycle); });
}

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& events, const fs::path& out)
{
    cfg.validate();
    fs::create_directories(out);
    const FrameStream video = load_video(cfg, events);
    const PreparedStream prepared = prepare_stream(video, cfg.estimator, cfg.threads);

    ImitationTrainer trainer(cfg.trainer(), video.width() / cfg.estimator.leg_kernel,
                             video.height() / cfg.estimator.leg_kernel);
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        trainer.run(prepared);
    }

    write_file_atomic(out / files::kWeights, [&](std::ostream& os) { write_weights(os, trainer.weights()); });
    write_file_atomic(out / files::kTrainLog, [&](std::ostream& os) { write_train_log(os, trainer.log()); });
    write_file_atomic(out / files::kTrainRaster, [&](std::ostream& os) { write_raster(os, trainer.raster()); });
    return {cfg.repeats, trainer.updates(), trainer.skipped(), video.size()};
}

TestReport cmd_test(const RunConfig& cfg, const fs::path& weights_path, const fs::path& events,
                    const fs::path& schedule_path, const fs::path& out)
{
    cfg.validate();
    fs::create_directories(out);
    WeightMap weights;
    {
        std::istringstream in(read_file(weights_path));
        weights = read_weights(in);
    }
    ScheduleFile schedule;
    {
        std::istringstream in(read_file(schedule_path));
        schedule = read_schedule(in);
    }
    const std::size_t fpc = schedule.frames_per_cycle ? schedule.frames_per_cycle : cfg.render.frames_per_cycle;

    const FrameStream video = load_video(cfg, events);
    const FrameStream legs = pool_stream(video, PoolOp::And, cfg.estimator.leg_kernel, cfg.threads);
    if (!legs.empty() && (legs.width() != weights.width() || legs.height() != weights.height())) {
        throw DimensionError("weights are " + std::to_string(weights.width()) + "x" + std::to_string(weights.height()) +
                             " but the leg frames are " + std::to_string(legs.width()) + "x" +
                             std::to_string(legs.height()));
    }

    const SpikeRaster raster = run_frozen(weights, legs.frames, cfg.neuron);
    TestReport report;
    report.frames = legs.size();
    report.observed = label_sequence(raster, cfg.labeling());
    report.expected = expected_sequence(cfg, schedule.schedule, fpc);
    report.accuracy = sequence_accuracy(report.observed, report.expected);
    report.tripod = is_tripod(report.observed);
    report.output_spikes = raster.spike_count();
    for (const auto& f : legs.frames) {
        const std::size_t n = popcount(f);
        report.energy_inputs.input_spikes += n;
        report.energy_inputs.active_frames += n > 0 ? 1 : 0;
    }
    report.energy_inputs.leg_events = report.output_spikes;

    const GaitTrace trace = spikes_to_gait(raster, cfg.period());
    write_file_atomic(out / files::kTestRaster, [&](std::ostream& os) { write_raster(os, raster); });
    write_file_atomic(out / files::kGaitTrace, [&](std::ostream& os) { write_gait_trace(os, trace); });
    write_file_atomic(out / files::kLabels, [&](std::ostream& os) { write_label_sequence(os, report.observed); });
    write_file_atomic(out / files::kTestReport, [&](std::ostream& os) {
        os << "frames: " << report.frames << '\n';
        os << "output_spikes: " << report.output_spikes << '\n';
        os << "gait_cycles: " << trace.cycle_count() << '\n';
        os << "observed: " << sequence_text(report.observed) << '\n';
        os << "expected: " << sequence_text(report.expected) << '\n';
        os << "sequence_accuracy: " << fmt("%.6f", report.accuracy) << '\n';
        os << "is_tripod: " << (report.tripod ? "true" : "false") << '\n';
    });
    return report;
}

EnergyReport cmd_energy(const RunConfig& cfg, const fs::path& events, const fs::path& raster_path,
                        const std::optional<fs::path>& out)
{
    cfg.validate();
    const FrameStream video = load_video(cfg, events);
    EnergyInputs inputs;
    for (const auto& f : video.frames) {
        const std::size_t n = popcount(andpool(f, cfg.estimator.leg_kernel));
        inputs.input_spikes += n;
        inputs.active_frames += n > 0 ? 1 : 0;
    }
    {
        std::istringstream in(read_file(raster_path));
        inputs.leg_events = read_raster(in, cfg.neuron.dt).spike_count();
    }
    const EnergyReport report = energy_estimate(inputs, cfg.energy);
    if (out) {
        fs::create_directories(*out);
        write_file_atomic(*out / files::kEnergyReport,
                          [&](std::ostream& os) { write_energy_report(os, report, cfg.energy); });
    }
    return report;
}

ReproReport cmd_repro(const RunConfig& cfg, const fs::path& out, std::ostream* progress)
{
    cfg.validate();
    fs::create_directories(out);
    cmd_synth(cfg, out);

    // Train from the written event file so the run exercises the file format.
    const FrameStream video = load_video(cfg, out / files::kTrainEvents);
    const PreparedStream prepared = prepare_stream(video, cfg.estimator, cfg.threads);
    const LabelSequence expected = expected_sequence(cfg, cfg.train_schedule, cfg.render.frames_per_cycle);

    ImitationTrainer trainer(cfg.trainer(), video.width() / cfg.estimator.leg_kernel,
                             video.height() / cfg.estimator.leg_kernel);
    ReproReport report;
    auto evaluate = [&]() {
        const SpikeRaster r = run_frozen(trainer.weights(), prepared.leg_frames, cfg.neuron);
        return sequence_accuracy(label_sequence(r, cfg.labeling()), expected);
    };
    report.final_sequential_accuracy = evaluate();
    for (std::size_t r = 1; r <= cfg.repeats; ++r) {
        trainer.run(prepared);
        const double acc = evaluate();
        report.accuracy_per_repeat.push_back(acc);
        report.final_sequential_accuracy = acc;
        if (!report.converged_after && acc == 1.0) {
            report.converged_after = r;
        }
        if (progress) {
            *progress << "repetition " << r << ": sequential accuracy " << fmt("%.4f", acc) << '\n';
        }
    }

    write_file_atomic(out / files::kWeights, [&](std::ostream& os) { write_weights(os, trainer.weights()); });
    write_file_atomic(out / files::kTrainLog, [&](std::ostream& os) { write_train_log(os, trainer.log()); });
    write_file_atomic(out / files::kTrainRaster, [&](std::ostream& os) { write_raster(os, trainer.raster()); });

    const std::uint64_t before = file_checksum(out / files::kWeights);
    report.tripod = cmd_test(cfg, out / files::kWeights, out / files::kTestEvents, out / files::kTestSchedule, out);
    report.weights_unchanged = file_checksum(out / files::kWeights) == before;

    report.energy = energy_estimate(report.tripod.energy_inputs, cfg.energy);
    write_file_atomic(out / files::kEnergyReport,
                      [&](std::ostream& os) { write_energy_report(os, report.energy, cfg.energy); });

    const bool expect_tripod = is_tripod(report.tripod.expected);
    report.passed = report.final_sequential_accuracy == 1.0 && report.tripod.accuracy == 1.0 &&
                    (!expect_tripod || report.tripod.tripod) && report.weights_unchanged;

    const double rep_seconds = static_cast<double>(video.size()) * cfg.neuron.dt;
    write_file_atomic(out / files::kReport, [&](std::ostream& os) {
        os << "# imitation gait reproduction\n";
        os << "seed: " << cfg.render.seed << '\n';
        os << "training_frames_per_repeat: " << video.size() << '\n';
        os << "repeats: " << cfg.repeats << '\n';
        os << "training_updates: " << trainer.updates() << '\n';
        os << "training_skipped: " << trainer.skipped() << '\n';
        os << "accuracy_per_repeat:";
        for (double a : report.accuracy_per_repeat) {
            os << ' ' << fmt("%.4f", a);
        }
        os << '\n';
        if (report.converged_after) {
            os << "converged_after_repeats: " << *report.converged_after << '\n';
            os << "converged_after_sim_seconds: "
               << fmt("%.2f", static_cast<double>(*report.converged_after) * rep_seconds) << '\n';
        } else {
            os << "converged_after_repeats: none\n";
        }
        os << "sequential_accuracy: " << fmt("%.6f", report.final_sequential_accuracy) << '\n';
        os << "test_observed: " << sequence_text(report.tripod.observed) << '\n';
        os << "test_expected: " << sequence_text(report.tripod.expected) << '\n';
        os << "test_sequence_accuracy: " << fmt("%.6f", report.tripod.accuracy) << '\n';
        os << "test_is_tripod: " << (report.tripod.tripod ? "true" : "false") << '\n';
        os << "weights_unchanged_by_test: " << (report.weights_unchanged ? "true" : "false") << '\n';
        os << "energy_total_j: " << fmt("%.17g", report.energy.total) << '\n';
        os << "energy_per_leg_j: " << fmt("%.17g", report.energy.per_leg) << '\n';
        os << "acceptance: " << (report.passed ? "pass" : "fail") << '\n';
    });
    return report;
}

} // namespace gaitsim
